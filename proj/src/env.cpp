#include "ductwarp/env.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

namespace ductwarp {

namespace {

constexpr double kSpeedMin = 1300.0;
constexpr double kSpeedMax = 1700.0;

void validate_profile(const std::vector<SspSample>& samples) {
    if (samples.size() < 2)
        throw InputError("sound-speed profile needs at least 2 samples");
    if (samples.front().depth_m < 0.0)
        throw InputError("first profile depth must be >= 0");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i].speed_mps >= kSpeedMin && samples[i].speed_mps <= kSpeedMax))
            throw InputError("sound speed " + std::to_string(samples[i].speed_mps) +
                             " m/s outside [1300, 1700]");
        if (i > 0 && !(samples[i].depth_m > samples[i - 1].depth_m))
            throw InputError("profile depths must be strictly increasing");
    }
}

// Parses one "number,number" row. Returns false on blank lines.
bool parse_pair(const std::string& line, double& x, double& y) {
    std::string s = line;
    if (auto pos = s.find('#'); pos != std::string::npos) s.erase(pos);
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    s.erase(std::remove_if(s.begin(), s.end(), is_space), s.end());
    if (s.empty()) return false;
    auto comma = s.find(',');
    if (comma == std::string::npos)
        throw InputError("expected two comma-separated columns");
    const char* b1 = s.data();
    const char* e1 = s.data() + comma;
    const char* b2 = s.data() + comma + 1;
    const char* e2 = s.data() + s.size();
    auto r1 = std::from_chars(b1, e1, x);
    auto r2 = std::from_chars(b2, e2, y);
    if (r1.ec != std::errc{} || r1.ptr != e1 || r2.ec != std::errc{} || r2.ptr != e2)
        throw InputError("malformed numeric field");
    return true;
}

bool looks_like_header(const std::string& line) {
    auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) return false;
    char c = line[pos];
    return !(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.');
}

template <typename RowFn>
void parse_csv_rows(std::istream& text, RowFn&& on_row) {
    std::string line;
    int line_no = 0;
    bool seen_data = false;
    while (std::getline(text, line)) {
        ++line_no;
        double x = 0.0, y = 0.0;
        try {
            if (!parse_pair(line, x, y)) continue;
        } catch (const InputError& e) {
            if (!seen_data && looks_like_header(line)) continue; // optional header row
            throw InputError("line " + std::to_string(line_no) + ": " + e.what());
        }
        seen_data = true;
        try {
            on_row(x, y);
        } catch (const InputError& e) {
            throw InputError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

std::string shortest_decimal(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

SoundSpeedProfile::SoundSpeedProfile(std::vector<SspSample> samples, std::string name)
    : samples_(std::move(samples)), name_(std::move(name)) {
    validate_profile(samples_);
}

double SoundSpeedProfile::speed_at(double depth_m) const {
    return interpolate_speed(*this, depth_m);
}

double SoundSpeedProfile::deep_gradient() const {
    const auto& a = samples_[samples_.size() - 2];
    const auto& b = samples_.back();
    return (b.speed_mps - a.speed_mps) / (b.depth_m - a.depth_m);
}

double SoundSpeedProfile::min_speed() const {
    double m = samples_.front().speed_mps;
    for (const auto& s : samples_) m = std::min(m, s.speed_mps);
    return m;
}

LinearDuct::LinearDuct(double c0_, double a_, double duct_depth_)
    : c0(c0_), a(a_), duct_depth(duct_depth_) {
    if (!(c0 > 0.0)) throw InputError("duct c0 must be > 0");
    if (!(a > 0.0)) throw InputError("duct gradient a must be > 0");
    if (!(duct_depth > 0.0)) throw InputError("duct depth must be > 0");
}

BathymetryTrack::BathymetryTrack(std::vector<Point> points) : points_(std::move(points)) {
    if (points_.empty()) throw InputError("bathymetry track is empty");
    if (points_.front().range_m != 0.0)
        throw InputError("bathymetry ranges must start at 0");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!(points_[i].depth_m > 0.0)) throw InputError("bathymetry depths must be > 0");
        if (i > 0 && !(points_[i].range_m > points_[i - 1].range_m))
            throw InputError("bathymetry ranges must be strictly increasing");
    }
}

double BathymetryTrack::depth_at(double range_m) const {
    if (range_m <= points_.front().range_m) return points_.front().depth_m;
    if (range_m >= points_.back().range_m) return points_.back().depth_m;
    auto it = std::upper_bound(points_.begin(), points_.end(), range_m,
                               [](double r, const Point& p) { return r < p.range_m; });
    const Point& hi = *it;
    const Point& lo = *(it - 1);
    double w = (range_m - lo.range_m) / (hi.range_m - lo.range_m);
    return lo.depth_m + w * (hi.depth_m - lo.depth_m);
}

RangeDependentEnv::RangeDependentEnv(std::vector<Station> stations,
                                     std::optional<BathymetryTrack> bathymetry, double rho,
                                     RangeInterpolation interpolation)
    : stations_(std::move(stations)),
      bathymetry_(std::move(bathymetry)),
      rho_(rho),
      interpolation_(interpolation) {
    if (stations_.empty()) throw InputError("environment needs at least one SSP station");
    if (!(rho_ > 0.0)) throw InputError("density must be > 0");
    for (std::size_t i = 1; i < stations_.size(); ++i)
        if (!(stations_[i].range_m > stations_[i - 1].range_m))
            throw InputError("station ranges must be strictly increasing");
}

SoundSpeedProfile parse_ssp(std::istream& text, const std::string& name) {
    std::vector<SspSample> samples;
    parse_csv_rows(text, [&](double depth, double speed) {
        if (!(speed >= kSpeedMin && speed <= kSpeedMax))
            throw InputError("sound speed " + shortest_decimal(speed) +
                             " m/s outside [1300, 1700]");
        if (!samples.empty() && !(depth > samples.back().depth_m))
            throw InputError("depth " + shortest_decimal(depth) + " not above previous row");
        samples.push_back({depth, speed});
    });
    return SoundSpeedProfile(std::move(samples), name);
}

SoundSpeedProfile parse_ssp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open SSP file: " + path);
    return parse_ssp(in, path);
}

std::string serialize_ssp(const SoundSpeedProfile& profile) {
    std::string out = "depth_m,speed_mps\n";
    for (const auto& s : profile.samples()) {
        out += shortest_decimal(s.depth_m);
        out += ',';
        out += shortest_decimal(s.speed_mps);
        out += '\n';
    }
    return out;
}

BathymetryTrack parse_bathymetry(std::istream& text) {
    std::vector<BathymetryTrack::Point> points;
    parse_csv_rows(text, [&](double range, double depth) {
        points.push_back({range, depth});
    });
    return BathymetryTrack(std::move(points));
}

BathymetryTrack parse_bathymetry_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open bathymetry file: " + path);
    return parse_bathymetry(in);
}

double interpolate_speed(const SoundSpeedProfile& profile, double z) {
    if (!(z >= 0.0)) throw InputError("depth must be >= 0");
    const auto& s = profile.samples();
    if (z <= s.front().depth_m) return s.front().speed_mps;
    if (z >= s.back().depth_m)
        return s.back().speed_mps + profile.deep_gradient() * (z - s.back().depth_m);
    auto it = std::upper_bound(s.begin(), s.end(), z, [](double zz, const SspSample& p) {
        return zz < p.depth_m;
    });
    const SspSample& hi = *it;
    const SspSample& lo = *(it - 1);
    double w = (z - lo.depth_m) / (hi.depth_m - lo.depth_m);
    return lo.speed_mps + w * (hi.speed_mps - lo.speed_mps);
}

LinearDuct fit_linear_duct(const SoundSpeedProfile& profile, double depth_limit) {
    if (!(depth_limit > 0.0)) throw InputError("depth limit must be > 0");
    // Fit c = c0 + (c0 a) z as an ordinary least-squares line, then split.
    double sz = 0, sc = 0, szz = 0, szc = 0;
    int n = 0;
    for (const auto& p : profile.samples()) {
        if (p.depth_m > depth_limit) continue;
        sz += p.depth_m;
        sc += p.speed_mps;
        szz += p.depth_m * p.depth_m;
        szc += p.depth_m * p.speed_mps;
        ++n;
    }
    if (n < 2) throw InputError("fewer than 2 profile samples within the depth limit");
    double det = n * szz - sz * sz;
    if (det == 0.0) throw NumericalError("degenerate depth distribution in duct fit");
    double slope = (n * szc - sz * sc) / det;
    double c0 = (sc * szz - sz * szc) / det;
    double a = slope / c0;
    if (!(a > 0.0))
        throw NumericalError("fitted gradient a <= 0: profile is not a surface duct");
    return LinearDuct(c0, a, depth_limit);
}

SoundSpeedProfile env_at_range(const RangeDependentEnv& env, double r) {
    const auto& st = env.stations();
    if (!(r >= 0.0) || r > env.max_range())
        throw InputError("range outside the station track");
    if (r <= st.front().range_m) return st.front().profile;
    if (r >= st.back().range_m) return st.back().profile;
    auto it = std::upper_bound(st.begin(), st.end(), r,
                               [](double rr, const RangeDependentEnv::Station& s) {
                                   return rr < s.range_m;
                               });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    if (env.interpolation() == RangeInterpolation::PiecewiseConstant) return lo.profile;

    // Depth-wise linear blend on the union depth grid of the two profiles.
    std::set<double> depths;
    for (const auto& p : lo.profile.samples()) depths.insert(p.depth_m);
    for (const auto& p : hi.profile.samples()) depths.insert(p.depth_m);
    double w = (r - lo.range_m) / (hi.range_m - lo.range_m);
    std::vector<SspSample> blended;
    blended.reserve(depths.size());
    for (double z : depths) {
        double c = (1.0 - w) * interpolate_speed(lo.profile, z) +
                   w * interpolate_speed(hi.profile, z);
        blended.push_back({z, c});
    }
    std::ostringstream name;
    name << lo.profile.name() << "+" << hi.profile.name() << "@r=" << r;
    return SoundSpeedProfile(std::move(blended), name.str());
}

} // namespace ductwarp
