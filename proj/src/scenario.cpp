#include "ductwarp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ductwarp/csv.hpp"
#include "ductwarp/manifest.hpp"
#include "ductwarp/waveform_io.hpp"

namespace fs = std::filesystem;

namespace ductwarp {

namespace {

struct RawScenario {
    // section -> ordered (key, value, line)
    struct Item {
        std::string key;
        std::string value;
        int line;
    };
    std::map<std::string, std::vector<Item>> sections;
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

RawScenario parse_raw(std::istream& in) {
    RawScenario raw;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw InputError("scenario line " + std::to_string(line_no) +
                                 ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            raw.sections[section];
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw InputError("scenario line " + std::to_string(line_no) +
                             ": expected key = value");
        if (section.empty())
            throw InputError("scenario line " + std::to_string(line_no) +
                             ": key outside any [section]");
        raw.sections[section].push_back({trim(t.substr(0, eq)), trim(t.substr(eq + 1)), line_no});
    }
    return raw;
}

double to_number(const RawScenario::Item& item) {
    try {
        std::size_t used = 0;
        double v = std::stod(item.value, &used);
        if (used != item.value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw InputError("scenario line " + std::to_string(item.line) + ": key '" + item.key +
                         "' needs a number, got '" + item.value + "'");
    }
}

int to_int(const RawScenario::Item& item) {
    double v = to_number(item);
    if (v != std::floor(v))
        throw InputError("scenario line " + std::to_string(item.line) + ": key '" + item.key +
                         "' needs an integer");
    return static_cast<int>(v);
}

[[noreturn]] void unknown_key(const std::string& section, const RawScenario::Item& item) {
    throw InputError("scenario line " + std::to_string(item.line) + ": unknown key '" +
                     item.key + "' in [" + section + "]");
}

std::string resolve_path(const std::string& base_dir, const std::string& p) {
    fs::path path(p);
    if (path.is_absolute()) return path.string();
    return (fs::path(base_dir) / path).string();
}

} // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open scenario file: " + path);
    RawScenario raw = parse_raw(in);
    std::string base_dir = fs::path(path).parent_path().string();
    if (base_dir.empty()) base_dir = ".";

    Scenario s;
    s.source_path = path;

    static const std::set<std::string> known_sections = {
        "env", "duct", "geometry", "pulse", "solver", "synth", "warp", "spectrogram",
        "outputs"};
    for (const auto& [name, items] : raw.sections) {
        if (!known_sections.count(name))
            throw InputError("scenario: unknown section [" + name + "]");
        (void)items;
    }

    for (const auto& item : raw.sections["env"]) {
        if (item.key == "ssp") {
            s.stations.emplace_back(0.0, resolve_path(base_dir, item.value));
        } else if (item.key == "station") {
            auto comma = item.value.find(',');
            if (comma == std::string::npos)
                throw InputError("scenario line " + std::to_string(item.line) +
                                 ": station needs 'range_m, path'");
            RawScenario::Item range_item{item.key, trim(item.value.substr(0, comma)), item.line};
            s.stations.emplace_back(to_number(range_item),
                                    resolve_path(base_dir, trim(item.value.substr(comma + 1))));
        } else if (item.key == "bathymetry") {
            s.bathymetry_path = resolve_path(base_dir, item.value);
        } else if (item.key == "rho") {
            s.rho = to_number(item);
        } else if (item.key == "interpolation") {
            if (item.value == "piecewise-constant")
                s.interpolation = RangeInterpolation::PiecewiseConstant;
            else if (item.value == "linear-blend")
                s.interpolation = RangeInterpolation::LinearBlend;
            else
                throw InputError("scenario line " + std::to_string(item.line) +
                                 ": interpolation must be piecewise-constant or linear-blend");
        } else {
            unknown_key("env", item);
        }
    }
    if (s.stations.empty()) throw InputError("scenario: [env] needs an ssp or station entry");

    for (const auto& item : raw.sections["duct"]) {
        if (item.key == "depth_limit_m")
            s.duct_depth_limit = to_number(item);
        else
            unknown_key("duct", item);
    }

    for (const auto& item : raw.sections["geometry"]) {
        if (item.key == "source_depth_m")
            s.source_depth = to_number(item);
        else if (item.key == "receiver_depth_m")
            s.receiver_depth = to_number(item);
        else if (item.key == "range_m")
            s.range = to_number(item);
        else
            unknown_key("geometry", item);
    }

    for (const auto& item : raw.sections["pulse"]) {
        if (item.key == "f_lo_hz")
            s.f_lo = to_number(item);
        else if (item.key == "f_hi_hz")
            s.f_hi = to_number(item);
        else if (item.key == "shape") {
            if (item.value == "flat-band")
                s.pulse_shape = PulseShape::FlatBand;
            else if (item.value == "raised-cosine-band")
                s.pulse_shape = PulseShape::RaisedCosineBand;
            else
                throw InputError("scenario line " + std::to_string(item.line) +
                                 ": shape must be flat-band or raised-cosine-band");
        } else {
            unknown_key("pulse", item);
        }
    }

    for (const auto& item : raw.sections["solver"]) {
        if (item.key == "depth_max_m")
            s.solver.depth_max = to_number(item);
        else if (item.key == "dz_m")
            s.solver.dz = to_number(item);
        else if (item.key == "max_phase_speed_mps")
            s.solver.max_phase_speed = to_number(item);
        else
            unknown_key("solver", item);
    }
    s.solver.rho = s.rho;

    for (const auto& item : raw.sections["synth"]) {
        if (item.key == "route") {
            if (item.value == "duct")
                s.route = Scenario::Route::Duct;
            else if (item.value == "solver")
                s.route = Scenario::Route::Solver;
            else
                throw InputError("scenario line " + std::to_string(item.line) +
                                 ": route must be duct or solver");
        } else if (item.key == "mode") {
            if (item.value == "range-independent")
                s.synthesis_mode = SynthesisMode::RangeIndependent;
            else if (item.value == "adiabatic")
                s.synthesis_mode = SynthesisMode::Adiabatic;
            else
                throw InputError("scenario line " + std::to_string(item.line) +
                                 ": mode must be range-independent or adiabatic");
        } else if (item.key == "sample_rate_hz") {
            s.sample_rate = to_number(item);
        } else if (item.key == "duration_s") {
            s.duration = to_number(item);
        } else if (item.key == "modes") {
            s.n_modes = to_int(item);
        } else {
            unknown_key("synth", item);
        }
    }

    for (const auto& item : raw.sections["warp"]) {
        if (item.key == "tr") {
            if (item.value == "auto")
                s.tr_source = Scenario::TrSource::Auto;
            else if (item.value == "refine")
                s.tr_source = Scenario::TrSource::Refine;
            else {
                s.tr_source = Scenario::TrSource::Fixed;
                s.tr_fixed = to_number(item);
            }
        } else if (item.key == "oversample") {
            s.oversample = to_number(item);
        } else if (item.key == "interp") {
            if (item.value == "linear")
                s.interp = InterpKind::Linear;
            else if (item.value == "cubic")
                s.interp = InterpKind::Cubic;
            else
                throw InputError("scenario line " + std::to_string(item.line) +
                                 ": interp must be linear or cubic");
        } else if (item.key == "bands") {
            s.n_bands = to_int(item);
        } else if (item.key == "halfwidth_fraction") {
            s.halfwidth_fraction = to_number(item);
        } else if (item.key == "window_s") {
            s.window_s = to_number(item);
        } else if (item.key == "guard_s") {
            s.guard_s = to_number(item);
        } else {
            unknown_key("warp", item);
        }
    }

    for (const auto& item : raw.sections["spectrogram"]) {
        if (item.key == "window")
            s.stft_window = to_int(item);
        else if (item.key == "hop")
            s.stft_hop = to_int(item);
        else if (item.key == "threshold")
            s.ridge_threshold = to_number(item);
        else
            unknown_key("spectrogram", item);
    }

    for (const auto& item : raw.sections["outputs"]) {
        if (item.key == "dir") {
            s.out_dir = item.value; // relative to the working directory, not the cfg
        } else if (item.key == "artifacts") {
            std::stringstream ss(item.value);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                tok = trim(tok);
                if (!tok.empty()) s.artifacts.insert(tok);
            }
        } else {
            unknown_key("outputs", item);
        }
    }

    static const std::set<std::string> known_artifacts = {
        "waveform", "spectrogram", "skeleton",   "warped",
        "warped-spectrum", "modes",  "dispersion", "mode-table"};
    for (const auto& a : s.artifacts)
        if (!known_artifacts.count(a)) throw InputError("scenario: unknown artifact '" + a + "'");

    return s;
}

ScenarioResult run_scenario(const Scenario& s) {
    auto wants = [&](const std::string& a) { return s.artifacts.empty() || s.artifacts.count(a); };

    fs::create_directories(s.out_dir);
    RunManifest manifest("scenario");
    if (!s.source_path.empty()) manifest.add_input("scenario", s.source_path);

    // Environment.
    std::vector<RangeDependentEnv::Station> stations;
    for (const auto& [range, path] : s.stations) {
        stations.push_back({range, parse_ssp_file(path)});
        manifest.add_input("ssp@" + csv_number(range), path);
    }
    std::optional<BathymetryTrack> bathy;
    if (!s.bathymetry_path.empty()) {
        bathy = parse_bathymetry_file(s.bathymetry_path);
        manifest.add_input("bathymetry", s.bathymetry_path);
    }
    RangeDependentEnv env(std::move(stations), std::move(bathy), s.rho, s.interpolation);
    SoundSpeedProfile source_profile = env_at_range(env, 0.0);

    LinearDuct duct = fit_linear_duct(source_profile, s.duct_depth_limit);
    manifest.add_parameter("duct.c0", duct.c0);
    manifest.add_parameter("duct.a", duct.a);
    manifest.add_parameter("duct.depth_limit_m", s.duct_depth_limit);
    manifest.add_parameter("geometry.range_m", s.range);
    manifest.add_parameter("geometry.source_depth_m", s.source_depth);
    manifest.add_parameter("geometry.receiver_depth_m", s.receiver_depth);
    manifest.add_parameter("pulse.f_lo_hz", s.f_lo);
    manifest.add_parameter("pulse.f_hi_hz", s.f_hi);
    manifest.add_parameter("synth.sample_rate_hz", s.sample_rate);
    manifest.add_parameter("synth.duration_s", s.duration);
    manifest.add_parameter("synth.modes", static_cast<double>(s.n_modes));
    manifest.add_parameter("synth.route",
                           s.route == Scenario::Route::Duct ? "duct" : "solver");
    manifest.add_parameter("warp.oversample", s.oversample);
    manifest.add_parameter("warp.bands", static_cast<double>(s.n_bands));
    manifest.add_parameter("warp.halfwidth_fraction", s.halfwidth_fraction);

    Geometry geometry(s.source_depth, s.receiver_depth, s.range);
    SourcePulse pulse(s.f_lo, s.f_hi, s.pulse_shape);

    ScenarioResult result;
    result.bands_requested = s.n_bands;

    // Synthesis.
    Waveform waveform;
    if (s.route == Scenario::Route::Duct) {
        std::vector<int> mode_list(s.n_modes);
        for (int m = 1; m <= s.n_modes; ++m) mode_list[m - 1] = m;
        waveform = synthesize_duct_waveform(duct, mode_list, s.range, pulse, s.sample_rate,
                                            s.duration);
    } else {
        SynthesisResult synth = synthesize_waveform(env, geometry, pulse, s.sample_rate,
                                                    s.duration, s.solver, s.synthesis_mode);
        waveform = std::move(synth.waveform);
        result.dropped_modes = synth.dropped_modes;
    }

    auto emit = [&](const std::string& name) {
        std::string path = (fs::path(s.out_dir) / name).string();
        result.artifact_paths.push_back(path);
        return path;
    };

    if (wants("waveform")) {
        std::string p = emit("waveform.f32");
        write_waveform(p, waveform);
        manifest.add_output(p);
        manifest.add_output(p + ".json");
        result.artifact_paths.push_back(p + ".json");
    }

    if (wants("spectrogram")) {
        Spectrogram sg = stft(waveform, s.stft_window, s.stft_hop);
        std::string p = emit("spectrogram.csv");
        std::ofstream out(p);
        write_spectrogram_csv(out, sg);
        out.close();
        manifest.add_output(p);
    }

    // Reference arrival time.
    double t_r = 0.0;
    switch (s.tr_source) {
        case Scenario::TrSource::Auto:
            t_r = estimate_tr(s.range, duct.c0);
            break;
        case Scenario::TrSource::Fixed:
            t_r = s.tr_fixed;
            break;
        case Scenario::TrSource::Refine: {
            TrEstimate est = estimate_tr_refined(waveform, s.range, duct.c0, s.oversample);
            t_r = est.t_r;
            manifest.add_parameter("warp.tr_refined", est.refined ? "true" : "false");
            break;
        }
    }
    result.t_r = t_r;
    manifest.add_parameter("warp.t_r_s", t_r);

    if (wants("skeleton")) {
        std::vector<int> mode_list(s.n_bands);
        for (int m = 1; m <= s.n_bands; ++m) mode_list[m - 1] = m;
        auto skeleton = dispersion_skeleton(duct, s.range, mode_list, s.f_lo, s.f_hi, 181);
        std::string p = emit("skeleton.csv");
        std::ofstream out(p);
        write_dispersion_csv(out, skeleton);
        out.close();
        manifest.add_output(p);
    }

    if (wants("mode-table")) {
        double f_ref = 0.5 * (s.f_lo + s.f_hi);
        DepthGrid grid = make_solver_grid(source_profile, s.solver, s.f_hi);
        double maxps = resolve_max_phase_speed(source_profile, s.solver);
        ModeSolution sol = solve_modes(source_profile, f_ref, grid, maxps, s.rho);
        fill_group_speeds(sol, source_profile, maxps, 0.5);
        std::string p = emit("mode_table.csv");
        std::ofstream out(p);
        write_mode_table(out, sol);
        out.close();
        manifest.add_output(p);
    }

    // Warping pipeline on the pre-arrival analysis window.
    Waveform analysis = slice(waveform, t_r - s.window_s, t_r - s.guard_s);
    WarpPlan plan(t_r, s.oversample, s.interp);
    Waveform warped = warp_signal(analysis, plan);

    if (wants("warped")) {
        std::string p = emit("warped.f32");
        write_waveform(p, warped);
        manifest.add_output(p);
        manifest.add_output(p + ".json");
        result.artifact_paths.push_back(p + ".json");
    }

    if (wants("warped-spectrum")) {
        PowerSpectrum ps = power_spectrum(warped, 0.1);
        std::string p = emit("warped_spectrum.csv");
        std::ofstream out(p);
        out << "f_hz,power\n";
        for (std::size_t i = 0; i < ps.freqs.size(); ++i)
            out << csv_number(ps.freqs[i]) << ',' << csv_number(ps.power[i]) << '\n';
        out.close();
        manifest.add_output(p);
    }

    if (wants("modes") || wants("dispersion")) {
        auto bands = duct_mode_bands(duct, s.range, s.n_bands, s.halfwidth_fraction);
        SeparationParams params;
        params.stft_window = s.stft_window;
        params.stft_hop = s.stft_hop;
        params.ridge_threshold = s.ridge_threshold;
        auto separated = separate_modes(analysis, plan, bands, params);

        std::vector<SkeletonPoint> combined;
        for (const auto& mode : separated) {
            if (!mode.present) continue;
            ++result.bands_present;
            if (wants("modes")) {
                std::string p = emit("mode_" + std::to_string(mode.m) + ".f32");
                write_waveform(p, mode.waveform);
                manifest.add_output(p);
                manifest.add_output(p + ".json");
                result.artifact_paths.push_back(p + ".json");
                std::string rp = emit("ridge_" + std::to_string(mode.m) + ".csv");
                std::ofstream out(rp);
                write_ridge_csv(out, mode.ridge);
                out.close();
                manifest.add_output(rp);
            }
            for (const auto& pt : mode.ridge) combined.push_back({mode.m, pt.f_hz, pt.t_s});
        }
        if (wants("dispersion")) {
            std::string p = emit("dispersion.csv");
            std::ofstream out(p);
            write_dispersion_csv(out, combined);
            out.close();
            manifest.add_output(p);
        }
    }

    std::string manifest_path = (fs::path(s.out_dir) / "manifest.json").string();
    manifest.write(manifest_path);
    result.artifact_paths.push_back(manifest_path);
    return result;
}

} // namespace ductwarp
