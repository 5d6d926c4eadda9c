#ifndef DUCTWARP_ENV_HPP
#define DUCTWARP_ENV_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ductwarp/errors.hpp"

namespace ductwarp {

/// Sampled sound-speed profile c(z).
///
/// Depths are strictly increasing with the first depth >= 0; speeds must lie
/// in [1300, 1700] m/s (rejects unit errors such as km/s or dm/s columns).
struct SspSample {
    double depth_m;
    double speed_mps;
};

class SoundSpeedProfile {
public:
    SoundSpeedProfile(std::vector<SspSample> samples, std::string name = "");

    const std::vector<SspSample>& samples() const { return samples_; }
    const std::string& name() const { return name_; }

    /// Piecewise-linear c(z); below the deepest sample the last segment's
    /// gradient is extended, above the first sample the speed is held.
    double speed_at(double depth_m) const;

    /// Gradient of the last segment, m/s per m (used for the deep extension).
    double deep_gradient() const;

    double min_speed() const;
    double max_depth() const { return samples_.back().depth_m; }

private:
    std::vector<SspSample> samples_;
    std::string name_;
};

/// Linear surface duct c(z) = c0 (1 + a z), valid down to duct_depth.
struct LinearDuct {
    double c0;         // surface sound speed, m/s
    double a;          // fractional speed gradient, 1/m
    double duct_depth; // validity depth of the linear fit, m

    LinearDuct(double c0_, double a_, double duct_depth_);

    double speed_at(double z) const { return c0 * (1.0 + a * z); }
};

/// Seabed depth along the propagation track.
class BathymetryTrack {
public:
    struct Point {
        double range_m;
        double depth_m;
    };

    explicit BathymetryTrack(std::vector<Point> points);

    const std::vector<Point>& points() const { return points_; }
    double depth_at(double range_m) const;

private:
    std::vector<Point> points_;
};

enum class RangeInterpolation { PiecewiseConstant, LinearBlend };

/// Range-dependent environment: SSP stations along the track plus optional
/// bathymetry. Density is constant (the water column is treated as uniform).
class RangeDependentEnv {
public:
    struct Station {
        double range_m;
        SoundSpeedProfile profile;
    };

    RangeDependentEnv(std::vector<Station> stations,
                      std::optional<BathymetryTrack> bathymetry = std::nullopt,
                      double rho = 1000.0,
                      RangeInterpolation interpolation = RangeInterpolation::PiecewiseConstant);

    const std::vector<Station>& stations() const { return stations_; }
    const std::optional<BathymetryTrack>& bathymetry() const { return bathymetry_; }
    double rho() const { return rho_; }
    RangeInterpolation interpolation() const { return interpolation_; }
    double max_range() const { return stations_.back().range_m; }

private:
    std::vector<Station> stations_;
    std::optional<BathymetryTrack> bathymetry_;
    double rho_;
    RangeInterpolation interpolation_;
};

/// Parses the two-column SSP CSV (`depth_m,speed_mps`, optional header).
/// Malformed rows, non-monotone depths and out-of-range speeds are reported
/// with their line number.
SoundSpeedProfile parse_ssp(std::istream& text, const std::string& name = "");
SoundSpeedProfile parse_ssp_file(const std::string& path);

/// Exact decimal round-trip serialization (parse_ssp(serialize_ssp(p)) == p).
std::string serialize_ssp(const SoundSpeedProfile& profile);

/// Parses the two-column bathymetry CSV (`range_m,depth_m`).
BathymetryTrack parse_bathymetry(std::istream& text);
BathymetryTrack parse_bathymetry_file(const std::string& path);

/// Piecewise-linear interpolation of c(z), constant-gradient below the
/// deepest sample. Total on z >= 0.
double interpolate_speed(const SoundSpeedProfile& profile, double z);

/// Least-squares fit of c(z) = c0 (1 + a z) over samples with depth <=
/// depth_limit. Fails when fewer than two samples are in range or the fitted
/// gradient is not upward-refracting (a <= 0).
LinearDuct fit_linear_duct(const SoundSpeedProfile& profile, double depth_limit);

/// Profile at range r: nearest station at or before r (piecewise-constant)
/// or a depth-wise blend of the bracketing stations on their union depth
/// grid (linear-blend). r must lie within [0, last station range].
SoundSpeedProfile env_at_range(const RangeDependentEnv& env, double r);

} // namespace ductwarp

#endif
