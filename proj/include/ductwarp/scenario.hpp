#ifndef DUCTWARP_SCENARIO_HPP
#define DUCTWARP_SCENARIO_HPP

#include <set>
#include <string>
#include <vector>

#include "ductwarp/env.hpp"
#include "ductwarp/synth.hpp"
#include "ductwarp/warp.hpp"

namespace ductwarp {

/// A full experiment description loaded from the flat key/value scenario
/// format (see README for the grammar). Paths are resolved against the
/// scenario file's directory.
struct Scenario {
    // [env]
    std::vector<std::pair<double, std::string>> stations; // (range_m, ssp path)
    std::string bathymetry_path;                          // optional
    double rho = 1000.0;
    RangeInterpolation interpolation = RangeInterpolation::PiecewiseConstant;

    // [duct]
    double duct_depth_limit = 400.0;

    // [geometry]
    double source_depth = 300.0;
    double receiver_depth = 372.0;
    double range = 105000.0;

    // [pulse]
    double f_lo = 10.0;
    double f_hi = 100.0;
    PulseShape pulse_shape = PulseShape::RaisedCosineBand;

    // [solver]
    SolverConfig solver;

    enum class Route { Duct, Solver };
    enum class TrSource { Auto, Fixed, Refine };

    // [synth]
    Route route = Route::Duct;
    SynthesisMode synthesis_mode = SynthesisMode::RangeIndependent;
    double sample_rate = 400.0;
    double duration = 6.0;
    int n_modes = 6;

    // [warp]
    TrSource tr_source = TrSource::Auto;
    double tr_fixed = 0.0;
    double oversample = 4.0;
    InterpKind interp = InterpKind::Cubic;
    int n_bands = 6;
    double halfwidth_fraction = 0.4;
    double window_s = 3.0; // analysis window length before t_r
    double guard_s = 0.05; // gap kept before t_r

    // [spectrogram]
    int stft_window = 256;
    int stft_hop = 8;
    double ridge_threshold = 0.25;

    // [outputs]
    std::string out_dir = "out";
    std::set<std::string> artifacts; // empty -> all

    std::string source_path; // scenario file, for the manifest
};

/// Parses and validates a scenario file. Unknown sections or keys are
/// rejected with their line number.
Scenario load_scenario(const std::string& path);

struct ScenarioResult {
    double t_r = 0.0;
    int bands_requested = 0;
    int bands_present = 0;
    int dropped_modes = 0;
    std::vector<std::string> artifact_paths; // absolute or out_dir-relative
};

/// Runs the pipeline (env -> duct fit -> synthesis -> warp -> separation)
/// and writes the selected artifacts plus manifest.json into out_dir.
ScenarioResult run_scenario(const Scenario& s);

} // namespace ductwarp

#endif
