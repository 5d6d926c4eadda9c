#ifndef DUCTWARP_SYNTH_HPP
#define DUCTWARP_SYNTH_HPP

#include <complex>
#include <functional>
#include <iosfwd>
#include <vector>

#include "ductwarp/env.hpp"
#include "ductwarp/modes.hpp"
#include "ductwarp/waveform.hpp"
#include "ductwarp/wkb.hpp"

namespace ductwarp {

enum class PulseShape { FlatBand, RaisedCosineBand };

/// Broadband source with reference spectrum S(omega): unit magnitude inside
/// [f_lo, f_hi], either hard band edges or raised-cosine tapers over 10% of
/// the bandwidth at each edge.
struct SourcePulse {
    double f_lo;
    double f_hi;
    PulseShape shape = PulseShape::RaisedCosineBand;

    SourcePulse(double lo, double hi, PulseShape s = PulseShape::RaisedCosineBand);
};

/// S at frequency f (Hz), per the pulse shape.
double source_spectrum(const SourcePulse& pulse, double f);

struct Geometry {
    double z_s; // source depth, m
    double z_r; // receiver depth, m
    double r;   // range, m

    Geometry(double zs, double zr, double range);
};

/// Two-dimensional transmission-loss field, dB re 1 m.
struct TLMap {
    std::vector<double> ranges;
    std::vector<double> depths;
    std::vector<std::vector<double>> tl; // tl[depth][range]
};

/// Per-frequency mode-solution source; lets callers swap the numerical
/// solver for a cached or analytic variant.
using ModeSolutionProvider = std::function<ModeSolution(double frequency_hz)>;

/// Solver parameters shared by the synthesis front ends. max_phase_speed = 0
/// selects c at the truncation depth H.
struct SolverConfig {
    double depth_max = 2000.0; // m
    double dz = 0.0;           // m; 0 picks c_min/(40 f_hi)
    double max_phase_speed = 0.0;
    double rho = 1000.0;
};

/// Resolved grid/phase-speed parameters for a profile and band.
DepthGrid make_solver_grid(const SoundSpeedProfile& profile, const SolverConfig& cfg,
                           double f_hi);
double resolve_max_phase_speed(const SoundSpeedProfile& profile, const SolverConfig& cfg);

/// Complex pressure on a frequency grid from the normal-mode sum:
///   P = S(w) * (e^{j pi/4} / (rho(z_s) sqrt(8 pi r)))
///       * sum_m Psi_m(z_s) Psi_m(z_r) e^{-alpha_m r} e^{j k_m r} / sqrt(k_m).
/// Modes evanescent at a grid frequency are simply absent from its solution.
std::vector<std::complex<double>> synthesize_pressure_spectrum(
    const ModeSolutionProvider& provider, const Geometry& geometry, const SourcePulse& pulse,
    const std::vector<double>& freq_grid);

enum class SynthesisMode { RangeIndependent, Adiabatic };

struct SynthesisResult {
    Waveform waveform;
    int dropped_modes = 0; // adiabatic: modes present at the source but lost en route
};

/// Broadband time series via the inverse DFT of the pressure spectrum on the
/// DFT grid of the requested duration. The window is centered on
/// t_r = r / c0 of the receiver-local profile. Requires sample_rate >= 4 f_hi.
SynthesisResult synthesize_waveform(const SoundSpeedProfile& profile,
                                    const Geometry& geometry, const SourcePulse& pulse,
                                    double sample_rate, double duration,
                                    const SolverConfig& cfg);

/// Range-dependent variant. RangeIndependent uses the station at r = 0;
/// Adiabatic replaces k_m r with the trapezoid of k_m(r') over the stations
/// and evaluates Psi at the source-local and receiver-local profiles. Modes
/// that do not survive to every station are dropped and counted.
SynthesisResult synthesize_waveform(const RangeDependentEnv& env, const Geometry& geometry,
                                    const SourcePulse& pulse, double sample_rate,
                                    double duration, const SolverConfig& cfg,
                                    SynthesisMode mode);

/// Analytic linear-duct synthesis: each mode carries phase k_m(omega) * r with
/// the linearized duct wavenumber and amplitude S(omega)/sqrt(k_m r). This is
/// the reference generator for the warping tests; modes past cutoff at a grid
/// frequency are skipped.
Waveform synthesize_duct_waveform(const LinearDuct& duct, const std::vector<int>& mode_indices,
                                  double r, const SourcePulse& pulse, double sample_rate,
                                  double duration);

/// TL(r, z) = -20 log10 |P| with S = 1, on a range x depth grid at one
/// frequency.
TLMap transmission_loss_map(const SoundSpeedProfile& profile, double frequency, double z_s,
                            const std::vector<double>& range_grid,
                            const std::vector<double>& depth_grid, const SolverConfig& cfg);

/// One (mode, frequency, arrival-time) sample of the duct dispersion curves.
struct SkeletonPoint {
    int m;
    double f_hz;
    double t_s;
};

/// Samples modal_group_delay over [f_lo, f_hi] for each requested mode;
/// frequencies past a mode's cutoff are excluded.
std::vector<SkeletonPoint> dispersion_skeleton(const LinearDuct& duct, double r,
                                               const std::vector<int>& mode_indices,
                                               double f_lo, double f_hi, int n_freq);

/// Dispersion CSV: `m,f_hz,t_s`.
void write_dispersion_csv(std::ostream& out, const std::vector<SkeletonPoint>& points);

/// TL CSV: first row = ranges, first column = depths, body = TL dB.
void write_tl_csv(std::ostream& out, const TLMap& map);

/// Inverse-DFT assembly shared by the synthesis routes: spectrum samples at
/// f_k = k * fs / n for k = 0..n/2 produce n time samples starting at t0.
Waveform waveform_from_spectrum(const std::vector<std::complex<double>>& spectrum,
                                double sample_rate, double t0);

} // namespace ductwarp

#endif
