#ifndef DUCTWARP_WARP_HPP
#define DUCTWARP_WARP_HPP

#include <iosfwd>
#include <vector>

#include "ductwarp/env.hpp"
#include "ductwarp/waveform.hpp"
#include "ductwarp/wkb.hpp"

namespace ductwarp {

/// Magnitude STFT on a centered-frame grid.
struct Spectrogram {
    std::vector<double> times; // s, frame centers (absolute)
    std::vector<double> freqs; // Hz
    std::vector<std::vector<double>> mag; // mag[time][freq]
    int window_len = 0;
    int hop = 0;

    double time_bin() const; // frame spacing in seconds
};

enum class InterpKind { Linear, Cubic };

/// Parameters of the time-axis warping h(u) = t_r - u^-2.
struct WarpPlan {
    double t_r;           // reference arrival time, s
    double oversample = 4; // warped-axis rate = oversample * input rate
    InterpKind interp = InterpKind::Cubic;

    WarpPlan(double tr, double os = 4.0, InterpKind kind = InterpKind::Cubic);
};

/// Warped-domain passband of one mode (center = f_m of the duct comb).
struct ModeBand {
    int m;
    double center;    // Hz
    double halfwidth; // Hz

    ModeBand(int mode, double c, double hw);
};

/// Magnitude STFT, Hann window, centered frames, zero-padded edges.
Spectrogram stft(const Waveform& w, int window_len, int hop);

/// Warping transform: output sample at warped time u is
/// |dh/du|^(1/2) * s(h(u)), sampled uniformly at oversample * sample_rate
/// over the image of the input support. The input support must lie in
/// (0, t_r).
Waveform warp_signal(const Waveform& w, const WarpPlan& plan);

/// Inverse transform with the reciprocal amplitude weight; output on the
/// image of the warped support at rate sample_rate/oversample.
Waveform unwarp_signal(const Waveform& w, const WarpPlan& plan);

/// Inverse transform onto an explicit output grid (used to land separated
/// modes back on the original signal grid).
Waveform unwarp_signal_onto(const Waveform& w, const WarpPlan& plan, double out_rate,
                            double out_t0, std::size_t out_n);

/// Zero-phase band-pass: Blackman-windowed sinc (>= 60 dB stopband), applied
/// by linear convolution with the kernel center aligned.
Waveform bandpass_zero_phase(const Waveform& w, double f_lo, double f_hi,
                             double transition_hz);

struct RidgePoint {
    double f_hz;
    double t_s;
};

/// Per-frequency-column argmax ridge: every frequency bin whose column max
/// reaches threshold_fraction of the global max emits (f, argmax time), ties
/// toward earlier time.
std::vector<RidgePoint> extract_dispersion(const Spectrogram& sg, double threshold_fraction);

struct SeparationParams {
    int stft_window = 256;
    int stft_hop = 8;
    double ridge_threshold = 0.25;
    double transition_fraction = 0.5; // band transition = fraction * halfwidth
};

struct SeparatedMode {
    int m = 0;
    bool present = false;
    Waveform waveform;             // on the input grid; empty when absent
    std::vector<RidgePoint> ridge; // extracted dispersion curve
};

/// Single-receiver mode separation: warp -> per-band zero-phase band-pass ->
/// unwarp -> STFT -> ridge extraction. Bands must not overlap; bands with no
/// energy are reported absent.
std::vector<SeparatedMode> separate_modes(const Waveform& w, const WarpPlan& plan,
                                          const std::vector<ModeBand>& bands,
                                          const SeparationParams& params = {});

/// Warped-domain band plan from the duct comb: centers at f_m, halfwidth a
/// fraction of the constant comb spacing.
std::vector<ModeBand> duct_mode_bands(const LinearDuct& duct, double r, int count,
                                      double halfwidth_fraction = 0.4);

/// Geometric reference arrival time r / c0.
double estimate_tr(double r, double c0);

struct TrEstimate {
    double t_r = 0.0;
    bool refined = false; // false -> scan failed, value fell back to r/c0
};

/// Refines t_r by maximizing warped-domain spectral concentration (max of
/// the warped power spectrum) over a +/-1% scan with 201 points.
TrEstimate estimate_tr_refined(const Waveform& w, double r, double c0,
                               double oversample = 4.0);

struct PowerSpectrum {
    std::vector<double> freqs;
    std::vector<double> power;
};

/// One-sided power spectrum, zero-padded so the bin spacing is <= max_df.
PowerSpectrum power_spectrum(const Waveform& w, double max_df);

/// Spectrogram CSV: first row = freqs, first column = times.
void write_spectrogram_csv(std::ostream& out, const Spectrogram& sg);

/// Ridge CSV: `f_hz,t_s` (per-mode export carries m in the filename).
void write_ridge_csv(std::ostream& out, const std::vector<RidgePoint>& ridge);

} // namespace ductwarp

#endif
