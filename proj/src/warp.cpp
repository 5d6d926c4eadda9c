#include "ductwarp/warp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ductwarp/csv.hpp"
#include "ductwarp/fft.hpp"

namespace ductwarp {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Sample s at fractional index x, zero outside the support.
double sample_at(const std::vector<double>& s, double x, InterpKind kind) {
    const long n = static_cast<long>(s.size());
    auto get = [&](long i) -> double { return (i < 0 || i >= n) ? 0.0 : s[i]; };
    if (x < -2.0 || x > static_cast<double>(n) + 1.0) return 0.0;
    long i = static_cast<long>(std::floor(x));
    double t = x - static_cast<double>(i);
    if (kind == InterpKind::Linear) return (1.0 - t) * get(i) + t * get(i + 1);
    // Keys cubic convolution, a = -1/2.
    double p0 = get(i - 1), p1 = get(i), p2 = get(i + 1), p3 = get(i + 2);
    return 0.5 * (2.0 * p1 + t * (-p0 + p2) + t * t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) +
                  t * t * t * (-p0 + 3.0 * p1 - 3.0 * p2 + p3));
}

// h(u) = t_r - u^-2 and its inverse u = (t_r - t)^-1/2.
double warp_h(double t_r, double u) { return t_r - 1.0 / (u * u); }
double warp_h_inv(double t_r, double t) { return 1.0 / std::sqrt(t_r - t); }

std::vector<double> blackman_lowpass(double cutoff_hz, double fs, int taps) {
    std::vector<double> h(taps);
    const int mid = (taps - 1) / 2;
    const double fc = cutoff_hz / fs;
    for (int i = 0; i < taps; ++i) {
        int k = i - mid;
        double sinc = k == 0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * k) / (kPi * k);
        double w = 0.42 - 0.5 * std::cos(2.0 * kPi * i / (taps - 1)) +
                   0.08 * std::cos(4.0 * kPi * i / (taps - 1));
        h[i] = sinc * w;
    }
    return h;
}

} // namespace

double Spectrogram::time_bin() const {
    if (times.size() < 2) return 0.0;
    return times[1] - times[0];
}

WarpPlan::WarpPlan(double tr, double os, InterpKind kind) : t_r(tr), oversample(os), interp(kind) {
    if (!(t_r > 0.0) || !std::isfinite(t_r)) throw InputError("warp t_r must be finite and > 0");
    if (!(oversample >= 1.0)) throw InputError("warp oversample must be >= 1");
}

ModeBand::ModeBand(int mode, double c, double hw) : m(mode), center(c), halfwidth(hw) {
    if (mode < 1) throw InputError("mode index must be >= 1");
    if (!(center > halfwidth && halfwidth > 0.0))
        throw InputError("mode band needs center > halfwidth > 0");
}

Spectrogram stft(const Waveform& w, int window_len, int hop) {
    const int n = static_cast<int>(w.size());
    if (window_len <= 0 || window_len > n)
        throw InputError("STFT window must be positive and no longer than the signal");
    if (hop < 1) throw InputError("STFT hop must be >= 1");

    std::vector<double> hann(window_len);
    for (int i = 0; i < window_len; ++i)
        hann[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / window_len));

    const int n_frames = (n - 1) / hop + 1;
    Spectrogram sg;
    sg.window_len = window_len;
    sg.hop = hop;
    sg.times.resize(n_frames);
    sg.freqs.resize(window_len / 2 + 1);
    for (std::size_t j = 0; j < sg.freqs.size(); ++j)
        sg.freqs[j] = static_cast<double>(j) * w.sample_rate / window_len;
    sg.mag.assign(n_frames, std::vector<double>(sg.freqs.size(), 0.0));

    RealFftPlan plan(window_len);
    std::vector<double> frame(window_len);
    std::vector<std::complex<double>> spec;
    for (int k = 0; k < n_frames; ++k) {
        const int center = k * hop;
        sg.times[k] = w.time(center);
        for (int i = 0; i < window_len; ++i) {
            int idx = center - window_len / 2 + i;
            double v = (idx >= 0 && idx < n) ? w.samples[idx] : 0.0;
            frame[i] = v * hann[i];
        }
        plan.execute(frame, spec);
        for (std::size_t j = 0; j < spec.size(); ++j) sg.mag[k][j] = std::abs(spec[j]);
    }
    return sg;
}

Waveform warp_signal(const Waveform& w, const WarpPlan& plan) {
    if (w.samples.empty()) throw InputError("cannot warp an empty waveform");
    const double t_end = w.end_time();
    if (!(w.t0 > 0.0) || !(t_end < plan.t_r))
        throw InputError("warp input support must lie in (0, t_r)");

    const double fs_u = plan.oversample * w.sample_rate;
    const double u_lo = warp_h_inv(plan.t_r, w.t0);
    const double u_hi = warp_h_inv(plan.t_r, t_end);
    const std::size_t n_u = static_cast<std::size_t>(std::floor((u_hi - u_lo) * fs_u)) + 1;

    std::vector<double> out(n_u);
    for (std::size_t i = 0; i < n_u; ++i) {
        double u = u_lo + static_cast<double>(i) / fs_u;
        double t = warp_h(plan.t_r, u);
        double x = (t - w.t0) * w.sample_rate;
        double weight = std::sqrt(2.0) * std::pow(u, -1.5); // |dh/du|^(1/2)
        out[i] = weight * sample_at(w.samples, x, plan.interp);
    }
    return Waveform(fs_u, u_lo, std::move(out));
}

Waveform unwarp_signal_onto(const Waveform& w, const WarpPlan& plan, double out_rate,
                            double out_t0, std::size_t out_n) {
    if (w.samples.empty()) throw InputError("cannot unwarp an empty waveform");
    if (!(out_rate > 0.0) || out_n == 0) throw InputError("bad unwarp output grid");
    std::vector<double> out(out_n, 0.0);
    for (std::size_t i = 0; i < out_n; ++i) {
        double t = out_t0 + static_cast<double>(i) / out_rate;
        if (!(t > 0.0) || !(t < plan.t_r)) continue;
        double u = warp_h_inv(plan.t_r, t);
        double x = (u - w.t0) * w.sample_rate;
        // |dh^-1/dt|^(1/2) = (1/2)^(1/2) (t_r - t)^(-3/4)
        double weight = std::sqrt(0.5) * std::pow(plan.t_r - t, -0.75);
        out[i] = weight * sample_at(w.samples, x, plan.interp);
    }
    return Waveform(out_rate, out_t0, std::move(out));
}

Waveform unwarp_signal(const Waveform& w, const WarpPlan& plan) {
    const double u_lo = w.t0;
    const double u_hi = w.end_time();
    const double t_lo = warp_h(plan.t_r, u_lo);
    const double t_hi = warp_h(plan.t_r, u_hi);
    const double out_rate = w.sample_rate / plan.oversample;
    const std::size_t n = static_cast<std::size_t>(std::floor((t_hi - t_lo) * out_rate)) + 1;
    return unwarp_signal_onto(w, plan, out_rate, t_lo, n);
}

Waveform bandpass_zero_phase(const Waveform& w, double f_lo, double f_hi,
                             double transition_hz) {
    if (!(0.0 < f_lo && f_lo < f_hi && f_hi < 0.5 * w.sample_rate))
        throw InputError("bandpass needs 0 < f_lo < f_hi < Nyquist");
    if (!(transition_hz > 0.0)) throw InputError("bandpass transition must be > 0");
    // Blackman window: ~74 dB stopband, transition ~5.5/taps normalized.
    int taps = static_cast<int>(std::ceil(5.5 * w.sample_rate / transition_hz));
    taps |= 1;
    std::vector<double> hi = blackman_lowpass(f_hi, w.sample_rate, taps);
    std::vector<double> lo = blackman_lowpass(f_lo, w.sample_rate, taps);
    for (int i = 0; i < taps; ++i) hi[i] -= lo[i];
    return Waveform(w.sample_rate, w.t0, convolve_same(w.samples, hi));
}

std::vector<RidgePoint> extract_dispersion(const Spectrogram& sg, double threshold_fraction) {
    if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0))
        throw InputError("threshold fraction must lie in (0, 1)");
    double gmax = 0.0;
    for (const auto& row : sg.mag)
        for (double v : row) gmax = std::max(gmax, v);
    std::vector<RidgePoint> ridge;
    if (gmax == 0.0) return ridge;
    const double threshold = threshold_fraction * gmax;
    for (std::size_t jf = 0; jf < sg.freqs.size(); ++jf) {
        double best = -1.0;
        std::size_t best_t = 0;
        for (std::size_t it = 0; it < sg.times.size(); ++it) {
            if (sg.mag[it][jf] > best) { // strict: ties keep the earlier time
                best = sg.mag[it][jf];
                best_t = it;
            }
        }
        if (best >= threshold) ridge.push_back({sg.freqs[jf], sg.times[best_t]});
    }
    return ridge;
}

std::vector<SeparatedMode> separate_modes(const Waveform& w, const WarpPlan& plan,
                                          const std::vector<ModeBand>& bands,
                                          const SeparationParams& params) {
    if (bands.empty()) throw InputError("need at least one mode band");
    std::vector<ModeBand> sorted = bands;
    std::sort(sorted.begin(), sorted.end(),
              [](const ModeBand& a, const ModeBand& b) { return a.center < b.center; });
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        if (sorted[i].center + sorted[i].halfwidth >
            sorted[i + 1].center - sorted[i + 1].halfwidth)
            throw InputError("mode bands overlap");

    Waveform warped = warp_signal(w, plan);

    std::vector<Waveform> filtered;
    std::vector<double> band_energy;
    filtered.reserve(bands.size());
    for (const auto& band : bands) {
        Waveform f = bandpass_zero_phase(warped, band.center - band.halfwidth,
                                         band.center + band.halfwidth,
                                         params.transition_fraction * band.halfwidth);
        band_energy.push_back(f.energy());
        filtered.push_back(std::move(f));
    }
    double e_max = *std::max_element(band_energy.begin(), band_energy.end());
    double e_total = warped.energy();

    std::vector<SeparatedMode> out(bands.size());
    for (std::size_t i = 0; i < bands.size(); ++i) {
        out[i].m = bands[i].m;
        bool present = e_max > 0.0 && band_energy[i] >= 1e-2 * e_max &&
                       band_energy[i] > 1e-12 * e_total;
        out[i].present = present;
        if (!present) continue;
        out[i].waveform =
            unwarp_signal_onto(filtered[i], plan, w.sample_rate, w.t0, w.size());
        Spectrogram sg = stft(out[i].waveform, params.stft_window, params.stft_hop);
        out[i].ridge = extract_dispersion(sg, params.ridge_threshold);
    }
    return out;
}

std::vector<ModeBand> duct_mode_bands(const LinearDuct& duct, double r, int count,
                                      double halfwidth_fraction) {
    if (count < 1) throw InputError("need at least one band");
    if (!(halfwidth_fraction > 0.0 && halfwidth_fraction < 0.5))
        throw InputError("halfwidth fraction must lie in (0, 0.5) to keep bands disjoint");
    double spacing = wkb::warped_mode_spacing(duct, r);
    std::vector<ModeBand> bands;
    bands.reserve(count);
    for (int m = 1; m <= count; ++m)
        bands.emplace_back(m, wkb::warped_mode_frequency(duct, m, r),
                           halfwidth_fraction * spacing);
    return bands;
}

double estimate_tr(double r, double c0) {
    if (!(r > 0.0)) throw InputError("range must be > 0");
    if (!(c0 > 0.0)) throw InputError("surface speed must be > 0");
    return r / c0;
}

TrEstimate estimate_tr_refined(const Waveform& w, double r, double c0, double oversample) {
    const double base = estimate_tr(r, c0);
    const int n_scan = 201;
    const double lo = 0.99 * base, hi = 1.01 * base;
    auto candidate_end = [&](double tr_c) {
        // keep a guard before the singular point; candidates close to the
        // signal tail see a truncated window and score accordingly
        double guard = std::max(2.0 / w.sample_rate, 1e-4 * tr_c);
        return std::min(w.end_time(), tr_c - guard);
    };

    // One FFT length for every candidate so the raw spectral maxima compare.
    std::size_t max_len = 0;
    for (int i = 0; i < n_scan; ++i) {
        double tr_c = lo + (hi - lo) * i / (n_scan - 1);
        double t_end = candidate_end(tr_c);
        if (!(t_end > w.t0)) continue;
        double span = warp_h_inv(tr_c, t_end) - warp_h_inv(tr_c, w.t0);
        max_len = std::max(max_len,
                           static_cast<std::size_t>(span * oversample * w.sample_rate) + 2);
    }
    if (max_len == 0) return {base, false};
    std::size_t n_fft = 2 * max_len;
    n_fft += n_fft % 2;

    int best = -1;
    double best_conc = -1.0;
    for (int i = 0; i < n_scan; ++i) {
        double tr_c = lo + (hi - lo) * i / (n_scan - 1);
        double t_end = candidate_end(tr_c);
        if (!(t_end > w.t0)) continue;
        Waveform seg = slice(w, w.t0, t_end);
        if (!(seg.end_time() < tr_c)) continue;
        Waveform warped = warp_signal(seg, WarpPlan(tr_c, oversample, InterpKind::Cubic));
        std::vector<double> padded(n_fft, 0.0);
        const std::size_t nw = warped.samples.size();
        for (std::size_t k = 0; k < nw; ++k) {
            double hann = 0.5 * (1.0 - std::cos(2.0 * kPi * k / (nw - 1)));
            padded[k] = warped.samples[k] * hann;
        }
        auto spec = real_fft(padded);
        double conc = 0.0;
        for (const auto& c : spec) conc = std::max(conc, std::norm(c));
        if (conc > best_conc) {
            best_conc = conc;
            best = i;
        }
    }
    if (best <= 0 || best >= n_scan - 1) return {base, false};
    return {lo + (hi - lo) * best / (n_scan - 1), true};
}

PowerSpectrum power_spectrum(const Waveform& w, double max_df) {
    if (!(max_df > 0.0)) throw InputError("bin spacing must be > 0");
    std::size_t n_fft = std::max<std::size_t>(
        w.size(), static_cast<std::size_t>(std::ceil(w.sample_rate / max_df)));
    n_fft += n_fft % 2;
    std::vector<double> padded(n_fft, 0.0);
    std::copy(w.samples.begin(), w.samples.end(), padded.begin());
    auto spec = real_fft(padded);
    PowerSpectrum ps;
    ps.freqs.resize(spec.size());
    ps.power.resize(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        ps.freqs[k] = static_cast<double>(k) * w.sample_rate / static_cast<double>(n_fft);
        ps.power[k] = std::norm(spec[k]);
    }
    return ps;
}

void write_spectrogram_csv(std::ostream& out, const Spectrogram& sg) {
    for (double f : sg.freqs) out << ',' << csv_number(f);
    out << '\n';
    for (std::size_t it = 0; it < sg.times.size(); ++it) {
        out << csv_number(sg.times[it]);
        for (double v : sg.mag[it]) out << ',' << csv_number(v);
        out << '\n';
    }
}

void write_ridge_csv(std::ostream& out, const std::vector<RidgePoint>& ridge) {
    out << "f_hz,t_s\n";
    for (const auto& p : ridge) out << csv_number(p.f_hz) << ',' << csv_number(p.t_s) << '\n';
}

} // namespace ductwarp
