#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "ductwarp/synth.hpp"
#include "ductwarp/warp.hpp"

using namespace ductwarp;

namespace {

constexpr double kPi = 3.14159265358979323846;

LinearDuct paper_duct() { return LinearDuct(1434.0, 4.359e-5, 400.0); }

Waveform duct_modes_at(const std::vector<int>& modes, double r, double fs = 400.0,
                       double duration = 6.0) {
    SourcePulse pulse(10.0, 100.0);
    return synthesize_duct_waveform(paper_duct(), modes, r, pulse, fs, duration);
}

// Pre-arrival analysis slice used throughout the pipeline tests.
Waveform analysis_slice(const Waveform& w, double t_r, double window = 1.5,
                        double guard = 0.05) {
    return slice(w, t_r - window, t_r - guard);
}

double band_energy_fraction(const PowerSpectrum& ps, double f_lo, double f_hi) {
    double in = 0.0, total = 0.0;
    for (std::size_t i = 0; i < ps.freqs.size(); ++i) {
        total += ps.power[i];
        if (ps.freqs[i] >= f_lo && ps.freqs[i] <= f_hi) in += ps.power[i];
    }
    return in / total;
}

double peak_frequency(const PowerSpectrum& ps) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < ps.power.size(); ++i)
        if (ps.power[i] > ps.power[best]) best = i;
    return ps.freqs[best];
}

} // namespace

TEST_CASE("stft of a pure tone puts the ridge at the tone bin") {
    const double fs = 400.0, f0 = 50.0;
    std::vector<double> data(2000);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::sin(2.0 * kPi * f0 * i / fs);
    Spectrogram sg = stft(Waveform(fs, 0.0, data), 128, 16);
    const std::size_t tone_bin = 16; // 50 Hz / (400/128)
    for (std::size_t k = 20; k + 20 < sg.times.size(); ++k) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < sg.freqs.size(); ++j)
            if (sg.mag[k][j] > sg.mag[k][best]) best = j;
        CHECK(best == tone_bin);
    }
}

TEST_CASE("stft of an impulse confines energy to frames overlapping it") {
    const double fs = 400.0;
    std::vector<double> data(2000, 0.0);
    const int i1 = 1000;
    data[i1] = 1.0;
    Spectrogram sg = stft(Waveform(fs, 0.0, data), 128, 16);
    double far_max = 0.0, near_max = 0.0;
    for (std::size_t k = 0; k < sg.times.size(); ++k) {
        double row_max = *std::max_element(sg.mag[k].begin(), sg.mag[k].end());
        if (std::abs(static_cast<int>(k) * 16 - i1) > 64 + 16)
            far_max = std::max(far_max, row_max);
        else
            near_max = std::max(near_max, row_max);
    }
    CHECK(near_max > 0.0);
    CHECK(far_max <= 1e-12 * near_max);
}

TEST_CASE("stft validation") {
    std::vector<double> data(100, 0.0);
    CHECK_THROWS_AS(stft(Waveform(100.0, 0.0, data), 128, 8), InputError);
    CHECK_THROWS_AS(stft(Waveform(100.0, 0.0, data), 64, 0), InputError);
}

TEST_CASE("warped single modes become tones at the duct comb frequencies") {
    LinearDuct duct = paper_duct();
    const double r = 105000.0;
    const double t_r = r / duct.c0;
    for (int m : {1, 2}) {
        Waveform w = analysis_slice(duct_modes_at({m}, r), t_r);
        Waveform warped = warp_signal(w, WarpPlan(t_r, 4.0, InterpKind::Cubic));
        PowerSpectrum ps = power_spectrum(warped, 0.2);
        double f_m = wkb::warped_mode_frequency(duct, m, r);
        CHECK(std::abs(peak_frequency(ps) - f_m) <= 0.2 + 1e-9);
        CHECK(band_energy_fraction(ps, f_m - 1.0, f_m + 1.0) >= 0.8);
    }
}

TEST_CASE("warp/unwarp round-trip on a generic band-limited signal (small t_r)") {
    const double fs = 400.0, t_r = 2.0;
    const double t_a = 0.5 * t_r, t_b = 0.99 * t_r;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> freq(5.0, 30.0), phase(0.0, 2.0 * kPi);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> data(static_cast<std::size_t>((t_b - t_a) * fs) + 1);
        double f1 = freq(rng), f2 = freq(rng), p1 = phase(rng), p2 = phase(rng);
        for (std::size_t i = 0; i < data.size(); ++i) {
            double t = t_a + i / fs;
            double env = std::exp(-std::pow((t - 0.75 * t_r) / (0.12 * t_r), 2.0));
            data[i] = env * (std::sin(2.0 * kPi * f1 * t + p1) +
                             0.7 * std::sin(2.0 * kPi * f2 * t + p2));
        }
        Waveform w(fs, t_a, data);
        WarpPlan plan(t_r, 4.0, InterpKind::Cubic);
        Waveform warped = warp_signal(w, plan);
        Waveform back = unwarp_signal_onto(warped, plan, fs, w.t0, w.size());
        CHECK(normalized_correlation(w, back) >= 0.99);
    }
}

TEST_CASE("warp/unwarp round-trip on a modal signal (large t_r)") {
    LinearDuct duct = paper_duct();
    const double r = 105000.0;
    const double t_r = r / duct.c0;
    Waveform w = analysis_slice(duct_modes_at({1, 2, 3}, r), t_r);
    WarpPlan plan(t_r, 4.0, InterpKind::Cubic);
    Waveform warped = warp_signal(w, plan);
    Waveform back = unwarp_signal_onto(warped, plan, w.sample_rate, w.t0, w.size());
    CHECK(normalized_correlation(w, back) >= 0.99);
}

TEST_CASE("default unwarp output grid covers the image of the warped support") {
    const double fs = 400.0, t_r = 2.0;
    std::vector<double> data(200);
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = std::sin(2.0 * kPi * 10.0 * (1.0 + i / fs));
    Waveform w(fs, 1.0, data);
    WarpPlan plan(t_r, 4.0, InterpKind::Cubic);
    Waveform warped = warp_signal(w, plan);
    Waveform back = unwarp_signal(warped, plan);
    CHECK(back.sample_rate == doctest::Approx(fs));
    CHECK(back.t0 == doctest::Approx(w.t0).epsilon(1e-6));
    CHECK(std::abs(back.end_time() - w.end_time()) <= 2.0 / fs);
}

TEST_CASE("warping a zero signal yields zero") {
    Waveform w(400.0, 1.0, std::vector<double>(400, 0.0));
    WarpPlan plan(2.0);
    Waveform warped = warp_signal(w, plan);
    for (double v : warped.samples) CHECK(v == 0.0);
}

TEST_CASE("unwarping a pure warped tone reproduces the mode-1 dispersion curve") {
    LinearDuct duct = paper_duct();
    const double r = 105000.0;
    const double t_r = r / duct.c0;
    const double f1 = wkb::warped_mode_frequency(duct, 1, r);
    const double fs_u = 1600.0;
    const double u_lo = 1.0 / std::sqrt(1.2); // image of [t_r - 1.2, t_r - 0.06]
    const double u_hi = 1.0 / std::sqrt(0.06);
    std::vector<double> data(static_cast<std::size_t>((u_hi - u_lo) * fs_u));
    for (std::size_t i = 0; i < data.size(); ++i) {
        double u = u_lo + i / fs_u;
        double edge = std::min((u - u_lo) / 0.3, 1.0) * std::min((u_hi - u) / 0.3, 1.0);
        data[i] = std::max(edge, 0.0) * std::cos(2.0 * kPi * f1 * u);
    }
    WarpPlan plan(t_r, 4.0, InterpKind::Cubic);
    Waveform unwarped = unwarp_signal(Waveform(fs_u, u_lo, data), plan);
    Spectrogram sg = stft(unwarped, 256, 8);
    auto ridge = extract_dispersion(sg, 0.3);
    REQUIRE(ridge.size() > 5);
    int checked = 0;
    for (const auto& pt : ridge) {
        if (pt.f_hz < 20.0 || pt.f_hz > 80.0) continue;
        double t_theory = wkb::modal_group_delay(duct, 1, 2.0 * kPi * pt.f_hz, r);
        CHECK(std::abs(pt.t_s - t_theory) <= 2.0 * sg.time_bin() + 1e-9);
        ++checked;
    }
    CHECK(checked > 3);
}

TEST_CASE("warp input validation") {
    std::vector<double> data(400, 1.0);
    CHECK_THROWS_AS(warp_signal(Waveform(400.0, 1.5, data), WarpPlan(2.0)), InputError);
    CHECK_THROWS_AS(warp_signal(Waveform(400.0, -0.5, data), WarpPlan(2.0)), InputError);
    CHECK_THROWS_AS(WarpPlan(-1.0), InputError);
    CHECK_THROWS_AS(WarpPlan(2.0, 0.5), InputError);
    CHECK_THROWS_AS(ModeBand(1, 2.0, 3.0), InputError);
    CHECK_THROWS_AS(ModeBand(0, 6.0, 3.0), InputError);
}

TEST_CASE("zero-phase bandpass: passband unity, stopband below -60 dB") {
    const double fs = 1000.0;
    const std::size_t n = 4000;
    auto tone = [&](double f) {
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = std::sin(2.0 * kPi * f * i / fs);
        return Waveform(fs, 0.0, d);
    };
    Waveform pass = bandpass_zero_phase(tone(50.0), 45.0, 55.0, 5.0);
    Waveform stop = bandpass_zero_phase(tone(80.0), 45.0, 55.0, 5.0);
    // compare mid-signal energy, away from the convolution edges
    double e_pass = slice(pass, 1.0, 3.0).energy() / slice(tone(50.0), 1.0, 3.0).energy();
    double e_stop = slice(stop, 1.0, 3.0).energy() / slice(tone(80.0), 1.0, 3.0).energy();
    CHECK(e_pass == doctest::Approx(1.0).epsilon(0.01));
    CHECK(e_stop <= 1e-6);
    // zero phase: the filtered tone stays aligned with the input
    CHECK(normalized_correlation(slice(pass, 1.0, 3.0), slice(tone(50.0), 1.0, 3.0)) >
          0.999);
}

TEST_CASE("separate_modes recovers each mode of a 3-mode synthetic") {
    LinearDuct duct = paper_duct();
    const double r = 105000.0;
    const double t_r = r / duct.c0;
    Waveform mixed = analysis_slice(duct_modes_at({1, 2, 3}, r), t_r);
    WarpPlan plan(t_r, 4.0, InterpKind::Cubic);
    auto bands = duct_mode_bands(duct, r, 3);
    auto separated = separate_modes(mixed, plan, bands);
    REQUIRE(separated.size() == 3);
    for (int m = 1; m <= 3; ++m) {
        const auto& sep = separated[m - 1];
        CHECK(sep.m == m);
        REQUIRE(sep.present);
        Waveform direct = analysis_slice(duct_modes_at({m}, r), t_r);
        CHECK(normalized_correlation(direct, sep.waveform) >= 0.95);
        // dispersion curves are strictly increasing t(f)
        for (std::size_t i = 1; i < sep.ridge.size(); ++i) {
            CHECK(sep.ridge[i].f_hz > sep.ridge[i - 1].f_hz);
            CHECK(sep.ridge[i].t_s >= sep.ridge[i - 1].t_s);
        }
    }
}

TEST_CASE("single-mode input reports the other bands absent") {
    LinearDuct duct = paper_duct();
    const double r = 105000.0;
    const double t_r = r / duct.c0;
    Waveform solo = analysis_slice(duct_modes_at({2}, r), t_r);
    auto separated = separate_modes(solo, WarpPlan(t_r), duct_mode_bands(duct, r, 3));
    CHECK(!separated[0].present);
    CHECK(separated[1].present);
    CHECK(!separated[2].present);
}

TEST_CASE("overlapping bands are rejected") {
    Waveform w(400.0, 1.0, std::vector<double>(400, 0.0));
    std::vector<ModeBand> bands{ModeBand(1, 6.0, 3.0), ModeBand(2, 10.0, 3.0)};
    CHECK_THROWS_AS(separate_modes(w, WarpPlan(2.5), bands), InputError);
}

TEST_CASE("extract_dispersion basics") {
    Spectrogram sg;
    sg.times = {0.0, 0.1, 0.2};
    sg.freqs = {10.0, 20.0};
    sg.window_len = 4;
    sg.hop = 1;
    sg.mag = {{0.1, 1.0}, {0.1, 0.2}, {0.9, 0.2}};

    auto ridge = extract_dispersion(sg, 0.5);
    REQUIRE(ridge.size() == 2);
    CHECK(ridge[0].f_hz == 10.0);
    CHECK(ridge[0].t_s == 0.2);
    CHECK(ridge[1].f_hz == 20.0);
    CHECK(ridge[1].t_s == 0.0);

    // scaling invariance
    Spectrogram scaled = sg;
    for (auto& row : scaled.mag)
        for (double& v : row) v *= 5.0;
    auto ridge2 = extract_dispersion(scaled, 0.5);
    REQUIRE(ridge2.size() == ridge.size());
    for (std::size_t i = 0; i < ridge.size(); ++i) {
        CHECK(ridge2[i].f_hz == ridge[i].f_hz);
        CHECK(ridge2[i].t_s == ridge[i].t_s);
    }

    // ties break toward earlier time
    Spectrogram tie = sg;
    tie.mag = {{1.0, 0.0}, {1.0, 0.0}, {0.5, 0.0}};
    auto ridge3 = extract_dispersion(tie, 0.5);
    REQUIRE(ridge3.size() == 1);
    CHECK(ridge3[0].t_s == 0.0);

    // all-zero spectrogram: empty list
    Spectrogram zero = sg;
    zero.mag = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    CHECK(extract_dispersion(zero, 0.5).empty());

    CHECK_THROWS_AS(extract_dispersion(sg, 0.0), InputError);
    CHECK_THROWS_AS(extract_dispersion(sg, 1.0), InputError);
}

TEST_CASE("estimate_tr basics") {
    CHECK(estimate_tr(105000.0, 1434.0) == doctest::Approx(73.2218).epsilon(1e-5));
    CHECK_THROWS_AS(estimate_tr(0.0, 1434.0), InputError);
    CHECK_THROWS_AS(estimate_tr(105000.0, 0.0), InputError);
}

TEST_CASE("t_r refinement recovers a 0.5% perturbation to within 0.05%") {
    LinearDuct duct = paper_duct();
    const double r = 105000.0;
    const double t_r_true = r / duct.c0;
    Waveform w = analysis_slice(duct_modes_at({1, 2, 3}, r), t_r_true);
    // biased c0 puts the nominal r/c0 about 0.5% low, off the scan grid
    TrEstimate est = estimate_tr_refined(w, r, duct.c0 * 1.00473, 4.0);
    CHECK(est.refined);
    CHECK(std::abs(est.t_r - t_r_true) / t_r_true <= 5e-4);
}

TEST_CASE("duct band plan follows the warped comb") {
    LinearDuct duct = paper_duct();
    auto bands = duct_mode_bands(duct, 105000.0, 4);
    REQUIRE(bands.size() == 4);
    double spacing = wkb::warped_mode_spacing(duct, 105000.0);
    for (const auto& b : bands) {
        CHECK(b.halfwidth == doctest::Approx(0.4 * spacing));
        CHECK(b.center ==
              doctest::Approx(wkb::warped_mode_frequency(duct, b.m, 105000.0)));
    }
    CHECK_THROWS_AS(duct_mode_bands(duct, 105000.0, 3, 0.6), InputError);
}

TEST_CASE("power spectrum bin spacing honors the requested resolution") {
    Waveform w(400.0, 0.0, std::vector<double>(100, 1.0));
    PowerSpectrum ps = power_spectrum(w, 0.25);
    CHECK(ps.freqs[1] - ps.freqs[0] <= 0.25 + 1e-12);
}
