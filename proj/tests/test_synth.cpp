#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "ductwarp/synth.hpp"
#include "ductwarp/warp.hpp"

using namespace ductwarp;

namespace {

constexpr double kPi = 3.14159265358979323846;

LinearDuct paper_duct() { return LinearDuct(1434.0, 4.359e-5, 400.0); }

SoundSpeedProfile paper_profile() {
    const double c0 = 1434.0, a = 4.359e-5;
    double c400 = c0 * (1.0 + a * 400.0);
    double g = (1473.0 - c400) / (1660.0 - 400.0);
    return SoundSpeedProfile(
        {{0.0, c0}, {400.0, c400}, {1660.0, 1473.0}, {2000.0, 1473.0 + g * 340.0}});
}

// Hand-built modes with an exact node at z = 50 m for mode 1.
ModeSolution fake_solution(double freq, int n_modes, double alpha = 0.0) {
    DepthGrid grid(100.0, 1.0);
    std::vector<Mode> modes;
    for (int m = 1; m <= n_modes; ++m) {
        Mode mode;
        mode.index = m;
        mode.k_rm = 0.25 - 0.05 * m;
        mode.alpha = alpha;
        mode.psi.resize(grid.n_nodes());
        for (int i = 0; i < grid.n_nodes(); ++i)
            mode.psi[i] = std::sin((m + 1) * kPi * grid.depth(i) / 100.0);
        modes.push_back(std::move(mode));
    }
    return ModeSolution(freq, grid, 1000.0, std::move(modes));
}

ModeSolutionProvider provider_of(int n_modes, double alpha = 0.0) {
    return [n_modes, alpha](double f) { return fake_solution(f, n_modes, alpha); };
}

} // namespace

TEST_CASE("source spectrum shapes") {
    SourcePulse flat(10.0, 100.0, PulseShape::FlatBand);
    CHECK(source_spectrum(flat, 9.9) == 0.0);
    CHECK(source_spectrum(flat, 10.0) == 1.0);
    CHECK(source_spectrum(flat, 55.0) == 1.0);
    CHECK(source_spectrum(flat, 100.1) == 0.0);

    SourcePulse taper(10.0, 100.0, PulseShape::RaisedCosineBand);
    CHECK(source_spectrum(taper, 10.0) == doctest::Approx(0.0));
    CHECK(source_spectrum(taper, 14.5) == doctest::Approx(0.5)); // mid-taper (width 9)
    CHECK(source_spectrum(taper, 19.0) == doctest::Approx(1.0));
    CHECK(source_spectrum(taper, 55.0) == 1.0);
    CHECK(source_spectrum(taper, 95.5) == doctest::Approx(0.5));
    CHECK(source_spectrum(taper, 100.0) == doctest::Approx(0.0));

    CHECK_THROWS_AS(SourcePulse(100.0, 10.0), InputError);
    CHECK_THROWS_AS(SourcePulse(0.0, 10.0), InputError);
}

TEST_CASE("waveform_from_spectrum places a single tone with the right amplitude") {
    const int n = 256;
    const double fs = 256.0;
    const int k0 = 32;
    std::vector<std::complex<double>> spectrum(n / 2 + 1, {0.0, 0.0});
    spectrum[k0] = {1.0, 0.0};
    const double t0 = 0.5;
    Waveform w = waveform_from_spectrum(spectrum, fs, t0);
    REQUIRE(w.size() == n);
    const double df = fs / n;
    const double omega = 2.0 * kPi * k0 * df;
    for (std::size_t i = 0; i < w.size(); i += 17) {
        double expected = 2.0 * df * std::cos(omega * w.time(i));
        CHECK(w.samples[i] == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("waveform_from_spectrum satisfies Parseval") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 512;
    const double fs = 200.0;
    std::vector<std::complex<double>> spectrum(n / 2 + 1, {0.0, 0.0});
    for (int k = 1; k < n / 2; ++k) spectrum[k] = {u(rng), u(rng)};
    Waveform w = waveform_from_spectrum(spectrum, fs, 3.0);
    double e_time = 0.0;
    for (double x : w.samples) e_time += x * x;
    e_time /= fs;
    double e_spec = 0.0;
    for (int k = 1; k < n / 2; ++k) e_spec += std::norm(spectrum[k]);
    e_spec *= 2.0 * fs / n;
    CHECK(e_time == doctest::Approx(e_spec).epsilon(1e-9));
}

TEST_CASE("pressure spectrum: cylindrical spreading halves power when range doubles") {
    SourcePulse pulse(10.0, 100.0, PulseShape::FlatBand);
    std::vector<double> grid{50.0};
    auto p1 = synthesize_pressure_spectrum(provider_of(1), Geometry(25.0, 25.0, 10000.0),
                                           pulse, grid);
    auto p2 = synthesize_pressure_spectrum(provider_of(1), Geometry(25.0, 25.0, 20000.0),
                                           pulse, grid);
    CHECK(std::abs(p1[0]) / std::abs(p2[0]) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("pressure spectrum vanishes at an eigenfunction node") {
    SourcePulse pulse(10.0, 100.0, PulseShape::FlatBand);
    std::vector<double> grid{50.0};
    auto peak = synthesize_pressure_spectrum(provider_of(1), Geometry(25.0, 25.0, 10000.0),
                                             pulse, grid);
    auto node = synthesize_pressure_spectrum(provider_of(1), Geometry(25.0, 50.0, 10000.0),
                                             pulse, grid);
    CHECK(std::abs(node[0]) <= 1e-10 * std::abs(peak[0]));
}

TEST_CASE("pressure spectrum is linear in the mode sum") {
    SourcePulse pulse(10.0, 100.0, PulseShape::FlatBand);
    std::vector<double> grid{40.0, 60.0};
    Geometry g(25.0, 30.0, 15000.0);

    auto both = synthesize_pressure_spectrum(provider_of(2), g, pulse, grid);
    auto first = synthesize_pressure_spectrum(provider_of(1), g, pulse, grid);
    auto second = synthesize_pressure_spectrum(
        [](double f) {
            ModeSolution two = fake_solution(f, 2);
            std::vector<Mode> only{two.modes()[1]};
            only[0].index = 1;
            return ModeSolution(f, two.grid(), two.rho(), std::move(only));
        },
        g, pulse, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(std::abs(both[i] - (first[i] + second[i])) <= 1e-12 * std::abs(both[i]));
}

TEST_CASE("modal attenuation scales the field by exp(-alpha r)") {
    SourcePulse pulse(10.0, 100.0, PulseShape::FlatBand);
    std::vector<double> grid{50.0};
    Geometry g(25.0, 25.0, 10000.0);
    auto lossless = synthesize_pressure_spectrum(provider_of(1), g, pulse, grid);
    auto lossy = synthesize_pressure_spectrum(provider_of(1, 1e-3), g, pulse, grid);
    double tl_change = -20.0 * std::log10(std::abs(lossy[0]) / std::abs(lossless[0]));
    double expected = 20.0 * std::log10(std::exp(1.0)) * 1e-3 * g.r;
    CHECK(tl_change == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("duct synthesis is linear in the mode set") {
    LinearDuct duct = paper_duct();
    SourcePulse pulse(10.0, 100.0);
    const double fs = 400.0, dur = 6.0, r = 105000.0;
    Waveform sum = synthesize_duct_waveform(duct, {1, 2, 3}, r, pulse, fs, dur);
    Waveform m1 = synthesize_duct_waveform(duct, {1}, r, pulse, fs, dur);
    Waveform m2 = synthesize_duct_waveform(duct, {2}, r, pulse, fs, dur);
    Waveform m3 = synthesize_duct_waveform(duct, {3}, r, pulse, fs, dur);
    double peak = 0.0;
    for (double v : sum.samples) peak = std::max(peak, std::abs(v));
    for (std::size_t i = 0; i < sum.size(); ++i) {
        double direct = m1.samples[i] + m2.samples[i] + m3.samples[i];
        CHECK(std::abs(sum.samples[i] - direct) <= 1e-9 * peak);
    }
}

TEST_CASE("105 km duct arrival: short, causal, ending near t_r") {
    LinearDuct duct = paper_duct();
    SourcePulse pulse(10.0, 100.0);
    const double fs = 400.0, r = 105000.0;
    const double t_r = r / duct.c0;
    Waveform w = synthesize_duct_waveform(duct, {1, 2, 3, 4, 5, 6}, r, pulse, fs, 6.0);
    CHECK(w.t0 == doctest::Approx(t_r - 3.0).epsilon(1e-9));

    double dur95 = energy_duration(w, 0.95);
    CHECK(dur95 > 0.3);
    CHECK(dur95 < 2.5);

    // no energy after t_r + 2 STFT windows (window = 256 samples = 0.64 s)
    double total = w.energy();
    double tail = slice(w, t_r + 2.0 * 256.0 / fs, w.end_time()).energy();
    CHECK(tail <= 1e-6 * total);
}

TEST_CASE("95%-energy duration grows with range") {
    LinearDuct duct = paper_duct();
    SourcePulse pulse(10.0, 100.0);
    Waveform near = synthesize_duct_waveform(duct, {1, 2, 3, 4, 5, 6}, 105000.0, pulse,
                                             400.0, 6.0);
    Waveform far = synthesize_duct_waveform(duct, {1, 2, 3, 4, 5, 6}, 199000.0, pulse,
                                            400.0, 10.0);
    CHECK(energy_duration(far, 0.95) > energy_duration(near, 0.95));
}

TEST_CASE("single-mode spectrogram ridge tracks the dispersion skeleton") {
    LinearDuct duct = paper_duct();
    SourcePulse pulse(10.0, 100.0);
    const double fs = 400.0, r = 105000.0;
    Waveform w = synthesize_duct_waveform(duct, {2}, r, pulse, fs, 6.0);
    Spectrogram sg = stft(w, 256, 8);
    auto ridge = extract_dispersion(sg, 0.25);
    REQUIRE(ridge.size() > 10);
    const double bin = sg.time_bin();
    for (const auto& pt : ridge) {
        if (pt.f_hz < 15.0 || pt.f_hz > 95.0) continue;
        double t_theory = wkb::modal_group_delay(duct, 2, 2.0 * kPi * pt.f_hz, r);
        CHECK(std::abs(pt.t_s - t_theory) <= bin + 1e-9);
    }
}

TEST_CASE("adiabatic run with identical stations equals the range-independent run") {
    SoundSpeedProfile profile = paper_profile();
    SourcePulse pulse(20.0, 40.0);
    Geometry g(300.0, 372.0, 50000.0);
    SolverConfig cfg;
    cfg.depth_max = 1000.0;

    SynthesisResult ri = synthesize_waveform(profile, g, pulse, 160.0, 4.0, cfg);
    RangeDependentEnv env({{0.0, profile}, {50000.0, profile}});
    SynthesisResult ad =
        synthesize_waveform(env, g, pulse, 160.0, 4.0, cfg, SynthesisMode::Adiabatic);

    CHECK(ad.dropped_modes == 0);
    REQUIRE(ad.waveform.size() == ri.waveform.size());
    double peak = 0.0;
    for (double v : ri.waveform.samples) peak = std::max(peak, std::abs(v));
    for (std::size_t i = 0; i < ri.waveform.size(); ++i)
        CHECK(std::abs(ad.waveform.samples[i] - ri.waveform.samples[i]) <= 1e-10 * peak);
}

TEST_CASE("solver-route synthesis produces a dispersed arrival before t_r") {
    SoundSpeedProfile profile = paper_profile();
    SourcePulse pulse(20.0, 40.0);
    Geometry g(300.0, 372.0, 50000.0);
    SolverConfig cfg;
    cfg.depth_max = 1000.0;
    SynthesisResult res = synthesize_waveform(profile, g, pulse, 160.0, 4.0, cfg);
    const double t_r = g.r / 1434.0;
    double total = res.waveform.energy();
    REQUIRE(total > 0.0);
    // energy concentrated before and around t_r
    double pre = slice(res.waveform, t_r - 2.0, t_r + 0.1).energy();
    CHECK(pre / total > 0.9);
}

TEST_CASE("sample-rate precondition") {
    LinearDuct duct = paper_duct();
    SourcePulse pulse(10.0, 100.0);
    CHECK_THROWS_AS(synthesize_duct_waveform(duct, {1}, 105000.0, pulse, 300.0, 6.0),
                    InputError);
}

TEST_CASE("transmission loss: doubling range adds 10 log10(2) dB for one mode") {
    SoundSpeedProfile iso({{0.0, 1500.0}, {200.0, 1500.0}});
    SolverConfig cfg;
    cfg.depth_max = 200.0;
    cfg.dz = 1.5;
    cfg.max_phase_speed = 2000.0; // keeps only mode 1 at 10 Hz
    TLMap map = transmission_loss_map(iso, 10.0, 50.0, {5000.0, 10000.0}, {60.0}, cfg);
    double delta = map.tl[0][1] - map.tl[0][0];
    CHECK(delta == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-9));
}

TEST_CASE("TL map CSV layout: first row ranges, first column depths") {
    SoundSpeedProfile iso({{0.0, 1500.0}, {200.0, 1500.0}});
    SolverConfig cfg;
    cfg.depth_max = 200.0;
    cfg.dz = 1.5;
    cfg.max_phase_speed = 2500.0;
    TLMap map = transmission_loss_map(iso, 10.0, 50.0, {5000.0, 10000.0}, {30.0, 60.0}, cfg);
    std::ostringstream out;
    write_tl_csv(out, map);
    CHECK(out.str().rfind(",5000,10000\n30,", 0) == 0);
}

TEST_CASE("dispersion skeleton: monotone curves, mode ordering, cutoff exclusion") {
    LinearDuct duct = paper_duct();
    const double r = 105000.0;
    auto skel = dispersion_skeleton(duct, r, {1, 2}, 10.0, 100.0, 46);
    double t_r = r / duct.c0;
    double prev_t = 0.0;
    int count1 = 0;
    for (const auto& p : skel) {
        if (p.m != 1) continue;
        CHECK(p.t_s > prev_t);
        CHECK(p.t_s < t_r);
        prev_t = p.t_s;
        ++count1;
    }
    CHECK(count1 == 46);
    // mode 1 arrives later than mode 2 at equal frequency
    for (int i = 0; i < count1; ++i) {
        const auto& p1 = skel[i];
        const auto& p2 = skel[count1 + i];
        REQUIRE(p1.f_hz == doctest::Approx(p2.f_hz));
        CHECK(p1.t_s > p2.t_s);
    }

    CHECK(dispersion_skeleton(duct, r, {1}, 50.0, 40.0, 10).empty());

    // mode 20 is cut off below ~1.85 Hz
    auto low = dispersion_skeleton(duct, r, {20}, 1.0, 3.0, 21);
    CHECK(low.size() < 21);
    for (const auto& p : low) CHECK(p.f_hz > 1.8);
}

TEST_CASE("dispersion CSV format") {
    std::ostringstream out;
    write_dispersion_csv(out, {{1, 25.0, 73.1}});
    CHECK(out.str() == "m,f_hz,t_s\n1,25,73.1\n");
}

TEST_CASE("waveform slice and correlation helpers") {
    std::vector<double> data(100);
    for (int i = 0; i < 100; ++i) data[i] = std::sin(0.2 * i);
    Waveform w(10.0, 5.0, data);
    Waveform part = slice(w, 6.0, 8.0);
    CHECK(part.t0 == doctest::Approx(6.0));
    CHECK(part.size() == 21);
    CHECK(part.samples.front() == doctest::Approx(w.samples[10]));

    CHECK(normalized_correlation(w, w) == doctest::Approx(1.0));
    CHECK(normalized_correlation(w, part) == doctest::Approx(1.0));
    Waveform flipped = w;
    for (double& v : flipped.samples) v = -v;
    CHECK(normalized_correlation(w, flipped) == doctest::Approx(-1.0));
    Waveform misaligned(10.0, 5.03, data); // 0.3 samples off the grid
    CHECK_THROWS_AS(normalized_correlation(w, misaligned), InputError);
    CHECK_THROWS_AS(slice(w, 200.0, 300.0), InputError);
}

TEST_CASE("energy_duration of a rectangular burst") {
    std::vector<double> data(1000, 0.0);
    for (int i = 400; i < 600; ++i) data[i] = 1.0;
    Waveform w(100.0, 0.0, data);
    CHECK(energy_duration(w, 0.95) == doctest::Approx(1.9).epsilon(0.02));
    CHECK_THROWS_AS(energy_duration(w, 1.5), InputError);
}
