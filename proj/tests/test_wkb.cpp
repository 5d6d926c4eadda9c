#include "doctest.h"

#include <cmath>

#include "ductwarp/wkb.hpp"

using namespace ductwarp;

namespace {

constexpr double kPi = 3.14159265358979323846;

LinearDuct paper_duct() { return LinearDuct(1434.0, 4.359e-5, 400.0); }

// Exactly linear profile sampled from the duct; two samples suffice because
// the profile interpolation is piecewise linear.
SoundSpeedProfile linear_profile(const LinearDuct& duct, double depth) {
    return SoundSpeedProfile({{0.0, duct.c0}, {depth, duct.speed_at(depth)}});
}

} // namespace

TEST_CASE("b1 of the paper duct") {
    LinearDuct duct = paper_duct();
    CHECK(wkb::b1(duct, 1) == doctest::Approx(0.580).epsilon(1e-3));
    CHECK(wkb::b1(duct, 2) == doctest::Approx(1.021).epsilon(1e-3));
    // direct formula cross-check
    double direct = std::pow(3.0 * duct.a * kPi * 0.75 * duct.c0, 2.0 / 3.0);
    CHECK(wkb::b1(duct, 1) == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("b1 vanishes in the no-gradient limit and grows with m") {
    LinearDuct weak(1434.0, 1e-12, 400.0);
    CHECK(wkb::b1(weak, 1) < 1e-5);
    LinearDuct duct = paper_duct();
    for (int m = 1; m < 10; ++m) CHECK(wkb::b1(duct, m + 1) > wkb::b1(duct, m));
    CHECK_THROWS_AS(wkb::b1(duct, 0), InputError);
}

TEST_CASE("square-root-form wavenumber at 50 Hz") {
    LinearDuct duct = paper_duct();
    double omega = 2.0 * kPi * 50.0;
    CHECK(wkb::k_exact_form(duct, 1, omega) == doctest::Approx(0.21770).epsilon(1e-4));
}

TEST_CASE("square-root form throws past cutoff") {
    LinearDuct duct = paper_duct();
    CHECK_THROWS_AS(wkb::k_exact_form(duct, 1, 0.05), NumericalError);
    CHECK(wkb::is_trapped(duct, 1, 0.05) == false);
}

TEST_CASE("plane-wave limit as a -> 0") {
    LinearDuct weak(1434.0, 1e-12, 400.0);
    double omega = 2.0 * kPi * 50.0;
    CHECK(wkb::k_exact_form(weak, 1, omega) ==
          doctest::Approx(omega / 1434.0).epsilon(1e-6));
    CHECK(wkb::k_linearized(weak, 1, omega) ==
          doctest::Approx(omega / 1434.0).epsilon(1e-6));
}

TEST_CASE("linearized wavenumber agrees with the square-root form in the duct") {
    LinearDuct duct = paper_duct();
    double omega = 2.0 * kPi * 50.0;
    double k8 = wkb::k_exact_form(duct, 1, omega);
    double k10 = wkb::k_linearized(duct, 1, omega);
    CHECK(k10 == doctest::Approx(0.21770).epsilon(1e-3));
    CHECK(std::abs(k10 - k8) / k8 < 1e-4);
}

TEST_CASE("gap between the two forms grows with mode index") {
    LinearDuct duct = paper_duct();
    double omega = 2.0 * kPi * 100.0;
    double prev_gap = 0.0;
    for (int m = 1; m <= 6; ++m) {
        double gap = std::abs(wkb::k_linearized(duct, m, omega) -
                              wkb::k_exact_form(duct, m, omega));
        CHECK(gap > prev_gap);
        prev_gap = gap;
    }
}

TEST_CASE("turning depths reproduce the 400 m duct boundary story") {
    LinearDuct duct = paper_duct();
    double w50 = 2.0 * kPi * 50.0, w100 = 2.0 * kPi * 100.0;
    CHECK(wkb::turning_depth(duct, 1, w50) == doctest::Approx(144.0).epsilon(1e-3));
    CHECK(wkb::turning_depth(duct, 7, w100) == doctest::Approx(392.5).epsilon(2e-3));
    CHECK(wkb::turning_depth(duct, 7, w100) < 400.0);
    CHECK(wkb::turning_depth(duct, 8, w100) == doctest::Approx(430.3).epsilon(1e-3));
    CHECK(wkb::turning_depth(duct, 8, w100) > 400.0);
}

TEST_CASE("turning depth is consistent with c(eps) = omega/k") {
    LinearDuct duct = paper_duct();
    double omega = 2.0 * kPi * 50.0;
    double eps = wkb::turning_depth(duct, 1, omega);
    double k = wkb::k_exact_form(duct, 1, omega);
    // the expanded metric shifts the turning point by O((a z)^2)
    CHECK(duct.speed_at(eps) * k / omega == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("quantization solver matches the closed form on an exact linear profile") {
    LinearDuct duct = paper_duct();
    SoundSpeedProfile profile = linear_profile(duct, 2000.0);
    double omega = 2.0 * kPi * 50.0;
    double k_solve = wkb::solve_wkb_wavenumber(profile, 1, omega);
    double k_closed = wkb::k_exact_form(duct, 1, omega);
    CHECK(std::abs(k_solve - k_closed) / k_closed < 5e-5);
}

TEST_CASE("expansion error bound holds while the turning depth stays shallow") {
    // modes with turning depth <= 0.8 * 400 m at 100 Hz: m = 1..5
    LinearDuct duct = paper_duct();
    SoundSpeedProfile profile = linear_profile(duct, 2000.0);
    double omega = 2.0 * kPi * 100.0;
    for (int m = 1; m <= 5; ++m) {
        REQUIRE(wkb::turning_depth(duct, m, omega) <= 0.8 * duct.duct_depth);
        double k_solve = wkb::solve_wkb_wavenumber(profile, m, omega);
        double k_closed = wkb::k_exact_form(duct, m, omega);
        CHECK(std::abs(k_solve - k_closed) / k_closed < 2e-4);
    }
}

TEST_CASE("quantization solver fails cleanly without a turning point") {
    SoundSpeedProfile iso({{0.0, 1500.0}, {1000.0, 1500.0}});
    CHECK_THROWS_AS(wkb::solve_wkb_wavenumber(iso, 1, 2.0 * kPi * 50.0), NumericalError);
}

TEST_CASE("quantization condition validation and sensitivity") {
    wkb::QuantizationCondition bad;
    bad.surface_phase_shift = 0.5;
    CHECK_THROWS_AS(bad.validate(), InputError);

    LinearDuct duct = paper_duct();
    SoundSpeedProfile profile = linear_profile(duct, 2000.0);
    double omega = 2.0 * kPi * 50.0;
    wkb::QuantizationCondition deeper; // more negative shift -> larger phase target
    deeper.surface_phase_shift = -1.5 * kPi;
    double k_default = wkb::solve_wkb_wavenumber(profile, 1, omega);
    double k_deeper = wkb::solve_wkb_wavenumber(profile, 1, omega, deeper);
    CHECK(k_deeper < k_default); // extra phase pushes the turning point deeper
}

TEST_CASE("modal group delay at 105 km") {
    LinearDuct duct = paper_duct();
    double omega = 2.0 * kPi * 50.0;
    double r = 105000.0;
    double t_r = r / duct.c0;
    CHECK(t_r == doctest::Approx(73.22).epsilon(1e-4));
    double t = wkb::modal_group_delay(duct, 1, omega, r);
    CHECK(t_r - t == doctest::Approx(0.15320).epsilon(1e-3));
}

TEST_CASE("group delay is strictly increasing in frequency and tends to t_r") {
    LinearDuct duct = paper_duct();
    double r = 105000.0;
    double prev = 0.0;
    for (double f = 10.0; f <= 100.0; f += 5.0) {
        double t = wkb::modal_group_delay(duct, 1, 2.0 * kPi * f, r);
        CHECK(t > prev);
        prev = t;
    }
    double t_inf = wkb::modal_group_delay(duct, 1, 1e9, r);
    CHECK(r / duct.c0 - t_inf > 0.0);
    CHECK(r / duct.c0 - t_inf < 1e-5);
}

TEST_CASE("group delay equals r dk/domega of the linearized form") {
    LinearDuct duct = paper_duct();
    double r = 105000.0;
    for (int m : {1, 3, 5}) {
        for (double f : {20.0, 50.0, 90.0}) {
            double omega = 2.0 * kPi * f;
            double h = 1e-3;
            double dk = (wkb::k_linearized(duct, m, omega + h) -
                         wkb::k_linearized(duct, m, omega - h)) /
                        (2.0 * h);
            double t = wkb::modal_group_delay(duct, m, omega, r);
            CHECK(t == doctest::Approx(r * dk).epsilon(1e-9));
        }
    }
}

TEST_CASE("stationary frequency inverts the group delay") {
    LinearDuct duct = paper_duct();
    double r = 105000.0;
    for (int m : {1, 2, 4, 8}) {
        for (double f : {15.0, 40.0, 75.0}) {
            double omega = 2.0 * kPi * f;
            double t = wkb::modal_group_delay(duct, m, omega, r);
            double back = wkb::stationary_frequency(duct, m, r, t);
            CHECK(std::abs(back - omega) / omega < 1e-10);
        }
    }
    CHECK_THROWS_AS(wkb::stationary_frequency(duct, 1, r, r / duct.c0), InputError);
}

TEST_CASE("instantaneous phase: closed form equals the modal phase at omega_ms") {
    LinearDuct duct = paper_duct();
    double r = 105000.0;
    double t_r = r / duct.c0;
    double t = t_r - 0.15320;
    double direct = wkb::stationary_phase_value(duct, 1, r, t);
    CHECK(direct == doctest::Approx(96.2).epsilon(2e-3));
    double omega_ms = wkb::stationary_frequency(duct, 1, r, t);
    double via_phase = wkb::modal_phase(duct, 1, omega_ms, r, t);
    CHECK(std::abs(direct - via_phase) <= 1e-12 * std::abs(direct));
}

TEST_CASE("instantaneous phase scales linearly with range at a fixed t_r fraction") {
    LinearDuct duct = paper_duct();
    double r = 105000.0;
    double frac = 0.002; // t_r - t = frac * t_r
    double t1 = (1.0 - frac) * (r / duct.c0);
    double t2 = (1.0 - frac) * (2.0 * r / duct.c0);
    double p1 = wkb::stationary_phase_value(duct, 1, r, t1);
    double p2 = wkb::stationary_phase_value(duct, 1, 2.0 * r, t2);
    CHECK(p2 / p1 == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("warped mode frequencies form the 6/14/22 Hz comb at 105 km") {
    LinearDuct duct = paper_duct();
    double r = 105000.0;
    CHECK(wkb::warped_mode_frequency(duct, 1, r) == doctest::Approx(6.0).epsilon(2e-3));
    CHECK(wkb::warped_mode_frequency(duct, 2, r) == doctest::Approx(14.0).epsilon(2e-3));
    double spacing = wkb::warped_mode_spacing(duct, r);
    CHECK(spacing == doctest::Approx(8.0).epsilon(2e-3));
    for (int m = 1; m <= 5; ++m)
        CHECK(wkb::warped_mode_frequency(duct, m + 1, r) -
                  wkb::warped_mode_frequency(duct, m, r) ==
              doctest::Approx(spacing).epsilon(1e-12));
}

TEST_CASE("warped frequency closed forms agree to 1e-12") {
    LinearDuct duct = paper_duct();
    double r = 105000.0;
    double t_r = r / duct.c0;
    for (int m = 1; m <= 10; ++m) {
        double f_direct = wkb::warped_mode_frequency(duct, m, r);
        double f_via_b1 = std::pow(t_r * wkb::b1(duct, m), 1.5) * std::pow(2.0, -0.5) *
                          std::pow(3.0, -1.5) / (2.0 * kPi);
        CHECK(std::abs(f_direct - f_via_b1) <= 1e-12 * f_direct);
    }
}

TEST_CASE("DuctDispersion caches a strictly increasing b1 table") {
    wkb::DuctDispersion table(paper_duct(), 8);
    CHECK(table.max_mode() == 8);
    for (int m = 1; m < 8; ++m) CHECK(table.b1(m + 1) > table.b1(m));
    CHECK_THROWS_AS(table.b1(0), InputError);
    CHECK_THROWS_AS(table.b1(9), InputError);
}
