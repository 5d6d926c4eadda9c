#include "ductwarp/wkb.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace ductwarp {
namespace wkb {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kExtensionCap = 1.0e5; // m beyond the deepest sample

void require_mode(int m) {
    if (m < 1) throw InputError("mode index must be >= 1");
}

void require_omega(double omega) {
    if (!(omega > 0.0)) throw InputError("angular frequency must be > 0");
}

double reference_time(const LinearDuct& duct, double r) {
    if (!(r > 0.0)) throw InputError("range must be > 0");
    return r / duct.c0;
}

// Adaptive Simpson quadrature. eps is an absolute tolerance on the segment.
double simpson_step(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double eps,
                            int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = f(lm);
    double frm = f(rm);
    double left = simpson_step(a, m, fa, flm, fm);
    double right = simpson_step(m, b, fm, frm, fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_eps) {
    if (b <= a) return 0.0;
    double fa = f(a);
    double fm = f(0.5 * (a + b));
    double fb = f(b);
    double whole = simpson_step(a, b, fa, fm, fb);
    double eps = rel_eps * std::max(std::abs(whole), 1e-30) + 1e-300;
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, eps, 60);
}

// First depth below z=0 where c(z) rises through c_target, on the
// piecewise-linear profile with its constant-gradient deep extension.
double find_turning_depth(const SoundSpeedProfile& profile, double c_target) {
    const auto& s = profile.samples();
    if (s.front().speed_mps >= c_target) return 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s[i + 1].speed_mps >= c_target && s[i + 1].speed_mps > s[i].speed_mps) {
            double w = (c_target - s[i].speed_mps) / (s[i + 1].speed_mps - s[i].speed_mps);
            return s[i].depth_m + w * (s[i + 1].depth_m - s[i].depth_m);
        }
    }
    double g = profile.deep_gradient();
    if (g <= 0.0)
        throw NumericalError("no turning point: profile never reaches " +
                             std::to_string(c_target) + " m/s below the surface");
    double z = s.back().depth_m + (c_target - s.back().speed_mps) / g;
    if (z > s.back().depth_m + kExtensionCap)
        throw NumericalError("turning depth beyond profile extension");
    return z;
}

// Round-trip WKB phase 2 * integral_0^z2 sqrt((omega/c)^2 - k^2) dz.
// Integration runs segment by segment; the turning-point segment uses the
// substitution z = z2 - s^2 to remove the square-root singularity.
double phase_integral(const SoundSpeedProfile& profile, double omega, double k,
                      double rel_eps) {
    const double c_target = omega / k;
    const double z2 = find_turning_depth(profile, c_target);
    if (z2 <= 0.0) return 0.0;

    auto kz = [&](double z) {
        double c = interpolate_speed(profile, std::max(z, 0.0)); // s^2 substitution can
        double rad = (omega / c) * (omega / c) - k * k;          // round z below zero
        return std::sqrt(std::max(rad, 0.0));
    };

    std::vector<double> cuts{0.0};
    for (const auto& p : profile.samples())
        if (p.depth_m > 0.0 && p.depth_m < z2) cuts.push_back(p.depth_m);
    cuts.push_back(z2);

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i], b = cuts[i + 1];
        if (i + 2 == cuts.size()) {
            // Last segment reaches the turning point.
            double smax = std::sqrt(b - a);
            auto g = [&](double sv) { return 2.0 * sv * kz(b - sv * sv); };
            total += adaptive_simpson(g, 0.0, smax, rel_eps);
        } else {
            total += adaptive_simpson(kz, a, b, rel_eps);
        }
    }
    return 2.0 * total;
}

} // namespace

void QuantizationCondition::validate() const {
    if (!(surface_phase_shift > -kTwoPi && surface_phase_shift <= 0.0))
        throw InputError("surface phase shift must lie in (-2*pi, 0]");
    if (!(turning_phase_shift > -kTwoPi && turning_phase_shift <= 0.0))
        throw InputError("turning phase shift must lie in (-2*pi, 0]");
}

double b1(const LinearDuct& duct, int m) {
    require_mode(m);
    return std::pow(3.0 * duct.a * kPi * (m - 0.25) * duct.c0, 2.0 / 3.0);
}

bool is_trapped(const LinearDuct& duct, int m, double omega) {
    require_mode(m);
    require_omega(omega);
    return 1.0 - b1(duct, m) * std::pow(omega, -2.0 / 3.0) > 0.0;
}

double k_exact_form(const LinearDuct& duct, int m, double omega) {
    require_omega(omega);
    double rad = 1.0 - b1(duct, m) * std::pow(omega, -2.0 / 3.0);
    if (rad <= 0.0)
        throw NumericalError("mode " + std::to_string(m) + " is past cutoff at omega = " +
                             std::to_string(omega));
    return omega / duct.c0 * std::sqrt(rad);
}

double k_linearized(const LinearDuct& duct, int m, double omega) {
    require_omega(omega);
    return omega / duct.c0 - 0.5 * b1(duct, m) / duct.c0 * std::cbrt(omega);
}

double turning_depth(const LinearDuct& duct, int m, double omega) {
    require_omega(omega);
    double x = b1(duct, m) * std::pow(omega, -2.0 / 3.0);
    if (x >= 1.0)
        throw NumericalError("mode " + std::to_string(m) + " is past cutoff at omega = " +
                             std::to_string(omega));
    return x / (2.0 * duct.a);
}

double solve_wkb_wavenumber(const SoundSpeedProfile& profile, int m, double omega,
                            const QuantizationCondition& qc) {
    require_mode(m);
    require_omega(omega);
    qc.validate();

    const double target = 2.0 * (m - 1) * kPi - qc.surface_phase_shift - qc.turning_phase_shift;
    const double rel_eps = 1e-11;
    const double c_surface = interpolate_speed(profile, 0.0);

    auto phase = [&](double k) { return phase_integral(profile, omega, k, rel_eps); };

    double k_hi = omega / c_surface * (1.0 - 1e-12);

    // Lower bracket: the smallest k whose turning point is still reachable.
    double k_lo;
    if (profile.deep_gradient() > 0.0) {
        double z_cap = profile.max_depth() + kExtensionCap;
        k_lo = omega / interpolate_speed(profile, z_cap) * (1.0 + 1e-12);
    } else {
        double c_sup = 0.0;
        for (const auto& p : profile.samples()) c_sup = std::max(c_sup, p.speed_mps);
        k_lo = omega / c_sup * (1.0 + 1e-12);
    }
    if (!(k_lo < k_hi))
        throw NumericalError("no turning point: profile is not upward-refracting");

    double phi_lo = phase(k_lo); // throws when the profile never turns
    if (phi_lo < target) {
        if (profile.deep_gradient() > 0.0)
            throw NumericalError("turning depth beyond profile extension for mode " +
                                 std::to_string(m));
        throw NumericalError("mode " + std::to_string(m) +
                             " is not trapped at omega = " + std::to_string(omega));
    }

    while (k_hi - k_lo > 1e-10) {
        double mid = 0.5 * (k_lo + k_hi);
        if (phase(mid) >= target)
            k_lo = mid;
        else
            k_hi = mid;
    }
    return 0.5 * (k_lo + k_hi);
}

double modal_group_delay(const LinearDuct& duct, int m, double omega, double r) {
    double tr = reference_time(duct, r);
    if (!is_trapped(duct, m, omega))
        throw NumericalError("mode " + std::to_string(m) + " is past cutoff");
    return tr - tr * b1(duct, m) / 6.0 * std::pow(omega, -2.0 / 3.0);
}

double stationary_frequency(const LinearDuct& duct, int m, double r, double t) {
    double tr = reference_time(duct, r);
    if (!(t < tr)) throw InputError("time must precede the reference arrival t_r");
    double x = 6.0 * (tr - t) / (tr * b1(duct, m));
    return std::pow(x, -1.5);
}

double stationary_phase_value(const LinearDuct& duct, int m, double r, double t) {
    double tr = reference_time(duct, r);
    if (!(t < tr)) throw InputError("time must precede the reference arrival t_r");
    return std::pow(tr - t, -0.5) * std::pow(tr * b1(duct, m), 1.5) * std::pow(2.0, -0.5) *
           std::pow(3.0, -1.5);
}

double modal_phase(const LinearDuct& duct, int m, double omega, double r, double t) {
    require_omega(omega);
    double tr = reference_time(duct, r);
    return omega * (t - tr) + 0.5 * tr * b1(duct, m) * std::cbrt(omega);
}

double warped_mode_frequency(const LinearDuct& duct, int m, double r) {
    require_mode(m);
    if (!(r > 0.0)) throw InputError("range must be > 0");
    return std::pow(r, 1.5) * std::pow(duct.c0, -0.5) * std::pow(2.0, -1.5) *
           std::pow(3.0, -0.5) * duct.a * (m - 0.25);
}

double warped_mode_spacing(const LinearDuct& duct, double r) {
    if (!(r > 0.0)) throw InputError("range must be > 0");
    return std::pow(r, 1.5) * std::pow(duct.c0, -0.5) * std::pow(2.0, -1.5) *
           std::pow(3.0, -0.5) * duct.a;
}

DuctDispersion::DuctDispersion(const LinearDuct& duct, int max_mode) : duct_(duct) {
    if (max_mode < 1) throw InputError("need at least one mode");
    b1_.reserve(max_mode);
    for (int m = 1; m <= max_mode; ++m) b1_.push_back(wkb::b1(duct, m));
}

double DuctDispersion::b1(int m) const {
    if (m < 1 || m > max_mode()) throw InputError("mode index out of range");
    return b1_[m - 1];
}

} // namespace wkb
} // namespace ductwarp
