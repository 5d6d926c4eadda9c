#ifndef DUCTWARP_WKB_HPP
#define DUCTWARP_WKB_HPP

#include <vector>

#include "ductwarp/env.hpp"

namespace ductwarp {
namespace wkb {

/// Phase shifts entering the WKB quantization condition. Defaults are the
/// ideal pressure-release surface (-pi) and the smooth lower turning
/// point (-pi/2). Both must lie in (-2*pi, 0].
struct QuantizationCondition {
    double surface_phase_shift = -3.141592653589793;
    double turning_phase_shift = -1.5707963267948966;

    void validate() const;
};

/// Dispersion constant b_1m = [3 a pi (m - 1/4) c0]^(2/3) of the linear duct,
/// in (rad/s)^(2/3). Strictly increasing in m.
double b1(const LinearDuct& duct, int m);

/// Whether mode m is trapped by the duct at angular frequency omega
/// (the square-root form below has a positive radicand).
bool is_trapped(const LinearDuct& duct, int m, double omega);

/// Horizontal wavenumber in square-root form,
/// k_m = (omega/c0) sqrt(1 - b_1m omega^(-2/3)). Throws past cutoff.
double k_exact_form(const LinearDuct& duct, int m, double omega);

/// Linearized horizontal wavenumber,
/// k_m = omega/c0 - (b_1m / (2 c0)) omega^(1/3).
/// Defined for all omega > 0; use is_trapped() for validity.
double k_linearized(const LinearDuct& duct, int m, double omega);

/// Depth of the lower turning point, eps = b_1m omega^(-2/3) / (2a).
double turning_depth(const LinearDuct& duct, int m, double omega);

/// Numerically solves the quantization condition
///   phi(k, omega) + dphi_dn + dphi_up = 2 (m-1) pi,
/// where phi = 2 * integral of sqrt((omega/c(z))^2 - k^2) from the surface to
/// the turning depth, on an arbitrary upward-refracting profile. Adaptive
/// quadrature plus bisection on k; this is the brute-force reference for the
/// closed forms above.
double solve_wkb_wavenumber(const SoundSpeedProfile& profile, int m, double omega,
                            const QuantizationCondition& qc = {});

/// Group delay of mode m at range r: t(omega) = t_r - (t_r b_1m / 6) omega^(-2/3),
/// with t_r = r / c0.
double modal_group_delay(const LinearDuct& duct, int m, double omega, double r);

/// Stationary angular frequency at time t < t_r:
/// omega_ms = (6 (t_r - t) / (t_r b_1m))^(-3/2). Inverse of modal_group_delay.
double stationary_frequency(const LinearDuct& duct, int m, double r, double t);

/// Instantaneous modal phase, direct form:
/// phi = (t_r - t)^(-1/2) (t_r b_1m)^(3/2) 2^(-1/2) 3^(-3/2).
double stationary_phase_value(const LinearDuct& duct, int m, double r, double t);

/// Modal phase phi_m(omega, t) = omega (t - t_r) + (1/2) t_r b_1m omega^(1/3).
/// Evaluating this at stationary_frequency() must reproduce
/// stationary_phase_value() exactly; that identity is a correctness gate.
double modal_phase(const LinearDuct& duct, int m, double omega, double r, double t);

/// Frequency of mode m after the warping transform, in Hz:
/// f_m = r^(3/2) c0^(-1/2) 2^(-3/2) 3^(-1/2) a (m - 1/4).
double warped_mode_frequency(const LinearDuct& duct, int m, double r);

/// Spacing f_{m+1} - f_m of the warped mode comb (constant in m).
double warped_mode_spacing(const LinearDuct& duct, double r);

/// Precomputed b_1m table for a duct; convenience for band planning and
/// skeleton export.
class DuctDispersion {
public:
    DuctDispersion(const LinearDuct& duct, int max_mode);

    const LinearDuct& duct() const { return duct_; }
    int max_mode() const { return static_cast<int>(b1_.size()); }
    double b1(int m) const;

private:
    LinearDuct duct_;
    std::vector<double> b1_;
};

} // namespace wkb
} // namespace ductwarp

#endif
