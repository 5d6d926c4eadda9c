#ifndef DUCTWARP_MODES_HPP
#define DUCTWARP_MODES_HPP

#include <iosfwd>
#include <optional>
#include <vector>

#include "ductwarp/env.hpp"

namespace ductwarp {

/// Uniform depth grid for the mode solver, nodes at i * dz for i = 0..n.
/// The requested spacing is snapped so the grid lands exactly on depth_max.
class DepthGrid {
public:
    DepthGrid(double depth_max, double dz_request);

    double depth_max() const { return depth_max_; }
    int n_intervals() const { return n_intervals_; }
    int n_nodes() const { return n_intervals_ + 1; }
    double dz() const { return depth_max_ / n_intervals_; }
    double depth(int i) const { return depth_max_ * i / n_intervals_; }

private:
    double depth_max_;
    int n_intervals_;
};

/// One normal mode: eigenvalue k_rm, eigenfunction sampled on the grid
/// (boundary nodes included), modal attenuation and optional group speed.
struct Mode {
    int index = 0; // 1-based, sorted by decreasing k_rm
    double k_rm = 0.0;
    std::vector<double> psi;
    double alpha = 0.0; // nepers/m, >= 0
    std::optional<double> group_speed;
};

/// Eigenpairs of the depth-separated wave equation at one frequency.
/// Eigenfunctions are normalized to (1/rho) * integral(psi^2 dz) = 1
/// (trapezoid rule on the grid) and sign-fixed so the first extremum
/// below the surface is positive.
class ModeSolution {
public:
    ModeSolution(double frequency, DepthGrid grid, double rho, std::vector<Mode> modes);

    double frequency() const { return frequency_; }
    const DepthGrid& grid() const { return grid_; }
    double rho() const { return rho_; }
    const std::vector<Mode>& modes() const { return modes_; }
    std::size_t mode_count() const { return modes_.size(); }
    const Mode& mode(int index) const; // 1-based

    /// Eigenfunction value at arbitrary depth (linear interpolation on the
    /// grid; zero below the truncation depth).
    double psi_at(int index, double z) const;

    /// Sets per-mode attenuation (nepers/m) for sensitivity studies.
    void set_alpha(int index, double alpha);

private:
    double frequency_;
    DepthGrid grid_;
    double rho_;
    std::vector<Mode> modes_;
};

/// Solves psi'' + (omega^2/c(z)^2 - k^2) psi = 0 with pressure-release
/// boundaries psi(0) = psi(H) = 0, discretized as a symmetric tridiagonal
/// eigenproblem in k^2. Eigenvalues come from Sturm-sequence bisection,
/// eigenvectors from inverse iteration. Keeps every mode with real k and
/// phase speed omega/k < max_phase_speed, sorted by decreasing k.
///
/// The grid must resolve the field: dz <= min(c) / (20 * frequency).
ModeSolution solve_modes(const SoundSpeedProfile& profile, double frequency,
                         const DepthGrid& grid, double max_phase_speed,
                         double rho = 1000.0);

/// Group speed of one mode by centered difference of solve_modes at
/// frequency +/- dfreq, tracking the mode by index.
double group_speed(const SoundSpeedProfile& profile, const DepthGrid& grid,
                   double max_phase_speed, double frequency, int mode_index,
                   double dfreq, double rho = 1000.0);

/// Fills Mode::group_speed for every mode of the solution (modes whose
/// index disappears across the stencil are left empty).
void fill_group_speeds(ModeSolution& solution, const SoundSpeedProfile& profile,
                       double max_phase_speed, double dfreq);

/// Effective penetration depth: deepest point where |psi| exceeds 1% of its
/// maximum.
double mode_surface_concentration(const ModeSolution& solution, int mode_index);

/// Mode table CSV: `m,k_rm,group_speed,alpha_m` (group_speed blank if unset).
void write_mode_table(std::ostream& out, const ModeSolution& solution);

/// Eigenfunction matrix CSV: rows = depth, columns = modes.
void write_eigenfunctions(std::ostream& out, const ModeSolution& solution);

} // namespace ductwarp

#endif
