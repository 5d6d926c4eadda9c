#include "ductwarp/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "ductwarp/csv.hpp"

namespace ductwarp {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Symmetric tridiagonal matrix with constant off-diagonal: diag[i] plus
// off = 1/dz^2 on both sides, interior nodes only.
struct Tridiag {
    std::vector<double> diag;
    double off = 0.0;
    int n() const { return static_cast<int>(diag.size()); }
};

// Number of eigenvalues strictly below x (Sturm sequence count).
int count_below(const Tridiag& t, double x, double pivmin) {
    int count = 0;
    double q = t.diag[0] - x;
    if (q < 0.0) ++count;
    const double off2 = t.off * t.off;
    for (int i = 1; i < t.n(); ++i) {
        if (q == 0.0) q = -pivmin;
        q = t.diag[i] - x - off2 / q;
        if (q < 0.0) ++count;
    }
    return count;
}

// j-th largest eigenvalue (j is 1-based) inside (lo, hi], by bisection down
// to floating-point exhaustion.
double bisect_eigenvalue(const Tridiag& t, int j, double lo, double hi, double pivmin) {
    const int n = t.n();
    auto count_at_least = [&](double x) { return n - count_below(t, x, pivmin); };
    while (true) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (count_at_least(mid) >= j)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

// Solves (T - lambda I) x = b by LU with partial pivoting (dgttrf/dgtts2
// style), used for inverse iteration. Zero pivots are replaced by pivmin.
struct ShiftedSolver {
    std::vector<double> dl, d, du, du2;
    std::vector<char> swapped;

    ShiftedSolver(const Tridiag& t, double lambda, double pivmin) {
        const int n = t.n();
        d.resize(n);
        dl.assign(std::max(0, n - 1), t.off);
        du.assign(std::max(0, n - 1), t.off);
        du2.assign(std::max(0, n - 2), 0.0);
        swapped.assign(std::max(0, n - 1), 0);
        for (int i = 0; i < n; ++i) d[i] = t.diag[i] - lambda;
        for (int i = 0; i < n - 1; ++i) {
            if (std::abs(d[i]) >= std::abs(dl[i])) {
                if (d[i] == 0.0) d[i] = pivmin;
                double fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
                if (i < n - 2) du2[i] = 0.0;
            } else {
                double fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                double temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if (i < n - 2) {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = 1;
            }
        }
        if (n > 0 && d[n - 1] == 0.0) d[n - 1] = pivmin;
    }

    void solve(std::vector<double>& b) const {
        const int n = static_cast<int>(d.size());
        for (int i = 0; i < n - 1; ++i) {
            if (!swapped[i]) {
                b[i + 1] -= dl[i] * b[i];
            } else {
                double temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - dl[i] * b[i];
            }
        }
        b[n - 1] /= d[n - 1];
        if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for (int i = n - 3; i >= 0; --i)
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
};

std::vector<double> inverse_iteration(const Tridiag& t, double lambda, double pivmin) {
    ShiftedSolver lu(t, lambda, pivmin);
    std::vector<double> v(t.n(), 1.0);
    for (int pass = 0; pass < 3; ++pass) {
        lu.solve(v);
        double vmax = 0.0;
        for (double x : v) vmax = std::max(vmax, std::abs(x));
        if (vmax == 0.0) break;
        for (double& x : v) x /= vmax;
    }
    return v;
}

// Flips the sign so the first interior extremum is positive.
void fix_sign(std::vector<double>& psi) {
    double amax = 0.0;
    for (double x : psi) amax = std::max(amax, std::abs(x));
    if (amax == 0.0) return;
    double pivot = 0.0;
    for (std::size_t i = 1; i + 1 < psi.size(); ++i) {
        double dprev = psi[i] - psi[i - 1];
        double dnext = psi[i + 1] - psi[i];
        if (dprev * dnext <= 0.0 && std::abs(psi[i]) > 1e-8 * amax) {
            pivot = psi[i];
            break;
        }
    }
    if (pivot == 0.0) {
        for (double x : psi)
            if (std::abs(x) == amax) {
                pivot = x;
                break;
            }
    }
    if (pivot < 0.0)
        for (double& x : psi) x = -x;
}

} // namespace

DepthGrid::DepthGrid(double depth_max, double dz_request) : depth_max_(depth_max) {
    if (!(depth_max > 0.0)) throw InputError("grid depth must be > 0");
    if (!(dz_request > 0.0)) throw InputError("grid spacing must be > 0");
    if (depth_max / dz_request < 100.0)
        throw InputError("grid too coarse: depth_max/dz must be >= 100");
    n_intervals_ = static_cast<int>(std::ceil(depth_max / dz_request - 1e-9));
}

ModeSolution::ModeSolution(double frequency, DepthGrid grid, double rho,
                           std::vector<Mode> modes)
    : frequency_(frequency), grid_(grid), rho_(rho), modes_(std::move(modes)) {
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        if (i > 0 && !(modes_[i].k_rm < modes_[i - 1].k_rm))
            throw NumericalError("mode wavenumbers are not strictly decreasing");
        if (modes_[i].alpha < 0.0) throw InputError("modal attenuation must be >= 0");
    }
}

const Mode& ModeSolution::mode(int index) const {
    if (index < 1 || index > static_cast<int>(modes_.size()))
        throw InputError("mode index out of range");
    return modes_[index - 1];
}

double ModeSolution::psi_at(int index, double z) const {
    const Mode& m = mode(index);
    if (z < 0.0 || z > grid_.depth_max()) return 0.0;
    double x = z / grid_.dz();
    int i = std::min(static_cast<int>(x), grid_.n_intervals() - 1);
    double w = x - i;
    return (1.0 - w) * m.psi[i] + w * m.psi[i + 1];
}

void ModeSolution::set_alpha(int index, double alpha) {
    if (alpha < 0.0) throw InputError("modal attenuation must be >= 0");
    if (index < 1 || index > static_cast<int>(modes_.size()))
        throw InputError("mode index out of range");
    modes_[index - 1].alpha = alpha;
}

ModeSolution solve_modes(const SoundSpeedProfile& profile, double frequency,
                         const DepthGrid& grid, double max_phase_speed, double rho) {
    if (!(frequency > 0.0)) throw InputError("frequency must be > 0");
    if (!(max_phase_speed > 0.0)) throw InputError("max phase speed must be > 0");
    if (!(rho > 0.0)) throw InputError("density must be > 0");

    const double cmin = profile.min_speed();
    if (grid.dz() > cmin / (20.0 * frequency))
        throw InputError("grid too coarse: need dz <= c_min/(20 f) = " +
                         std::to_string(cmin / (20.0 * frequency)) + " m, have dz = " +
                         std::to_string(grid.dz()) + " m");

    const double omega = 2.0 * kPi * frequency;
    const double dz = grid.dz();
    const double inv_dz2 = 1.0 / (dz * dz);
    const int n_int = grid.n_intervals() - 1; // interior nodes

    Tridiag t;
    t.off = inv_dz2;
    t.diag.resize(n_int);
    double diag_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_int; ++i) {
        double c = interpolate_speed(profile, grid.depth(i + 1));
        t.diag[i] = -2.0 * inv_dz2 + (omega * omega) / (c * c);
        diag_max = std::max(diag_max, t.diag[i]);
    }

    const double lambda_lo = (omega / max_phase_speed) * (omega / max_phase_speed);
    const double lambda_hi = diag_max + 2.0 * inv_dz2 + 1.0;
    const double pivmin =
        std::numeric_limits<double>::epsilon() * (std::abs(diag_max) + 2.0 * inv_dz2);

    int n_modes = n_int - count_below(t, lambda_lo, pivmin);
    if (n_modes <= 0)
        throw NumericalError("no propagating modes below phase speed " +
                             std::to_string(max_phase_speed) + " m/s at " +
                             std::to_string(frequency) + " Hz");

    std::vector<Mode> modes;
    modes.reserve(n_modes);
    std::vector<double> lambdas(n_modes);
    for (int j = 1; j <= n_modes; ++j)
        lambdas[j - 1] = bisect_eigenvalue(t, j, lambda_lo, lambda_hi, pivmin);

    for (int j = 0; j < n_modes; ++j) {
        std::vector<double> v = inverse_iteration(t, lambdas[j], pivmin);

        // Near-degenerate pairs can make inverse iteration converge onto the
        // same vector; re-orthogonalize against the previous mode if needed.
        if (j > 0 && std::abs(lambdas[j - 1] - lambdas[j]) <
                         1e-8 * std::max(std::abs(lambdas[j]), 1.0)) {
            const std::vector<double>& prev = modes.back().psi;
            double dot = 0.0, nrm = 0.0;
            for (int i = 0; i < n_int; ++i) {
                dot += v[i] * prev[i + 1];
                nrm += prev[i + 1] * prev[i + 1];
            }
            for (int i = 0; i < n_int; ++i) v[i] -= (dot / nrm) * prev[i + 1];
        }

        Mode m;
        m.index = j + 1;
        m.k_rm = std::sqrt(lambdas[j]);
        m.psi.assign(grid.n_nodes(), 0.0);
        std::copy(v.begin(), v.end(), m.psi.begin() + 1);

        // Normalize (1/rho) * integral(psi^2 dz) = 1; the boundary nodes are
        // zero, so the trapezoid reduces to the interior sum.
        double sum2 = 0.0;
        for (double x : v) sum2 += x * x;
        double scale = std::sqrt(rho / (dz * sum2));
        for (double& x : m.psi) x *= scale;
        fix_sign(m.psi);
        modes.push_back(std::move(m));
    }

    return ModeSolution(frequency, grid, rho, std::move(modes));
}

double group_speed(const SoundSpeedProfile& profile, const DepthGrid& grid,
                   double max_phase_speed, double frequency, int mode_index, double dfreq,
                   double rho) {
    if (!(dfreq > 0.0)) throw InputError("group-speed stencil needs dfreq > 0");
    if (!(frequency - dfreq > 0.0)) throw InputError("stencil frequency must stay positive");
    if (mode_index < 1) throw InputError("mode index must be >= 1");

    ModeSolution lo = solve_modes(profile, frequency - dfreq, grid, max_phase_speed, rho);
    ModeSolution hi = solve_modes(profile, frequency + dfreq, grid, max_phase_speed, rho);
    if (mode_index > static_cast<int>(lo.mode_count()) ||
        mode_index > static_cast<int>(hi.mode_count()))
        throw NumericalError("mode " + std::to_string(mode_index) +
                             " not present across the group-speed stencil");
    double dk = hi.mode(mode_index).k_rm - lo.mode(mode_index).k_rm;
    if (dk <= 0.0)
        throw NumericalError("mode ordering failed across the group-speed stencil");
    return 2.0 * kPi * (2.0 * dfreq) / dk;
}

void fill_group_speeds(ModeSolution& solution, const SoundSpeedProfile& profile,
                       double max_phase_speed, double dfreq) {
    std::vector<Mode> updated = solution.modes();
    for (auto& m : updated) {
        try {
            m.group_speed = group_speed(profile, solution.grid(), max_phase_speed,
                                        solution.frequency(), m.index, dfreq, solution.rho());
        } catch (const NumericalError&) {
            m.group_speed.reset();
        }
    }
    solution = ModeSolution(solution.frequency(), solution.grid(), solution.rho(),
                            std::move(updated));
}

double mode_surface_concentration(const ModeSolution& solution, int mode_index) {
    const Mode& m = solution.mode(mode_index);
    double amax = 0.0;
    for (double x : m.psi) amax = std::max(amax, std::abs(x));
    const double threshold = 0.01 * amax;
    for (int i = static_cast<int>(m.psi.size()) - 1; i >= 0; --i)
        if (std::abs(m.psi[i]) > threshold) return solution.grid().depth(i);
    return 0.0;
}

void write_mode_table(std::ostream& out, const ModeSolution& solution) {
    out << "m,k_rm,group_speed,alpha_m\n";
    for (const auto& m : solution.modes()) {
        out << m.index << ',' << csv_number(m.k_rm) << ',';
        if (m.group_speed) out << csv_number(*m.group_speed);
        out << ',' << csv_number(m.alpha) << '\n';
    }
}

void write_eigenfunctions(std::ostream& out, const ModeSolution& solution) {
    out << "z_m";
    for (const auto& m : solution.modes()) out << ",psi_" << m.index;
    out << '\n';
    for (int i = 0; i < solution.grid().n_nodes(); ++i) {
        out << csv_number(solution.grid().depth(i));
        for (const auto& m : solution.modes()) out << ',' << csv_number(m.psi[i]);
        out << '\n';
    }
}

} // namespace ductwarp
