#include "ductwarp/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <thread>

#include "ductwarp/csv.hpp"
#include "ductwarp/fft.hpp"

namespace ductwarp {

namespace {

constexpr double kPi = 3.14159265358979323846;

int thread_budget() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("DUCTWARP_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) hw = std::min(hw, v);
    }
    return hw;
}

// Runs fn(0..n-1) across worker threads; results must go to disjoint slots
// so the output is identical to the serial order.
void parallel_for(int n, const std::function<void(int)>& fn) {
    int nt = std::min(thread_budget(), n);
    if (nt <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            int i = next.fetch_add(1);
            if (i >= n) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

struct CompactMode {
    double k;
    double psi_zs;
    double psi_zr;
    double alpha_r; // alpha integrated over range (nepers)
    double phase;   // k integrated over range (radians)
};

std::complex<double> pressure_value(const std::vector<CompactMode>& modes, double r,
                                    double rho, double s_omega) {
    if (s_omega == 0.0 || modes.empty()) return {0.0, 0.0};
    std::complex<double> sum{0.0, 0.0};
    for (const auto& m : modes) {
        double amp = m.psi_zs * m.psi_zr * std::exp(-m.alpha_r) / std::sqrt(m.k);
        sum += amp * std::complex<double>(std::cos(m.phase), std::sin(m.phase));
    }
    const double pref = 1.0 / (rho * std::sqrt(8.0 * kPi * r));
    const std::complex<double> rot{std::cos(kPi / 4.0), std::sin(kPi / 4.0)};
    return s_omega * pref * rot * sum;
}

// DFT bin indices covered by the source band.
std::pair<int, int> band_bins(const SourcePulse& pulse, double df, int k_max) {
    int lo = static_cast<int>(std::ceil(pulse.f_lo / df - 1e-9));
    int hi = static_cast<int>(std::floor(pulse.f_hi / df + 1e-9));
    return {std::max(lo, 1), std::min(hi, k_max - 1)};
}

void require_sample_rate(double sample_rate, const SourcePulse& pulse) {
    if (!(sample_rate >= 4.0 * pulse.f_hi))
        throw InputError("sample rate must be >= 4*f_hi to avoid aliasing");
}

int even_sample_count(double sample_rate, double duration) {
    if (!(duration > 0.0)) throw InputError("duration must be > 0");
    int n = static_cast<int>(std::llround(duration * sample_rate));
    if (n < 8) throw InputError("duration too short for the sample rate");
    return n + (n % 2);
}

} // namespace

Waveform slice(const Waveform& w, double t_a, double t_b) {
    if (!(t_b > t_a)) throw InputError("slice needs t_b > t_a");
    double fs = w.sample_rate;
    long i0 = static_cast<long>(std::ceil((t_a - w.t0) * fs - 1e-9));
    long i1 = static_cast<long>(std::floor((t_b - w.t0) * fs + 1e-9));
    i0 = std::max<long>(i0, 0);
    i1 = std::min<long>(i1, static_cast<long>(w.size()) - 1);
    if (i0 > i1) throw InputError("slice window does not overlap the waveform");
    std::vector<double> data(w.samples.begin() + i0, w.samples.begin() + i1 + 1);
    return Waveform(fs, w.time(static_cast<std::size_t>(i0)), std::move(data));
}

double normalized_correlation(const Waveform& a, const Waveform& b) {
    if (std::abs(a.sample_rate - b.sample_rate) > 1e-9 * a.sample_rate)
        throw InputError("correlation needs matching sample rates");
    double fs = a.sample_rate;
    double shift = (b.t0 - a.t0) * fs;
    long offset = std::lround(shift);
    if (std::abs(shift - offset) > 0.01)
        throw InputError("correlation needs time-aligned grids");
    // b[i] aligns with a[i + offset].
    long lo = std::max<long>(0, -offset);
    long hi = std::min<long>(static_cast<long>(b.size()),
                             static_cast<long>(a.size()) - offset);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (long i = lo; i < hi; ++i) {
        double av = a.samples[static_cast<std::size_t>(i + offset)];
        double bv = b.samples[static_cast<std::size_t>(i)];
        sab += av * bv;
        saa += av * av;
        sbb += bv * bv;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

double energy_duration(const Waveform& w, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("fraction must be in (0,1)");
    double total = 0.0;
    for (double x : w.samples) total += x * x;
    if (total == 0.0) return 0.0;
    double q_lo = (1.0 - fraction) / 2.0 * total;
    double q_hi = (1.0 + fraction) / 2.0 * total;
    double cum = 0.0;
    double t_lo = w.t0, t_hi = w.end_time();
    bool lo_found = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        cum += w.samples[i] * w.samples[i];
        if (!lo_found && cum >= q_lo) {
            t_lo = w.time(i);
            lo_found = true;
        }
        if (cum >= q_hi) {
            t_hi = w.time(i);
            break;
        }
    }
    return t_hi - t_lo;
}

SourcePulse::SourcePulse(double lo, double hi, PulseShape s) : f_lo(lo), f_hi(hi), shape(s) {
    if (!(0.0 < f_lo && f_lo < f_hi)) throw InputError("pulse band needs 0 < f_lo < f_hi");
}

double source_spectrum(const SourcePulse& pulse, double f) {
    if (f < pulse.f_lo || f > pulse.f_hi) return 0.0;
    if (pulse.shape == PulseShape::FlatBand) return 1.0;
    double w = 0.1 * (pulse.f_hi - pulse.f_lo);
    if (f < pulse.f_lo + w) return 0.5 * (1.0 - std::cos(kPi * (f - pulse.f_lo) / w));
    if (f > pulse.f_hi - w) return 0.5 * (1.0 - std::cos(kPi * (pulse.f_hi - f) / w));
    return 1.0;
}

Geometry::Geometry(double zs, double zr, double range) : z_s(zs), z_r(zr), r(range) {
    if (!(z_s > 0.0 && z_r > 0.0 && r > 0.0))
        throw InputError("geometry needs positive depths and range");
}

DepthGrid make_solver_grid(const SoundSpeedProfile& profile, const SolverConfig& cfg,
                           double f_hi) {
    double dz = cfg.dz > 0.0 ? cfg.dz : profile.min_speed() / (40.0 * f_hi);
    return DepthGrid(cfg.depth_max, dz);
}

double resolve_max_phase_speed(const SoundSpeedProfile& profile, const SolverConfig& cfg) {
    if (cfg.max_phase_speed > 0.0) return cfg.max_phase_speed;
    return interpolate_speed(profile, cfg.depth_max);
}

std::vector<std::complex<double>> synthesize_pressure_spectrum(
    const ModeSolutionProvider& provider, const Geometry& geometry, const SourcePulse& pulse,
    const std::vector<double>& freq_grid) {
    if (freq_grid.empty()) throw InputError("empty frequency grid");
    std::vector<std::complex<double>> out(freq_grid.size(), {0.0, 0.0});
    std::atomic<int> populated{0};
    parallel_for(static_cast<int>(freq_grid.size()), [&](int i) {
        double f = freq_grid[i];
        double s = source_spectrum(pulse, f);
        if (s == 0.0) return;
        ModeSolution sol = [&]() -> ModeSolution {
            try {
                return provider(f);
            } catch (const NumericalError&) {
                return ModeSolution(f, DepthGrid(100.0, 1.0), 1000.0, {});
            }
        }();
        if (sol.mode_count() == 0) return;
        std::vector<CompactMode> compact;
        compact.reserve(sol.mode_count());
        for (const auto& m : sol.modes())
            compact.push_back({m.k_rm, sol.psi_at(m.index, geometry.z_s),
                               sol.psi_at(m.index, geometry.z_r), m.alpha * geometry.r,
                               m.k_rm * geometry.r});
        out[i] = pressure_value(compact, geometry.r, sol.rho(), s);
        populated.fetch_add(1);
    });
    if (populated.load() == 0)
        throw NumericalError("no propagating modes anywhere in the source band");
    return out;
}

Waveform waveform_from_spectrum(const std::vector<std::complex<double>>& spectrum,
                                double sample_rate, double t0) {
    const int n = 2 * (static_cast<int>(spectrum.size()) - 1);
    if (n < 2) throw InputError("spectrum too short");
    const double df = sample_rate / n;
    std::vector<std::complex<double>> shifted(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        double w = 2.0 * kPi * df * static_cast<double>(k);
        std::complex<double> delay{std::cos(w * t0), -std::sin(w * t0)};
        shifted[k] = std::conj(spectrum[k] * delay);
    }
    std::vector<double> x = real_ifft(std::move(shifted), n);
    for (double& v : x) v *= df;
    for (double v : x)
        if (!std::isfinite(v)) throw NumericalError("non-finite sample in synthesis output");
    return Waveform(sample_rate, t0, std::move(x));
}

namespace {

SynthesisResult synthesize_stations(const std::vector<SoundSpeedProfile>& profiles,
                                    const std::vector<double>& station_ranges,
                                    const Geometry& geometry, const SourcePulse& pulse,
                                    double sample_rate, double duration,
                                    const SolverConfig& cfg) {
    require_sample_rate(sample_rate, pulse);
    const int n = even_sample_count(sample_rate, duration);
    const double df = sample_rate / n;
    const int k_max = n / 2;
    auto [k_lo, k_hi] = band_bins(pulse, df, k_max);
    if (k_lo > k_hi) throw InputError("source band contains no DFT bins");

    const SoundSpeedProfile& receiver_profile = profiles.back();
    const double t_r = geometry.r / interpolate_speed(receiver_profile, 0.0);
    const double t0 = t_r - 0.5 * n / sample_rate;

    const int n_stations = static_cast<int>(profiles.size());
    std::vector<DepthGrid> grids;
    std::vector<double> maxps;
    grids.reserve(n_stations);
    for (int s = 0; s < n_stations; ++s) {
        grids.push_back(make_solver_grid(profiles[s], cfg, pulse.f_hi));
        maxps.push_back(resolve_max_phase_speed(profiles[s], cfg));
    }

    std::vector<std::complex<double>> spectrum(k_max + 1, {0.0, 0.0});
    std::atomic<int> populated{0};
    std::atomic<int> dropped_max{0};

    parallel_for(k_hi - k_lo + 1, [&](int idx) {
        const int k = k_lo + idx;
        const double f = k * df;
        const double s = source_spectrum(pulse, f);
        if (s == 0.0) return;

        std::vector<ModeSolution> sols;
        sols.reserve(n_stations);
        for (int st = 0; st < n_stations; ++st) {
            try {
                sols.push_back(solve_modes(profiles[st], f, grids[st], maxps[st], cfg.rho));
            } catch (const NumericalError&) {
                return; // no modes at this frequency anywhere on the track
            }
        }
        std::size_t m_common = sols.front().mode_count();
        for (const auto& sol : sols) m_common = std::min(m_common, sol.mode_count());
        if (m_common == 0) return;
        int dropped = static_cast<int>(sols.front().mode_count() - m_common);
        int prev = dropped_max.load();
        while (dropped > prev && !dropped_max.compare_exchange_weak(prev, dropped)) {
        }

        const ModeSolution& src = sols.front();
        const ModeSolution& rcv = sols.back();
        std::vector<CompactMode> compact;
        compact.reserve(m_common);
        for (std::size_t m = 1; m <= m_common; ++m) {
            double phase = 0.0;
            double alpha_r = 0.0;
            if (n_stations == 1) {
                phase = src.mode(static_cast<int>(m)).k_rm * geometry.r;
                alpha_r = src.mode(static_cast<int>(m)).alpha * geometry.r;
            } else {
                for (int st = 0; st + 1 < n_stations; ++st) {
                    double dr = station_ranges[st + 1] - station_ranges[st];
                    int mi = static_cast<int>(m);
                    phase += 0.5 * (sols[st].mode(mi).k_rm + sols[st + 1].mode(mi).k_rm) * dr;
                    alpha_r += 0.5 * (sols[st].mode(mi).alpha + sols[st + 1].mode(mi).alpha) * dr;
                }
            }
            compact.push_back({rcv.mode(static_cast<int>(m)).k_rm,
                               src.psi_at(static_cast<int>(m), geometry.z_s),
                               rcv.psi_at(static_cast<int>(m), geometry.z_r), alpha_r, phase});
        }
        spectrum[k] = pressure_value(compact, geometry.r, cfg.rho, s);
        populated.fetch_add(1);
    });

    if (populated.load() == 0)
        throw NumericalError("no propagating modes anywhere in the source band");
    SynthesisResult result{waveform_from_spectrum(spectrum, sample_rate, t0),
                           dropped_max.load()};
    return result;
}

} // namespace

SynthesisResult synthesize_waveform(const SoundSpeedProfile& profile, const Geometry& geometry,
                                    const SourcePulse& pulse, double sample_rate,
                                    double duration, const SolverConfig& cfg) {
    std::vector<SoundSpeedProfile> profiles{profile};
    std::vector<double> ranges{0.0};
    return synthesize_stations(profiles, ranges, geometry, pulse, sample_rate, duration, cfg);
}

SynthesisResult synthesize_waveform(const RangeDependentEnv& env, const Geometry& geometry,
                                    const SourcePulse& pulse, double sample_rate,
                                    double duration, const SolverConfig& cfg,
                                    SynthesisMode mode) {
    if (mode == SynthesisMode::RangeIndependent)
        return synthesize_waveform(env_at_range(env, 0.0), geometry, pulse, sample_rate,
                                   duration, cfg);
    std::vector<double> ranges{0.0};
    for (const auto& st : env.stations())
        if (st.range_m > 0.0 && st.range_m < geometry.r) ranges.push_back(st.range_m);
    ranges.push_back(geometry.r);
    std::vector<SoundSpeedProfile> profiles;
    profiles.reserve(ranges.size());
    for (double r : ranges) profiles.push_back(env_at_range(env, r));
    return synthesize_stations(profiles, ranges, geometry, pulse, sample_rate, duration, cfg);
}

Waveform synthesize_duct_waveform(const LinearDuct& duct, const std::vector<int>& mode_indices,
                                  double r, const SourcePulse& pulse, double sample_rate,
                                  double duration) {
    if (!(r > 0.0)) throw InputError("range must be > 0");
    if (mode_indices.empty()) throw InputError("need at least one mode index");
    require_sample_rate(sample_rate, pulse);
    const int n = even_sample_count(sample_rate, duration);
    const double df = sample_rate / n;
    const int k_max = n / 2;
    auto [k_lo, k_hi] = band_bins(pulse, df, k_max);
    if (k_lo > k_hi) throw InputError("source band contains no DFT bins");

    const double t_r = r / duct.c0;
    const double t0 = t_r - 0.5 * n / sample_rate;

    std::vector<std::complex<double>> spectrum(k_max + 1, {0.0, 0.0});
    for (int k = k_lo; k <= k_hi; ++k) {
        const double f = k * df;
        const double s = source_spectrum(pulse, f);
        if (s == 0.0) continue;
        const double omega = 2.0 * kPi * f;
        std::complex<double> sum{0.0, 0.0};
        for (int m : mode_indices) {
            if (!wkb::is_trapped(duct, m, omega)) continue;
            double km = wkb::k_linearized(duct, m, omega);
            double amp = 1.0 / std::sqrt(km * r);
            double phase = km * r;
            sum += amp * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        spectrum[k] = s * sum;
    }
    return waveform_from_spectrum(spectrum, sample_rate, t0);
}

TLMap transmission_loss_map(const SoundSpeedProfile& profile, double frequency, double z_s,
                            const std::vector<double>& range_grid,
                            const std::vector<double>& depth_grid, const SolverConfig& cfg) {
    if (!(frequency > 0.0)) throw InputError("frequency must be > 0");
    if (range_grid.empty() || depth_grid.empty()) throw InputError("empty TL grid");
    for (double r : range_grid)
        if (!(r > 0.0)) throw InputError("TL ranges must be > 0");

    DepthGrid grid = make_solver_grid(profile, cfg, frequency);
    double maxps = resolve_max_phase_speed(profile, cfg);
    ModeSolution sol = solve_modes(profile, frequency, grid, maxps, cfg.rho);

    std::vector<double> psi_zs(sol.mode_count());
    for (std::size_t m = 0; m < sol.mode_count(); ++m)
        psi_zs[m] = sol.psi_at(static_cast<int>(m + 1), z_s);

    TLMap map;
    map.ranges = range_grid;
    map.depths = depth_grid;
    map.tl.assign(depth_grid.size(), std::vector<double>(range_grid.size(), 0.0));

    parallel_for(static_cast<int>(depth_grid.size()), [&](int iz) {
        std::vector<double> psi_zr(sol.mode_count());
        for (std::size_t m = 0; m < sol.mode_count(); ++m)
            psi_zr[m] = sol.psi_at(static_cast<int>(m + 1), depth_grid[iz]);
        for (std::size_t ir = 0; ir < range_grid.size(); ++ir) {
            double r = range_grid[ir];
            std::vector<CompactMode> compact;
            compact.reserve(sol.mode_count());
            for (std::size_t m = 0; m < sol.mode_count(); ++m) {
                const Mode& mode = sol.modes()[m];
                compact.push_back(
                    {mode.k_rm, psi_zs[m], psi_zr[m], mode.alpha * r, mode.k_rm * r});
            }
            double p = std::abs(pressure_value(compact, r, sol.rho(), 1.0));
            map.tl[iz][ir] = -20.0 * std::log10(p);
        }
    });
    return map;
}

std::vector<SkeletonPoint> dispersion_skeleton(const LinearDuct& duct, double r,
                                               const std::vector<int>& mode_indices,
                                               double f_lo, double f_hi, int n_freq) {
    if (!(r > 0.0)) throw InputError("range must be > 0");
    std::vector<SkeletonPoint> points;
    if (!(f_hi > f_lo) || n_freq < 2) return points;
    for (int m : mode_indices) {
        for (int i = 0; i < n_freq; ++i) {
            double f = f_lo + (f_hi - f_lo) * i / (n_freq - 1);
            double omega = 2.0 * kPi * f;
            if (!wkb::is_trapped(duct, m, omega)) continue;
            points.push_back({m, f, wkb::modal_group_delay(duct, m, omega, r)});
        }
    }
    return points;
}

void write_dispersion_csv(std::ostream& out, const std::vector<SkeletonPoint>& points) {
    out << "m,f_hz,t_s\n";
    for (const auto& p : points)
        out << p.m << ',' << csv_number(p.f_hz) << ',' << csv_number(p.t_s) << '\n';
}

void write_tl_csv(std::ostream& out, const TLMap& map) {
    for (double r : map.ranges) out << ',' << csv_number(r);
    out << '\n';
    for (std::size_t iz = 0; iz < map.depths.size(); ++iz) {
        out << csv_number(map.depths[iz]);
        for (double v : map.tl[iz]) out << ',' << csv_number(v);
        out << '\n';
    }
}

} // namespace ductwarp
