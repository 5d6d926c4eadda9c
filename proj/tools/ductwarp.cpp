#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "ductwarp/csv.hpp"
#include "ductwarp/manifest.hpp"
#include "ductwarp/scenario.hpp"
#include "ductwarp/synth.hpp"
#include "ductwarp/warp.hpp"
#include "ductwarp/waveform_io.hpp"
#include "ductwarp/wkb.hpp"

namespace fs = std::filesystem;
using namespace ductwarp;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string out_path(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    return (fs::path(dir) / name).string();
}

// Two samples are enough: the profile interpolation is piecewise linear.
SoundSpeedProfile linear_duct_profile(const LinearDuct& duct, double depth_max) {
    std::vector<SspSample> samples{{0.0, duct.c0}, {depth_max, duct.speed_at(depth_max)}};
    return SoundSpeedProfile(std::move(samples), "linear-duct");
}

struct DuctArgs {
    double c0 = 1434.0;
    double a = 4.359e-5;
    double depth_limit = 400.0;

    LinearDuct make() const { return LinearDuct(c0, a, depth_limit); }
};

void add_duct_options(CLI::App* cmd, DuctArgs& args) {
    cmd->add_option("--c0", args.c0, "surface sound speed, m/s");
    cmd->add_option("--a", args.a, "fractional speed gradient, 1/m");
    cmd->add_option("--duct-depth", args.depth_limit, "duct validity depth, m");
}

struct SolverArgs {
    double depth_max = 2000.0;
    double dz = 0.0;
    double max_phase_speed = 0.0;
    double rho = 1000.0;

    SolverConfig make() const { return {depth_max, dz, max_phase_speed, rho}; }
};

void add_solver_options(CLI::App* cmd, SolverArgs& args) {
    cmd->add_option("--depth-max", args.depth_max, "truncation depth H, m");
    cmd->add_option("--dz", args.dz, "grid spacing, m (0 = auto)");
    cmd->add_option("--max-phase-speed", args.max_phase_speed, "mode filter, m/s (0 = c(H))");
    cmd->add_option("--rho", args.rho, "water density, kg/m^3");
}

int cmd_fit_duct(const std::string& ssp_path, double depth_limit, const std::string& dir) {
    SoundSpeedProfile profile = parse_ssp_file(ssp_path);
    LinearDuct duct = fit_linear_duct(profile, depth_limit);
    std::cout << "c0 = " << csv_number(duct.c0) << " m/s\n";
    std::cout << "a  = " << csv_number(duct.a) << " 1/m\n";
    RunManifest manifest("fit-duct");
    manifest.add_input("ssp", ssp_path);
    manifest.add_parameter("depth_limit_m", depth_limit);
    manifest.add_parameter("c0", duct.c0);
    manifest.add_parameter("a", duct.a);
    manifest.write(out_path(dir, "manifest.json"));
    return 0;
}

int cmd_modes(const std::string& ssp_path, double freq, double dfreq, const SolverArgs& solver,
              const std::string& dir) {
    SoundSpeedProfile profile = parse_ssp_file(ssp_path);
    SolverConfig cfg = solver.make();
    DepthGrid grid = make_solver_grid(profile, cfg, freq);
    double maxps = resolve_max_phase_speed(profile, cfg);
    ModeSolution sol = solve_modes(profile, freq, grid, maxps, cfg.rho);
    if (dfreq > 0.0) fill_group_speeds(sol, profile, maxps, dfreq);

    std::string table = out_path(dir, "mode_table.csv");
    {
        std::ofstream out(table);
        write_mode_table(out, sol);
    }
    std::string eigen = out_path(dir, "eigenfunctions.csv");
    {
        std::ofstream out(eigen);
        write_eigenfunctions(out, sol);
    }
    std::cout << sol.mode_count() << " modes at " << csv_number(freq) << " Hz\n";

    RunManifest manifest("modes");
    manifest.add_input("ssp", ssp_path);
    manifest.add_parameter("freq_hz", freq);
    manifest.add_parameter("depth_max_m", cfg.depth_max);
    manifest.add_parameter("dz_m", grid.dz());
    manifest.add_parameter("max_phase_speed_mps", maxps);
    manifest.add_output(table);
    manifest.add_output(eigen);
    manifest.write(out_path(dir, "manifest.json"));
    return 0;
}

int cmd_wkb_table(const DuctArgs& duct_args, int n_modes, double freq, const SolverArgs& solver,
                  const std::string& dir) {
    LinearDuct duct = duct_args.make();
    double omega = 2.0 * kPi * freq;
    SoundSpeedProfile profile = linear_duct_profile(duct, solver.depth_max);
    SolverConfig cfg = solver.make();
    DepthGrid grid = make_solver_grid(profile, cfg, freq);
    double maxps = resolve_max_phase_speed(profile, cfg);
    ModeSolution sol = solve_modes(profile, freq, grid, maxps, cfg.rho);

    std::string table = out_path(dir, "wkb_table.csv");
    std::ofstream out(table);
    out << "m,k_sqrt_form,k_linearized,k_solver,rel_gap_sqrt,rel_gap_linearized\n";
    for (int m = 1; m <= n_modes; ++m) {
        if (!wkb::is_trapped(duct, m, omega)) break;
        if (m > static_cast<int>(sol.mode_count())) break;
        double k8 = wkb::k_exact_form(duct, m, omega);
        double k10 = wkb::k_linearized(duct, m, omega);
        double ks = sol.mode(m).k_rm;
        out << m << ',' << csv_number(k8) << ',' << csv_number(k10) << ',' << csv_number(ks)
            << ',' << csv_number(std::abs(k8 - ks) / ks) << ','
            << csv_number(std::abs(k10 - ks) / ks) << '\n';
    }
    out.close();
    std::cout << "wrote " << table << "\n";

    RunManifest manifest("wkb-table");
    manifest.add_parameter("c0", duct.c0);
    manifest.add_parameter("a", duct.a);
    manifest.add_parameter("freq_hz", freq);
    manifest.add_parameter("modes", static_cast<double>(n_modes));
    manifest.add_output(table);
    manifest.write(out_path(dir, "manifest.json"));
    return 0;
}

int cmd_tl(const std::string& ssp_path, double freq, double z_s, double r_min, double r_max,
           int nr, double z_min, double z_max, int nz, const SolverArgs& solver,
           const std::string& dir) {
    SoundSpeedProfile profile = parse_ssp_file(ssp_path);
    std::vector<double> ranges(nr), depths(nz);
    for (int i = 0; i < nr; ++i)
        ranges[i] = r_min + (r_max - r_min) * i / std::max(1, nr - 1);
    for (int i = 0; i < nz; ++i)
        depths[i] = z_min + (z_max - z_min) * i / std::max(1, nz - 1);
    TLMap map = transmission_loss_map(profile, freq, z_s, ranges, depths, solver.make());

    std::string path = out_path(dir, "tl.csv");
    {
        std::ofstream out(path);
        write_tl_csv(out, map);
    }
    std::cout << "wrote " << path << "\n";

    RunManifest manifest("tl");
    manifest.add_input("ssp", ssp_path);
    manifest.add_parameter("freq_hz", freq);
    manifest.add_parameter("source_depth_m", z_s);
    manifest.add_output(path);
    manifest.write(out_path(dir, "manifest.json"));
    return 0;
}

int cmd_synth(const std::string& ssp_path, const DuctArgs& duct_args, bool use_solver,
              int n_modes, double z_s, double z_r, double r, double f_lo, double f_hi,
              double fs, double duration, const SolverArgs& solver, const std::string& dir) {
    SourcePulse pulse(f_lo, f_hi);
    Geometry geometry(z_s, z_r, r);
    Waveform w;
    RunManifest manifest("synth");
    if (use_solver) {
        if (ssp_path.empty()) throw InputError("synth --route solver needs --ssp");
        SoundSpeedProfile profile = parse_ssp_file(ssp_path);
        manifest.add_input("ssp", ssp_path);
        w = synthesize_waveform(profile, geometry, pulse, fs, duration, solver.make()).waveform;
    } else {
        LinearDuct duct = duct_args.make();
        std::vector<int> mode_list(n_modes);
        for (int m = 1; m <= n_modes; ++m) mode_list[m - 1] = m;
        w = synthesize_duct_waveform(duct, mode_list, r, pulse, fs, duration);
        manifest.add_parameter("c0", duct.c0);
        manifest.add_parameter("a", duct.a);
    }
    std::string path = out_path(dir, "waveform.f32");
    write_waveform(path, w);
    std::cout << "wrote " << path << " (" << w.size() << " samples, t0 = " << csv_number(w.t0)
              << " s)\n";
    manifest.add_parameter("range_m", r);
    manifest.add_parameter("sample_rate_hz", fs);
    manifest.add_parameter("duration_s", duration);
    manifest.add_output(path);
    manifest.add_output(path + ".json");
    manifest.write(out_path(dir, "manifest.json"));
    return 0;
}

int cmd_warp(const std::string& wave_path, double tr, double range, double c0, bool refine,
             double oversample, const std::string& interp, double window_s, double guard_s,
             const std::string& dir) {
    Waveform w = read_signal(wave_path);
    double t_r = tr;
    bool refined = false;
    if (t_r <= 0.0) {
        if (range <= 0.0 || c0 <= 0.0)
            throw InputError("warp needs --tr or both --range and --c0");
        if (refine) {
            TrEstimate est = estimate_tr_refined(w, range, c0, oversample);
            t_r = est.t_r;
            refined = est.refined;
        } else {
            t_r = estimate_tr(range, c0);
        }
    }
    Waveform analysis = w;
    if (window_s > 0.0) analysis = slice(w, t_r - window_s, t_r - guard_s);
    WarpPlan plan(t_r, oversample,
                  interp == "linear" ? InterpKind::Linear : InterpKind::Cubic);
    Waveform warped = warp_signal(analysis, plan);

    std::string path = out_path(dir, "warped.f32");
    write_waveform(path, warped);
    std::string spec_path = out_path(dir, "warped_spectrum.csv");
    {
        PowerSpectrum ps = power_spectrum(warped, 0.1);
        std::ofstream out(spec_path);
        out << "f_hz,power\n";
        for (std::size_t i = 0; i < ps.freqs.size(); ++i)
            out << csv_number(ps.freqs[i]) << ',' << csv_number(ps.power[i]) << '\n';
    }
    std::cout << "t_r = " << csv_number(t_r) << " s" << (refined ? " (refined)" : "") << "\n";

    RunManifest manifest("warp");
    manifest.add_input("wave", wave_path);
    manifest.add_parameter("t_r_s", t_r);
    manifest.add_parameter("oversample", oversample);
    manifest.add_output(path);
    manifest.add_output(path + ".json");
    manifest.add_output(spec_path);
    manifest.write(out_path(dir, "manifest.json"));
    return 0;
}

int cmd_separate(const std::string& wave_path, double tr, double range, const DuctArgs& duct_args,
                 int n_bands, double halfwidth_fraction, double oversample, double window_s,
                 double guard_s, int stft_window, int stft_hop, double threshold,
                 const std::string& dir) {
    Waveform w = read_signal(wave_path);
    LinearDuct duct = duct_args.make();
    double t_r = tr > 0.0 ? tr : estimate_tr(range, duct.c0);
    Waveform analysis = window_s > 0.0 ? slice(w, t_r - window_s, t_r - guard_s) : w;
    WarpPlan plan(t_r, oversample, InterpKind::Cubic);
    auto bands = duct_mode_bands(duct, range, n_bands, halfwidth_fraction);
    SeparationParams params;
    params.stft_window = stft_window;
    params.stft_hop = stft_hop;
    params.ridge_threshold = threshold;
    auto separated = separate_modes(analysis, plan, bands, params);

    RunManifest manifest("separate");
    manifest.add_input("wave", wave_path);
    manifest.add_parameter("t_r_s", t_r);
    manifest.add_parameter("bands", static_cast<double>(n_bands));

    int present = 0;
    std::vector<SkeletonPoint> combined;
    for (const auto& mode : separated) {
        if (!mode.present) {
            std::cout << "mode " << mode.m << ": absent\n";
            continue;
        }
        ++present;
        std::string wp = out_path(dir, "mode_" + std::to_string(mode.m) + ".f32");
        write_waveform(wp, mode.waveform);
        manifest.add_output(wp);
        manifest.add_output(wp + ".json");
        std::string rp = out_path(dir, "ridge_" + std::to_string(mode.m) + ".csv");
        {
            std::ofstream out(rp);
            write_ridge_csv(out, mode.ridge);
        }
        manifest.add_output(rp);
        for (const auto& pt : mode.ridge) combined.push_back({mode.m, pt.f_hz, pt.t_s});
        std::cout << "mode " << mode.m << ": " << mode.ridge.size() << " ridge points\n";
    }
    std::string dp = out_path(dir, "dispersion.csv");
    {
        std::ofstream out(dp);
        write_dispersion_csv(out, combined);
    }
    manifest.add_output(dp);
    manifest.write(out_path(dir, "manifest.json"));
    std::cout << present << "/" << n_bands << " modes present\n";
    return 0;
}

int cmd_dispersion(const std::string& wave_path, const DuctArgs& duct_args, double range,
                   int n_modes, double f_lo, double f_hi, int stft_window, int stft_hop,
                   double threshold, const std::string& dir) {
    RunManifest manifest("dispersion");
    std::string path;
    if (!wave_path.empty()) {
        Waveform w = read_signal(wave_path);
        Spectrogram sg = stft(w, stft_window, stft_hop);
        auto ridge = extract_dispersion(sg, threshold);
        path = out_path(dir, "dispersion_extracted.csv");
        std::ofstream out(path);
        write_ridge_csv(out, ridge);
        manifest.add_input("wave", wave_path);
    } else {
        LinearDuct duct = duct_args.make();
        std::vector<int> mode_list(n_modes);
        for (int m = 1; m <= n_modes; ++m) mode_list[m - 1] = m;
        auto skeleton = dispersion_skeleton(duct, range, mode_list, f_lo, f_hi, 181);
        path = out_path(dir, "skeleton.csv");
        std::ofstream out(path);
        write_dispersion_csv(out, skeleton);
        manifest.add_parameter("c0", duct.c0);
        manifest.add_parameter("a", duct.a);
        manifest.add_parameter("range_m", range);
    }
    std::cout << "wrote " << path << "\n";
    manifest.add_output(path);
    manifest.write(out_path(dir, "manifest.json"));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ductwarp: Arctic surface-duct normal modes, warping and dispersion"};
    app.require_subcommand(1);

    std::string dir = ".";
    app.add_option("--out-dir", dir, "artifact directory")->capture_default_str();

    // fit-duct
    auto* fit = app.add_subcommand("fit-duct", "fit c(z) = c0(1+az) to an SSP");
    std::string fit_ssp;
    double fit_limit = 400.0;
    fit->add_option("--ssp", fit_ssp, "SSP CSV")->required();
    fit->add_option("--depth-limit", fit_limit, "fit depth limit, m");

    // modes
    auto* modes_cmd = app.add_subcommand("modes", "numerical normal-mode table");
    std::string modes_ssp;
    double modes_freq = 50.0, modes_dfreq = 0.5;
    SolverArgs modes_solver;
    modes_cmd->add_option("--ssp", modes_ssp, "SSP CSV")->required();
    modes_cmd->add_option("--freq", modes_freq, "frequency, Hz")->required();
    modes_cmd->add_option("--dfreq", modes_dfreq, "group-speed stencil, Hz (0 = skip)");
    add_solver_options(modes_cmd, modes_solver);

    // wkb-table
    auto* wkb_cmd = app.add_subcommand("wkb-table", "duct wavenumbers vs the solver");
    DuctArgs wkb_duct;
    int wkb_modes = 7;
    double wkb_freq = 100.0;
    SolverArgs wkb_solver;
    add_duct_options(wkb_cmd, wkb_duct);
    wkb_cmd->add_option("--modes", wkb_modes, "number of modes");
    wkb_cmd->add_option("--freq", wkb_freq, "frequency, Hz");
    add_solver_options(wkb_cmd, wkb_solver);

    // tl
    auto* tl_cmd = app.add_subcommand("tl", "transmission-loss map");
    std::string tl_ssp;
    double tl_freq = 100.0, tl_zs = 300.0;
    double tl_rmin = 1000.0, tl_rmax = 60000.0, tl_zmin = 5.0, tl_zmax = 1000.0;
    int tl_nr = 120, tl_nz = 200;
    SolverArgs tl_solver;
    tl_cmd->add_option("--ssp", tl_ssp, "SSP CSV")->required();
    tl_cmd->add_option("--freq", tl_freq, "frequency, Hz");
    tl_cmd->add_option("--zs", tl_zs, "source depth, m");
    tl_cmd->add_option("--r-min", tl_rmin);
    tl_cmd->add_option("--r-max", tl_rmax);
    tl_cmd->add_option("--nr", tl_nr);
    tl_cmd->add_option("--z-min", tl_zmin);
    tl_cmd->add_option("--z-max", tl_zmax);
    tl_cmd->add_option("--nz", tl_nz);
    add_solver_options(tl_cmd, tl_solver);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "broadband pulse synthesis");
    std::string synth_ssp, synth_route = "duct";
    DuctArgs synth_duct;
    int synth_modes = 6;
    double synth_zs = 300.0, synth_zr = 372.0, synth_r = 105000.0;
    double synth_flo = 10.0, synth_fhi = 100.0, synth_fs = 400.0, synth_dur = 6.0;
    SolverArgs synth_solver;
    synth_cmd->add_option("--ssp", synth_ssp, "SSP CSV (solver route)");
    synth_cmd->add_option("--route", synth_route, "duct | solver")->capture_default_str();
    add_duct_options(synth_cmd, synth_duct);
    synth_cmd->add_option("--modes", synth_modes, "mode count (duct route)");
    synth_cmd->add_option("--zs", synth_zs, "source depth, m");
    synth_cmd->add_option("--zr", synth_zr, "receiver depth, m");
    synth_cmd->add_option("--range", synth_r, "range, m");
    synth_cmd->add_option("--f-lo", synth_flo);
    synth_cmd->add_option("--f-hi", synth_fhi);
    synth_cmd->add_option("--fs", synth_fs, "sample rate, Hz");
    synth_cmd->add_option("--duration", synth_dur, "window length, s");
    add_solver_options(synth_cmd, synth_solver);

    // warp
    auto* warp_cmd = app.add_subcommand("warp", "warping transform of a received signal");
    std::string warp_wave, warp_interp = "cubic";
    double warp_tr = 0.0, warp_range = 0.0, warp_c0 = 0.0, warp_os = 4.0;
    double warp_window = 0.0, warp_guard = 0.05;
    bool warp_refine = false;
    warp_cmd->add_option("--wave", warp_wave, "waveform file (.f32 or .wav)")->required();
    warp_cmd->add_option("--tr", warp_tr, "reference arrival time, s");
    warp_cmd->add_option("--range", warp_range, "range, m (with --c0)");
    warp_cmd->add_option("--c0", warp_c0, "surface speed, m/s");
    warp_cmd->add_flag("--refine", warp_refine, "refine t_r by spectral concentration");
    warp_cmd->add_option("--oversample", warp_os);
    warp_cmd->add_option("--interp", warp_interp, "linear | cubic");
    warp_cmd->add_option("--window-s", warp_window, "analysis window before t_r (0 = whole)");
    warp_cmd->add_option("--guard-s", warp_guard, "gap kept before t_r");

    // separate
    auto* sep_cmd = app.add_subcommand("separate", "warp-domain mode separation");
    std::string sep_wave;
    DuctArgs sep_duct;
    double sep_tr = 0.0, sep_range = 105000.0, sep_hw = 0.4, sep_os = 4.0;
    double sep_window = 3.0, sep_guard = 0.05, sep_thresh = 0.25;
    int sep_bands = 6, sep_stft = 256, sep_hop = 8;
    sep_cmd->add_option("--wave", sep_wave, "waveform file")->required();
    sep_cmd->add_option("--tr", sep_tr, "reference arrival time, s (0 = range/c0)");
    sep_cmd->add_option("--range", sep_range, "range, m")->required();
    add_duct_options(sep_cmd, sep_duct);
    sep_cmd->add_option("--bands", sep_bands, "number of mode bands");
    sep_cmd->add_option("--halfwidth-fraction", sep_hw);
    sep_cmd->add_option("--oversample", sep_os);
    sep_cmd->add_option("--window-s", sep_window);
    sep_cmd->add_option("--guard-s", sep_guard);
    sep_cmd->add_option("--stft-window", sep_stft);
    sep_cmd->add_option("--stft-hop", sep_hop);
    sep_cmd->add_option("--threshold", sep_thresh);

    // dispersion
    auto* disp_cmd = app.add_subcommand("dispersion", "dispersion curves (skeleton or extracted)");
    std::string disp_wave;
    DuctArgs disp_duct;
    double disp_range = 105000.0, disp_flo = 10.0, disp_fhi = 100.0, disp_thresh = 0.25;
    int disp_modes = 6, disp_stft = 256, disp_hop = 8;
    disp_cmd->add_option("--wave", disp_wave, "waveform to extract from (else: analytic)");
    add_duct_options(disp_cmd, disp_duct);
    disp_cmd->add_option("--range", disp_range, "range, m");
    disp_cmd->add_option("--modes", disp_modes);
    disp_cmd->add_option("--f-lo", disp_flo);
    disp_cmd->add_option("--f-hi", disp_fhi);
    disp_cmd->add_option("--stft-window", disp_stft);
    disp_cmd->add_option("--stft-hop", disp_hop);
    disp_cmd->add_option("--threshold", disp_thresh);

    // scenario
    auto* scen_cmd = app.add_subcommand("scenario", "run a scenario file");
    auto* scen_run = scen_cmd->add_subcommand("run", "execute the pipeline");
    std::string scen_path;
    scen_run->add_option("file", scen_path, "scenario config")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit) return cmd_fit_duct(fit_ssp, fit_limit, dir);
        if (*modes_cmd) return cmd_modes(modes_ssp, modes_freq, modes_dfreq, modes_solver, dir);
        if (*wkb_cmd) return cmd_wkb_table(wkb_duct, wkb_modes, wkb_freq, wkb_solver, dir);
        if (*tl_cmd)
            return cmd_tl(tl_ssp, tl_freq, tl_zs, tl_rmin, tl_rmax, tl_nr, tl_zmin, tl_zmax,
                          tl_nz, tl_solver, dir);
        if (*synth_cmd) {
            if (synth_route != "duct" && synth_route != "solver")
                throw InputError("--route must be duct or solver");
            return cmd_synth(synth_ssp, synth_duct, synth_route == "solver", synth_modes,
                             synth_zs, synth_zr, synth_r, synth_flo, synth_fhi, synth_fs,
                             synth_dur, synth_solver, dir);
        }
        if (*warp_cmd) {
            if (warp_interp != "linear" && warp_interp != "cubic")
                throw InputError("--interp must be linear or cubic");
            return cmd_warp(warp_wave, warp_tr, warp_range, warp_c0, warp_refine, warp_os,
                            warp_interp, warp_window, warp_guard, dir);
        }
        if (*sep_cmd)
            return cmd_separate(sep_wave, sep_tr, sep_range, sep_duct, sep_bands, sep_hw,
                                sep_os, sep_window, sep_guard, sep_stft, sep_hop, sep_thresh,
                                dir);
        if (*disp_cmd)
            return cmd_dispersion(disp_wave, disp_duct, disp_range, disp_modes, disp_flo,
                                  disp_fhi, disp_stft, disp_hop, disp_thresh, dir);
        if (*scen_cmd) {
            if (!*scen_run) throw InputError("usage: scenario run <file>");
            Scenario s = load_scenario(scen_path);
            ScenarioResult result = run_scenario(s);
            std::cout << "t_r = " << csv_number(result.t_r) << " s\n";
            std::cout << "modes present: " << result.bands_present << "/"
                      << result.bands_requested << "\n";
            if (result.dropped_modes > 0)
                std::cout << "adiabatic modes dropped: " << result.dropped_modes << "\n";
            std::cout << "artifacts: " << result.artifact_paths.size() << " files in "
                      << s.out_dir << "\n";
            return 0;
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
