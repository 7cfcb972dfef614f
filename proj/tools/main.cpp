#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "opkin/config.hpp"
#include "opkin/csv.hpp"

namespace fs = std::filesystem;
using namespace opkin;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string manifest_path;
    std::string out_dir = "out";
    std::uint64_t seed = 12345;
    bool seed_given = false;
    int threads = 0;
    bool timing = false;
    bool gnuplot = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "configuration file (ini-style sections)");
    cmd->add_option("--manifest", a.manifest_path,
                    "replay a previous run from its manifest");
    cmd->add_option("--out", a.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", a.seed, "64-bit master seed")->capture_default_str();
    cmd->add_option("--threads", a.threads, "worker thread count (0 = runtime default)");
    cmd->add_flag("--timing", a.timing, "fill wall-clock columns (breaks byte reproducibility)");
    cmd->add_flag("--gnuplot", a.gnuplot, "also emit a plot script for density outputs");
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// loads the raw config either from --config or from a manifest replay;
// returns the effective seed alongside
RawConfig load_raw(const CommonArgs& a, const std::string& command, std::uint64_t& seed) {
    if (!a.config_path.empty() && !a.manifest_path.empty())
        throw ConfigError("give either --config or --manifest, not both");
    if (!a.manifest_path.empty()) {
        const RunManifest m = manifest_from_json(slurp(a.manifest_path));
        if (m.command != command)
            throw ConfigError("manifest was recorded for '" + m.command +
                              "', not '" + command + "'");
        seed = a.seed_given ? a.seed : m.seed;
        return manifest_to_raw(m);
    }
    if (a.config_path.empty()) throw ConfigError("--config or --manifest is required");
    seed = a.seed;
    return parse_ini(slurp(a.config_path));
}

void apply_threads(const CommonArgs& a) {
#ifdef _OPENMP
    if (a.threads > 0) omp_set_num_threads(a.threads);
#else
    (void)a;
#endif
}

void write_manifest(const CommonArgs& a, const std::string& command, std::uint64_t seed,
                    const ResolvedConfig& cfg) {
    RunManifest m;
    m.command = command;
    m.seed = seed;
    m.timestamp = current_timestamp_utc();
    m.config = cfg;
    std::ofstream f(fs::path(a.out_dir) / "manifest.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write manifest");
    f << manifest_to_json(m);
}

void print_warnings(const Resolution& res) {
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
}

std::string out_path(const CommonArgs& a, const std::string& name) {
    return (fs::path(a.out_dir) / name).string();
}

int run_simulate(const CommonArgs& a) {
    std::uint64_t seed = a.seed;
    const RawConfig raw = load_raw(a, "simulate", seed);
    Resolution res;
    SimulateCommand cmd = resolve_simulate(raw, seed, res);
    print_warnings(res);
    apply_threads(a);
    fs::create_directories(a.out_dir);

    const SimResult result = simulate(cmd.sim);
    write_moment_series_csv(out_path(a, "moments.csv"), result.pooled);
    write_density_csv(out_path(a, "histogram.csv"), result.pooled_hist);
    if (a.gnuplot) write_gnuplot_script(out_path(a, "plot.gp"), "histogram.csv");
    write_manifest(a, "simulate", seed, res.resolved);
    std::cout << "simulate: " << cmd.sim.realizations << " replica(s), N = " << cmd.sim.n
              << ", t_end = " << cmd.sim.t_end
              << ", effective lambda = " << format_double(result.effective_lambda) << "\n";
    if (result.noise_clipped) std::cout << "note: noise support was clipped\n";
    return 0;
}

int run_fp_solve(const CommonArgs& a) {
    std::uint64_t seed = a.seed;
    const RawConfig raw = load_raw(a, "fp-solve", seed);
    Resolution res;
    FpSolveCommand cmd = resolve_fp_solve(raw, res);
    print_warnings(res);
    apply_threads(a);
    fs::create_directories(a.out_dir);

    const FPResult result = fp_solve(cmd.eq, initial_grid(cmd.init, cmd.cells), cmd.tau_end,
                                     cmd.record_every, cmd.control);
    write_moment_series_csv(out_path(a, "moments.csv"), result.series);
    write_density_csv(out_path(a, "profile.csv"), result.grid);
    if (a.gnuplot) write_gnuplot_script(out_path(a, "plot.gp"), "profile.csv");
    write_manifest(a, "fp-solve", seed, res.resolved);
    std::cout << "fp-solve: tau = " << format_double(result.grid.time)
              << (result.stationary_reached ? " (stationary profile reached)" : "")
              << ", mass = " << format_double(result.grid.mass()) << "\n";
    return 0;
}

int run_steady_state(const CommonArgs& a) {
    std::uint64_t seed = a.seed;
    const RawConfig raw = load_raw(a, "steady-state", seed);
    Resolution res;
    SteadyStateCommand cmd = resolve_steady_state(raw, res);
    print_warnings(res);
    fs::create_directories(a.out_dir);

    const StationaryDensity g{cmd.spec};
    write_density_csv(out_path(a, "profile.csv"), g.tabulate(cmd.cells));
    if (a.gnuplot) write_gnuplot_script(out_path(a, "plot.gp"), "profile.csv");
    write_manifest(a, "steady-state", seed, res.resolved);

    std::cout << "steady-state: normalization constant = " << format_double(g.constant())
              << ", mean = " << format_double(g.mean())
              << ", second moment = " << format_double(g.second_moment()) << "\n";
    const auto peaks = g.peaks();
    std::cout << "interior peaks:";
    if (peaks.empty()) std::cout << " none";
    for (double p : peaks) std::cout << ' ' << format_double(p);
    std::cout << "\n";
    const auto eb = endpoint_behavior(cmd.spec);
    const auto name = [](EndpointTrend t) {
        switch (t) {
            case EndpointTrend::Vanishes: return "vanishes";
            case EndpointTrend::Finite: return "finite";
            case EndpointTrend::Diverges: return "diverges";
        }
        return "?";
    };
    std::cout << "endpoint behavior: at -1 " << name(eb.at_minus_one) << ", at +1 "
              << name(eb.at_plus_one) << "\n";
    return 0;
}

int run_limit_sweep(const CommonArgs& a) {
    std::uint64_t seed = a.seed;
    const RawConfig raw = load_raw(a, "limit-sweep", seed);
    Resolution res;
    SweepCommand cmd = resolve_sweep(raw, seed, res);
    cmd.sweep.timing = cmd.sweep.timing || a.timing;
    cmd.sweep.parallel = true;
    print_warnings(res);
    apply_threads(a);
    fs::create_directories(a.out_dir);

    const SweepResult result = run_sweep(cmd.sweep);
    write_sweep_csv(out_path(a, "sweep.csv"), result.rows);
    write_manifest(a, "limit-sweep", seed, res.resolved);
    for (const auto& line : result.log) std::cout << line << "\n";
    for (const auto& row : result.rows) {
        if (row.skipped) continue;
        std::cout << "gamma = " << format_double(row.gamma)
                  << ": distance to closed form = " << format_double(row.metric_to_closed_form)
                  << " (bootstrap se " << format_double(row.bootstrap_se) << ")"
                  << (row.stationary_reached ? "" : " [not stationary]") << "\n";
    }
    std::cout << "distance non-increasing within one bootstrap se: "
              << (result.monotone_within_se ? "yes" : "no") << "\n";
    return 0;
}

int run_moment_check(const CommonArgs& a) {
    std::uint64_t seed = a.seed;
    const RawConfig raw = load_raw(a, "moment-check", seed);
    Resolution res;
    MomentCheckCommand cmd = resolve_moment_check(raw, seed, res);
    print_warnings(res);
    apply_threads(a);
    fs::create_directories(a.out_dir);

    const SimResult result = simulate(cmd.sim);
    MomentSeries series = result.pooled;
    if (cmd.fit_window > 0.0) {
        MomentSeries cut;
        for (const auto& r : series)
            if (r.t <= cmd.fit_window + 1e-9) cut.push_back(r);
        series = cut;
    }
    const RateCheck rc = moment_law_check(series, cmd.sim);
    write_moment_series_csv(out_path(a, "moments.csv"), result.pooled);
    write_rate_check_csv(out_path(a, "rate_check.csv"), rc.fitted_rate, rc.theoretical_rate,
                         rc.continuum_rate, rc.relative_deviation);
    write_manifest(a, "moment-check", seed, res.resolved);
    std::cout << "fitted rate " << format_double(rc.fitted_rate) << ", per-sweep rate "
              << format_double(rc.theoretical_rate) << ", continuum coefficient "
              << format_double(rc.continuum_rate) << ", relative deviation "
              << format_double(rc.relative_deviation) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kinetic opinion dynamics: exchange Monte Carlo, limiting drift-diffusion "
                 "solver, and closed-form steady states"};
    app.require_subcommand(1);

    CommonArgs args;
    int (*runner)(const CommonArgs&) = nullptr;

    auto* sim = app.add_subcommand("simulate", "ensemble exchange Monte Carlo");
    add_common(sim, args);
    sim->callback([&] { runner = run_simulate; });

    auto* fp = app.add_subcommand("fp-solve", "finite-volume drift-diffusion solver");
    add_common(fp, args);
    fp->callback([&] { runner = run_fp_solve; });

    auto* ss = app.add_subcommand("steady-state", "closed-form stationary density");
    add_common(ss, args);
    ss->callback([&] { runner = run_steady_state; });

    auto* sw = app.add_subcommand("limit-sweep", "gamma sweep against the limiting equation");
    add_common(sw, args);
    sw->callback([&] { runner = run_limit_sweep; });

    auto* mc = app.add_subcommand("moment-check", "spread decay rate check");
    add_common(mc, args);
    mc->callback([&] { runner = run_moment_check; });

    // remember whether --seed came from the command line
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]).rfind("--seed", 0) == 0) args.seed_given = true;

    CLI11_PARSE(app, argc, argv);

    try {
        return runner(args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}
