#include "opkin/limit_lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "opkin/stationary.hpp"

namespace opkin {

void SweepConfig::validate() const {
    if (gammas.empty()) throw std::invalid_argument("gammas: list must not be empty");
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (!(gammas[i] > 0.0 && gammas[i] < 0.5))
            throw std::invalid_argument("gammas: every value must lie in (0, 1/2)");
        if (i > 0 && !(gammas[i] < gammas[i - 1]))
            throw std::invalid_argument("gammas: list must be strictly decreasing");
    }
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda: must be positive");
    if (n < 2) throw std::invalid_argument("n: must be >= 2");
    if (realizations < 1) throw std::invalid_argument("realizations: must be >= 1");
    if (bins < 2) throw std::invalid_argument("bins: must be >= 2");
    if (!(tau_end > 0.0)) throw std::invalid_argument("tau_end: must be positive");
    if (bootstrap_resamples < 10)
        throw std::invalid_argument("bootstrap_resamples: must be >= 10");
}

namespace {

double grid_distance(const DensityGrid& a, const DensityGrid& b, SweepConfig::Metric m) {
    return m == SweepConfig::Metric::L1 ? l1_distance(a, b) : wasserstein1_distance(a, b);
}

bool closed_form_available(const SweepConfig& cfg) {
    if (cfg.p.kind() != CompromiseFunction::Kind::Constant) return false;
    switch (cfg.d.kind()) {
        case DiffusionFunction::Kind::OneMinusWSquared:
        case DiffusionFunction::Kind::OneMinusAbs:
        case DiffusionFunction::Kind::SqrtOneMinusWSquared:
        case DiffusionFunction::Kind::SqrtRegularized:
            return true;
        case DiffusionFunction::Kind::Table:
            return false;
    }
    return false;
}

SteadyD limit_steady_d(const DiffusionFunction& d) {
    switch (d.kind()) {
        case DiffusionFunction::Kind::OneMinusWSquared: return SteadyD::OneMinusWSquared;
        case DiffusionFunction::Kind::OneMinusAbs: return SteadyD::OneMinusAbs;
        // the regularized family tends to sqrt(1 - w^2) as gamma -> 0
        case DiffusionFunction::Kind::SqrtOneMinusWSquared:
        case DiffusionFunction::Kind::SqrtRegularized:
            return SteadyD::SqrtOneMinusWSquared;
        case DiffusionFunction::Kind::Table: break;
    }
    throw std::invalid_argument("no closed form for this diffusion variant");
}

// the limiting equation keeps the fixed diffusion variant; the regularized
// family is replaced by its gamma -> 0 limit
DiffusionFunction limit_diffusion(const DiffusionFunction& d) {
    if (d.kind() == DiffusionFunction::Kind::SqrtRegularized)
        return DiffusionFunction::sqrt_one_minus_w2();
    return d;
}

double init_mean(const InitSpec& init) {
    return init.kind == InitSpec::Kind::Uniform ? 0.0 : init.center;
}

} // namespace

namespace {

// typical statistical wobble of the pooled histogram: mean distance between a
// replica-bootstrap of the pool and the pool itself
double bootstrap_noise_floor(const std::vector<DensityGrid>& replica_hists,
                             const DensityGrid& pooled, SweepConfig::Metric metric,
                             int resamples, std::uint64_t seed) {
    const int r = static_cast<int>(replica_hists.size());
    if (r < 2) return 0.0;
    Philox rng(seed, 0xF100Au);
    const int k = pooled.cells();
    DensityGrid boot = DensityGrid::zeros(k);
    double acc = 0.0;
    for (int b = 0; b < resamples; ++b) {
        std::fill(boot.value.begin(), boot.value.end(), 0.0);
        for (int j = 0; j < r; ++j) {
            const DensityGrid& g = replica_hists[rng.bounded(static_cast<std::uint32_t>(r))];
            for (int i = 0; i < k; ++i) boot.value[i] += g.value[i];
        }
        for (double& v : boot.value) v /= r;
        acc += grid_distance(boot, pooled, metric);
    }
    return acc / resamples;
}

} // namespace

double bootstrap_distance_se(const std::vector<DensityGrid>& replica_hists,
                             const DensityGrid& reference, SweepConfig::Metric metric,
                             int resamples, std::uint64_t seed) {
    const int r = static_cast<int>(replica_hists.size());
    if (r < 2) return 0.0;
    Philox rng(seed, 0xB007u);
    const int k = reference.cells();
    DensityGrid pooled = DensityGrid::zeros(k);
    std::vector<double> dist(resamples);
    for (int b = 0; b < resamples; ++b) {
        std::fill(pooled.value.begin(), pooled.value.end(), 0.0);
        for (int j = 0; j < r; ++j) {
            const DensityGrid& g = replica_hists[rng.bounded(static_cast<std::uint32_t>(r))];
            for (int i = 0; i < k; ++i) pooled.value[i] += g.value[i];
        }
        for (double& v : pooled.value) v /= r;
        dist[b] = grid_distance(pooled, reference, metric);
    }
    double m = 0.0;
    for (double d : dist) m += d;
    m /= resamples;
    double s = 0.0;
    for (double d : dist) s += (d - m) * (d - m);
    return std::sqrt(s / (resamples - 1));
}

SweepResult run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    SweepResult out;
    const bool have_closed_form = closed_form_available(cfg);
    const double m0 = init_mean(cfg.init);

    for (std::size_t gi = 0; gi < cfg.gammas.size(); ++gi) {
        const double gamma = cfg.gammas[gi];
        SweepRow row;
        row.gamma = gamma;
        row.sigma2 = cfg.lambda * gamma;
        const auto t0 = std::chrono::steady_clock::now();

        SimConfig sim;
        sim.n = cfg.n;
        sim.params = KineticParams::from_lambda(gamma, cfg.lambda);
        sim.p = cfg.p;
        sim.d = cfg.d.kind() == DiffusionFunction::Kind::SqrtRegularized
                    ? DiffusionFunction::sqrt_regularized(cfg.d.reg_p(), gamma)
                    : cfg.d;
        sim.noise = NoiseModel::uniform_symmetric(std::sqrt(3.0 * sim.params.sigma2));
        sim.init = cfg.init;
        sim.t_end = std::ceil(cfg.tau_end / gamma);
        sim.record_every = std::max(1.0, std::floor(sim.t_end / 200.0));
        sim.histogram_bins = cfg.bins;
        sim.realizations = cfg.realizations;
        sim.seed = cfg.seed + gi; // decorrelate sweep entries
        sim.checkpoints = 10;
        sim.parallel = cfg.parallel;

        const double cap = max_noise_halfwidth(sim.d, gamma);
        if (cap > 0.0 && cap < 1e-12) {
            row.skipped = true;
            out.log.push_back("gamma=" + std::to_string(gamma) +
                              ": noise support collapsed, entry skipped");
            out.rows.push_back(row);
            continue;
        }

        const SimResult mc = simulate(sim);
        row.effective_lambda = mc.effective_lambda;
        row.noise_clipped = mc.noise_clipped;
        if (mc.noise_clipped)
            out.log.push_back("gamma=" + std::to_string(gamma) +
                              ": noise support clipped to the admissible halfwidth, "
                              "effective lambda = " + std::to_string(mc.effective_lambda));
        row.rejected_fraction = mc.pooled.back().rejected_fraction;

        // long-time profile of the limiting equation on the histogram grid
        const FPEquationSpec fp = FPEquationSpec::full_fp(limit_diffusion(cfg.d),
                                                          row.effective_lambda);
        const FPResult fps = fp_solve(fp, initial_grid(cfg.init, cfg.bins), 60.0, 1.0);
        row.l1_to_fp = l1_distance(mc.pooled_hist, fps.grid);
        row.w1_to_fp = wasserstein1_distance(mc.pooled_hist, fps.grid);

        DensityGrid closed;
        if (have_closed_form) {
            const StationaryDensity gs(
                StationarySpec(limit_steady_d(cfg.d), m0, row.effective_lambda));
            closed = gs.tabulate(cfg.bins);
            row.l1_to_closed_form = l1_distance(mc.pooled_hist, closed);
        } else {
            row.l1_to_closed_form = std::numeric_limits<double>::quiet_NaN();
        }

        const DensityGrid& ref = have_closed_form ? closed : fps.grid;
        row.metric_to_closed_form = grid_distance(mc.pooled_hist, ref, cfg.metric);
        row.bootstrap_se = bootstrap_distance_se(mc.replica_hist, ref, cfg.metric,
                                                 cfg.bootstrap_resamples, cfg.seed + 977 + gi);

        // stationarity: consecutive checkpoint histograms within twice the
        // bootstrap noise floor of the pooled estimate
        if (mc.checkpoint_hist.size() >= 2) {
            const double floor =
                bootstrap_noise_floor(mc.replica_hist, mc.pooled_hist, cfg.metric,
                                      cfg.bootstrap_resamples, cfg.seed + 431 + gi);
            const auto& chk = mc.checkpoint_hist;
            const double last_move =
                grid_distance(chk[chk.size() - 1], chk[chk.size() - 2], cfg.metric);
            row.stationary_reached = last_move < 2.0 * std::max(floor, 1e-12);
        }

        if (cfg.timing) {
            row.runtime_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        out.rows.push_back(row);
    }

    // monotone verdict on the chosen metric, skipped entries excluded
    out.monotone_within_se = true;
    const SweepRow* prev = nullptr;
    for (const auto& row : out.rows) {
        if (row.skipped || !std::isfinite(row.metric_to_closed_form)) continue;
        if (prev) {
            const double slack = std::max(prev->bootstrap_se, row.bootstrap_se);
            if (row.metric_to_closed_form > prev->metric_to_closed_form + slack)
                out.monotone_within_se = false;
        }
        prev = &row;
    }
    return out;
}

DominanceProbe dominance_probe(double gamma, double alpha, const DiffusionFunction& d,
                               const CompromiseFunction& p, int n, double tau_compare,
                               std::uint64_t seed) {
    DominanceProbe out;
    out.alpha = alpha;
    const double sigma2 = std::pow(gamma, alpha);

    SimConfig sim;
    sim.n = n;
    sim.params = KineticParams(gamma, sigma2);
    sim.p = p;
    sim.d = d;
    sim.noise = NoiseModel::uniform_symmetric(std::sqrt(3.0 * sigma2));
    sim.init = InitSpec::box(0.2, 0.5);
    sim.t_end = std::ceil(tau_compare / std::pow(gamma, std::min(alpha, 1.0)));
    sim.record_every = sim.t_end;
    sim.histogram_bins = 50;
    sim.realizations = 4;
    sim.seed = seed;
    const SimResult mc = simulate(sim);

    const double lam_eff = std::max(mc.effective_lambda, 1e-6);
    const FPControl ctl;
    const FPResult diff = fp_solve(FPEquationSpec::pure_diffusion(limit_diffusion(d), lam_eff),
                                   initial_grid(sim.init, 50), tau_compare, tau_compare, ctl, 0.0);
    const FPResult drift = fp_solve(FPEquationSpec::pure_drift(p),
                                    initial_grid(sim.init, 50), tau_compare, tau_compare, ctl, 0.0);
    out.dist_to_diffusion = l1_distance(mc.pooled_hist, diff.grid);
    out.dist_to_drift = l1_distance(mc.pooled_hist, drift.grid);
    out.diffusion_closer = out.dist_to_diffusion < out.dist_to_drift;
    return out;
}

} // namespace opkin
