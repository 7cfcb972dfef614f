#include "opkin/kinetic.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace opkin {

void SimConfig::validate() const {
    if (n < 2) throw std::invalid_argument("n: ensemble needs at least 2 agents");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end: must be positive");
    if (!(record_every > 0.0)) throw std::invalid_argument("record_every: must be positive");
    if (histogram_bins < 2) throw std::invalid_argument("histogram_bins: must be >= 2");
    if (realizations < 1) throw std::invalid_argument("realizations: must be >= 1");
    if (checkpoints < 0) throw std::invalid_argument("checkpoints: must be >= 0");
    // KineticParams and the function families validate themselves on construction
}

StepStats mc_step(Ensemble& e, const SimConfig& cfg, Philox& rng) {
    const int n = static_cast<int>(e.w.size());
    thread_local std::vector<std::uint32_t> idx;
    idx.resize(n);
    for (int i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
    for (int i = n - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.bounded(static_cast<std::uint32_t>(i) + 1)]);

    StepStats stats;
    const double gamma = cfg.params.gamma;
    double* w = e.w.data();
    for (int k = 0; k + 1 < n; k += 2) {
        const std::uint32_t i = idx[k];
        const std::uint32_t j = idx[k + 1];
        const double eta = cfg.noise.sample(rng);
        const double eta_star = cfg.noise.sample(rng);
        const auto [wi, wj] = interact(w[i], w[j], gamma, cfg.p, cfg.d, eta, eta_star);
        ++stats.proposed;
        if (is_admissible(wi, wj)) {
            w[i] = wi;
            w[j] = wj;
        } else {
            ++stats.rejected; // the pair keeps its opinions
        }
    }
    e.time += 1.0;
#ifndef NDEBUG
    for (int i = 0; i < n; ++i) assert(w[i] >= -1.0 && w[i] <= 1.0);
#endif
    return stats;
}

DensityGrid estimate_density(std::span<const double> w, int bins) {
    if (bins < 2) throw std::invalid_argument("histogram needs at least 2 bins");
    DensityGrid g = DensityGrid::zeros(bins);
    const double inv_h = bins / 2.0;
    std::vector<std::int64_t> count(bins, 0);
    for (double x : w) {
        int i = static_cast<int>((x + 1.0) * inv_h); // edge samples fall right
        if (i >= bins) i = bins - 1;                 // w = 1 into the last cell
        if (i < 0) i = 0;
        ++count[i];
    }
    const double norm = inv_h / static_cast<double>(w.size());
    for (int i = 0; i < bins; ++i) g.value[i] = count[i] * norm;
    return g;
}

namespace {

MomentRecord ensemble_moments(const Ensemble& e, double rejected_fraction) {
    MomentRecord r;
    r.t = e.time;
    const int n = static_cast<int>(e.w.size());
    double s = 0.0;
    for (double x : e.w) s += x;
    r.mean = s / n;
    // centered second pass keeps C_f accurate when the spread is tiny
    double q = 0.0;
    for (double x : e.w) {
        const double d = x - r.mean;
        q += d * d;
    }
    r.c_f = q / n;
    r.second_moment = r.c_f + r.mean * r.mean;
    r.rejected_fraction = rejected_fraction;
    return r;
}

struct ReplicaOutput {
    MomentSeries series;
    DensityGrid final_hist;
    std::vector<DensityGrid> checkpoint_hist;
};

ReplicaOutput run_replica(const SimConfig& cfg, int replica) {
    Philox rng(cfg.seed, static_cast<std::uint32_t>(replica));
    Ensemble e;
    e.w.resize(cfg.n);
    for (int i = 0; i < cfg.n; ++i) e.w[i] = cfg.init.sample(rng);

    ReplicaOutput out;
    out.series.push_back(ensemble_moments(e, 0.0));

    const long long total_sweeps = static_cast<long long>(std::ceil(cfg.t_end - 1e-12));
    double next_record = cfg.record_every;
    int next_checkpoint = 1;
    StepStats window; // since the previous record
    for (long long s = 0; s < total_sweeps; ++s) {
        const StepStats st = mc_step(e, cfg, rng);
        window.proposed += st.proposed;
        window.rejected += st.rejected;
        if (e.time >= next_record - 1e-9) {
            const double rf = window.proposed > 0
                                  ? static_cast<double>(window.rejected) / window.proposed
                                  : 0.0;
            out.series.push_back(ensemble_moments(e, rf));
            window = {};
            next_record += cfg.record_every;
        }
        if (cfg.checkpoints > 0 &&
            e.time >= next_checkpoint * cfg.t_end / cfg.checkpoints - 1e-9) {
            out.checkpoint_hist.push_back(estimate_density(e.w, cfg.histogram_bins));
            out.checkpoint_hist.back().time = e.time;
            ++next_checkpoint;
        }
    }
    out.final_hist = estimate_density(e.w, cfg.histogram_bins);
    out.final_hist.time = e.time;
    return out;
}

} // namespace

SimResult simulate(const SimConfig& cfg_in) {
    cfg_in.validate();
    SimConfig cfg = cfg_in;

    // Enforce guaranteed admissibility where the diffusion variant provides a
    // bound; a clipped support changes the effective lambda, which is
    // reported back to the caller.
    const double cap = max_noise_halfwidth(cfg.d, cfg.params.gamma);
    if (cap > 0.0 && cfg.noise.support_halfwidth() > cap) {
        cfg.noise = cfg.noise.clipped_to(cap);
        // keep the declared params in sync with what actually runs
    }
    SimResult out;
    out.noise_clipped = cfg.noise.support_halfwidth() < cfg_in.noise.support_halfwidth();
    out.effective_lambda = cfg.noise.realized_variance() / cfg.params.gamma;

    std::vector<ReplicaOutput> replicas(cfg.realizations);
    if (cfg.parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < cfg.realizations; ++r) replicas[r] = run_replica(cfg, r);
    } else {
        for (int r = 0; r < cfg.realizations; ++r) replicas[r] = run_replica(cfg, r);
    }

    // merge in replica order so the result is independent of scheduling
    const int rcount = cfg.realizations;
    out.per_replica.reserve(rcount);
    out.replica_hist.reserve(rcount);
    for (auto& rep : replicas) {
        out.per_replica.push_back(std::move(rep.series));
        out.replica_hist.push_back(std::move(rep.final_hist));
    }

    const std::size_t records = out.per_replica.front().size();
    for (const auto& s : out.per_replica)
        if (s.size() != records)
            throw std::runtime_error("replica record counts disagree");
    out.pooled.resize(records);
    for (std::size_t k = 0; k < records; ++k) {
        MomentRecord pooled;
        pooled.t = out.per_replica.front()[k].t;
        for (const auto& s : out.per_replica) {
            pooled.mean += s[k].mean;
            pooled.second_moment += s[k].second_moment;
            pooled.rejected_fraction += s[k].rejected_fraction;
        }
        pooled.mean /= rcount;
        pooled.second_moment /= rcount;
        pooled.rejected_fraction /= rcount;
        pooled.c_f = pooled.second_moment - pooled.mean * pooled.mean;
        out.pooled[k] = pooled;
    }

    const auto pool_hists = [&](auto&& get) {
        DensityGrid pooled = DensityGrid::zeros(cfg.histogram_bins);
        for (int r = 0; r < rcount; ++r) {
            const DensityGrid& g = get(r);
            for (int i = 0; i < pooled.cells(); ++i) pooled.value[i] += g.value[i];
        }
        for (double& v : pooled.value) v /= rcount;
        return pooled;
    };
    out.pooled_hist = pool_hists([&](int r) -> const DensityGrid& { return out.replica_hist[r]; });
    out.pooled_hist.time = out.replica_hist.front().time;

    if (cfg.checkpoints > 0) {
        const std::size_t nchk = replicas.front().checkpoint_hist.size();
        for (std::size_t c = 0; c < nchk; ++c) {
            out.checkpoint_hist.push_back(
                pool_hists([&](int r) -> const DensityGrid& { return replicas[r].checkpoint_hist[c]; }));
            out.checkpoint_hist.back().time = replicas.front().checkpoint_hist[c].time;
        }
    }
    return out;
}

double sweep_contraction_factor(double gamma, int n) {
    if (!(gamma > 0.0 && gamma < 0.5)) throw std::domain_error("gamma must lie in (0, 1/2)");
    if (n < 2) throw std::domain_error("n must be >= 2");
    return 1.0 - 2.0 * gamma * (1.0 - gamma) * n / (n - 1.0);
}

RateCheck moment_law_check(const MomentSeries& series, const SimConfig& cfg) {
    if (cfg.p.kind() != CompromiseFunction::Kind::Constant)
        throw std::invalid_argument("rate check requires a constant compromise function");

    std::vector<double> t, y;
    for (const auto& r : series) {
        if (r.c_f > 1e-300) {
            t.push_back(r.t);
            y.push_back(std::log(r.c_f));
        }
    }
    if (t.size() < 10)
        throw std::invalid_argument("series too short: need at least 10 usable records");

    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        tm += t[i];
        ym += y[i];
    }
    tm /= t.size();
    ym /= t.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        sxy += (t[i] - tm) * (y[i] - ym);
        sxx += (t[i] - tm) * (t[i] - tm);
    }

    RateCheck out;
    out.fitted_rate = -sxy / sxx;
    out.theoretical_rate = -std::log(sweep_contraction_factor(cfg.params.gamma, cfg.n));
    out.continuum_rate = 2.0 * cfg.params.gamma * (1.0 - cfg.params.gamma);
    out.relative_deviation =
        std::abs(out.fitted_rate - out.theoretical_rate) / out.theoretical_rate;
    return out;
}

} // namespace opkin
