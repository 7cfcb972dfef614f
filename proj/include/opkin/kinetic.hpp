#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "opkin/grid.hpp"
#include "opkin/model.hpp"

namespace opkin {

struct Ensemble {
    std::vector<double> w;
    double time = 0.0; // kinetic time, one unit = one sweep
};

struct SimConfig {
    int n = 1000;
    KineticParams params{0.1, 0.0};
    CompromiseFunction p = CompromiseFunction::constant();
    DiffusionFunction d = DiffusionFunction::one_minus_w2();
    NoiseModel noise = NoiseModel::uniform_symmetric(0.0);
    InitSpec init;
    double t_end = 100.0;
    double record_every = 1.0;
    int histogram_bins = 100;
    int realizations = 1;
    std::uint64_t seed = 12345;
    int checkpoints = 0;   // per-replica histogram snapshots, 0 = none
    bool parallel = true;  // replicas over OpenMP; results identical either way

    void validate() const; // throws std::invalid_argument naming the offending field
};

struct StepStats {
    std::int64_t proposed = 0;
    std::int64_t rejected = 0;
};

// One sweep: n/2 disjoint uniformly random pairs, each pair samples its noise
// and interacts; inadmissible proposals leave both participants unchanged.
// Advances time by exactly 1.
StepStats mc_step(Ensemble& e, const SimConfig& cfg, Philox& rng);

// Histogram on uniform bins over [-1, 1], normalized to unit mass. Samples on
// an interior cell edge go to the right cell; w = 1 goes to the last cell.
DensityGrid estimate_density(std::span<const double> w, int bins);

struct SimResult {
    MomentSeries pooled;                        // replica-averaged records
    std::vector<MomentSeries> per_replica;
    std::vector<DensityGrid> replica_hist;      // final histogram per replica
    DensityGrid pooled_hist;
    std::vector<DensityGrid> checkpoint_hist;   // pooled, one per checkpoint
    bool noise_clipped = false;
    double effective_lambda = 0.0;              // realized noise variance / gamma
};

// Runs `realizations` independent replicas on decorrelated streams derived
// from (seed, replica index); deterministic for a given seed regardless of
// thread count.
SimResult simulate(const SimConfig& cfg);

struct RateCheck {
    double fitted_rate = 0.0;       // least-squares slope of -ln C_f over t
    double theoretical_rate = 0.0;  // -ln(1 - 2 gamma (1-gamma) n/(n-1))
    double continuum_rate = 0.0;        // 2 gamma (1-gamma), the continuum coefficient
    double relative_deviation = 0.0;
};

// Per-sweep contraction of C_f in expectation for sigma = 0, P = 1:
// E[C_f(t+1)] = (1 - 2 gamma (1-gamma) n/(n-1)) C_f(t).
double sweep_contraction_factor(double gamma, int n);

// Fits the exponential decay rate of C_f from a P = Constant run and compares
// it with the rate re-derived from the exchange rule. Needs >= 10 usable
// records.
RateCheck moment_law_check(const MomentSeries& series, const SimConfig& cfg);

} // namespace opkin
