// Times the parallel kernels against their serial reference and checks that
// both produce bit-identical results.
#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "opkin/fokker_planck.hpp"
#include "opkin/kinetic.hpp"

using namespace opkin;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void bench_mc() {
    SimConfig cfg;
    cfg.n = 100000;
    cfg.params = KineticParams::from_lambda(0.05, 0.5);
    cfg.p = CompromiseFunction::constant();
    cfg.d = DiffusionFunction::one_minus_w2();
    cfg.noise = NoiseModel::uniform_symmetric(std::sqrt(3.0 * cfg.params.sigma2));
    cfg.init = InitSpec::uniform();
    cfg.t_end = 40.0;
    cfg.record_every = 10.0;
    cfg.histogram_bins = 100;
    cfg.realizations = 8;
    cfg.seed = 7;

    cfg.parallel = false;
    double t0 = now_seconds();
    const SimResult serial = simulate(cfg);
    const double t_serial = now_seconds() - t0;

    cfg.parallel = true;
    t0 = now_seconds();
    const SimResult parallel = simulate(cfg);
    const double t_parallel = now_seconds() - t0;

    const bool identical =
        std::memcmp(serial.pooled_hist.value.data(), parallel.pooled_hist.value.data(),
                    sizeof(double) * serial.pooled_hist.value.size()) == 0 &&
        serial.pooled.back().second_moment == parallel.pooled.back().second_moment;

    const double pairs = cfg.n / 2.0 * cfg.t_end * cfg.realizations;
    std::printf("exchange Monte Carlo  %8.0f kpairs  serial %6.2fs (%5.1f ns/pair)  "
                "parallel %6.2fs  speedup %.2fx  identical %s\n",
                pairs / 1e3, t_serial, t_serial / pairs * 1e9, t_parallel,
                t_serial / t_parallel, identical ? "yes" : "NO");
}

void bench_fp() {
    const auto spec = FPEquationSpec::full_fp(DiffusionFunction::one_minus_w2(), 0.5);
    const int k = 1600;
    const int steps = 20000;

    const auto run = [&](bool parallel) {
        FPControl ctl;
        ctl.parallel = parallel;
        DensityGrid g = initial_grid(InitSpec::box(0.2, 0.4), k);
        FPStepper stepper(spec, k, ctl);
        const double t0 = now_seconds();
        for (int s = 0; s < steps; ++s) {
            const double m = stepper.mean_if_tracked(g);
            stepper.step(g, stepper.stable_dtau(g, m), m);
        }
        return std::pair<double, DensityGrid>(now_seconds() - t0, std::move(g));
    };

    const auto [t_serial, g_serial] = run(false);
    const auto [t_parallel, g_parallel] = run(true);
    const bool identical = std::memcmp(g_serial.value.data(), g_parallel.value.data(),
                                       sizeof(double) * g_serial.value.size()) == 0;
    const double updates = static_cast<double>(k) * steps;
    std::printf("drift-diffusion solve %8.0f kcells  serial %6.2fs (%5.1f ns/cell)  "
                "parallel %6.2fs  speedup %.2fx  identical %s\n",
                updates / 1e3, t_serial, t_serial / updates * 1e9, t_parallel,
                t_serial / t_parallel, identical ? "yes" : "NO");
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not available; both paths run serially\n");
#endif
    bench_mc();
    bench_fp();
    return 0;
}
