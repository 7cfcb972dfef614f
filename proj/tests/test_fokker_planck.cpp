#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "opkin/fokker_planck.hpp"
#include "opkin/stationary.hpp"

using namespace opkin;

namespace {

// cell averages of the polynomial test density (15/16)(1-w^2)^2 via its
// antiderivative (15/16)(w - 2w^3/3 + w^5/5)
double poly_density_antideriv(double w) {
    return 15.0 / 16.0 * (w - 2.0 * w * w * w / 3.0 + std::pow(w, 5) / 5.0);
}

DensityGrid poly_density_grid(int k) {
    DensityGrid g = DensityGrid::zeros(k);
    const double h = g.h();
    for (int i = 0; i < k; ++i) {
        const double lo = -1.0 + i * h;
        g.value[i] = (poly_density_antideriv(lo + h) - poly_density_antideriv(lo)) / h;
    }
    return g;
}

} // namespace

TEST_CASE("mass is conserved to machine precision by every variant") {
    const auto specs = {
        FPEquationSpec::full_fp(DiffusionFunction::one_minus_w2(), 0.5),
        FPEquationSpec::general_p(DiffusionFunction::one_minus_abs(), 1.0,
                                  CompromiseFunction::one_minus_w2()),
        FPEquationSpec::pure_diffusion(DiffusionFunction::sqrt_one_minus_w2(), 2.0),
        FPEquationSpec::pure_drift(CompromiseFunction::one_minus_w2()),
        FPEquationSpec::sznajd_drift(),
    };
    for (const auto& spec : specs) {
        DensityGrid g = initial_grid(InitSpec::box(0.1, 0.6), 128);
        const double m0 = g.mass();
        for (int s = 0; s < 200; ++s) fp_step(g, spec, stable_dtau(g, spec));
        CHECK(g.mass() == doctest::Approx(m0).epsilon(1e-12));
        for (double v : g.value) CHECK(v >= 0.0);
    }
}

TEST_CASE("uniform density is an exact fixed point of the balanced square-root equation") {
    const auto spec = FPEquationSpec::full_fp(DiffusionFunction::sqrt_one_minus_w2(), 1.0);
    DensityGrid g = DensityGrid::uniform(256);
    const double dtau = stable_dtau(g, spec);
    for (int s = 0; s < 50; ++s) {
        const DensityGrid before = g;
        fp_step(g, spec, dtau);
        double linf = 0.0;
        for (int i = 0; i < g.cells(); ++i)
            linf = std::max(linf, std::abs(g.value[i] - before.value[i]));
        CHECK(linf <= 1e-8 * dtau);
    }
}

TEST_CASE("one-step update is consistent with the equation to second order in space") {
    // d(g)/dtau = (lambda/2) d2/dw2 [(1-w^2) g] + d/dw [(w - m) g] applied to
    // the polynomial density with m = 0:
    //   (15/16) [ (lambda/2)(-6 + 36 w^2 - 30 w^4) + (1 - 6 w^2 + 5 w^4) ]
    // whose antiderivative gives exact cell averages of the right-hand side.
    const double lambda = 0.7;
    const auto spec = FPEquationSpec::full_fp(DiffusionFunction::sqrt_one_minus_w2(), lambda);
    const auto rhs_antideriv = [lambda](double w) {
        const double diff = 0.5 * lambda * (-6.0 * w + 12.0 * std::pow(w, 3) - 6.0 * std::pow(w, 5));
        const double drift = w - 2.0 * std::pow(w, 3) + std::pow(w, 5);
        return 15.0 / 16.0 * (diff + drift);
    };
    const auto interior_error = [&](int k) {
        DensityGrid g = poly_density_grid(k);
        const DensityGrid before = g;
        const double dtau = 1e-7;
        fp_step(g, spec, dtau);
        const double h = g.h();
        double err = 0.0;
        for (int i = k / 10; i < k - k / 10; ++i) {
            const double lo = -1.0 + i * h;
            const double rhs = (rhs_antideriv(lo + h) - rhs_antideriv(lo)) / h;
            err = std::max(err, std::abs((g.value[i] - before.value[i]) / dtau - rhs));
        }
        return err;
    };
    const double e100 = interior_error(100);
    const double e200 = interior_error(200);
    CHECK(e200 < e100 / 3.3); // order >= 2 up to constants
}

TEST_CASE("analytic steady state is a near-fixed point, improving at second order") {
    const StationaryDensity gs{StationarySpec(SteadyD::OneMinusWSquared, 0.2, 0.5)};
    const auto spec = FPEquationSpec::full_fp(DiffusionFunction::one_minus_w2(), 0.5);
    const auto drift_rate = [&](int k) {
        DensityGrid g = gs.tabulate(k);
        const DensityGrid before = g;
        const double dtau = stable_dtau(g, spec);
        fp_step(g, spec, dtau);
        double l1 = 0.0;
        for (int i = k / 10; i < k - k / 10; ++i)
            l1 += std::abs(g.value[i] - before.value[i]) * g.h();
        return l1 / dtau;
    };
    const double r100 = drift_rate(100);
    const double r200 = drift_rate(200);
    CHECK(r200 < r100 / 3.0);
}

TEST_CASE("constant compromise goes through the same path as the general equation") {
    const auto full = FPEquationSpec::full_fp(DiffusionFunction::one_minus_w2(), 0.8);
    const auto general = FPEquationSpec::general_p(DiffusionFunction::one_minus_w2(), 0.8,
                                                   CompromiseFunction::constant());
    DensityGrid a = initial_grid(InitSpec::box(0.15, 0.5), 200);
    DensityGrid b = a;
    for (int s = 0; s < 100; ++s) {
        const double dt = std::min(stable_dtau(a, full), stable_dtau(b, general));
        fp_step(a, full, dt);
        fp_step(b, general, dt);
    }
    for (int i = 0; i < a.cells(); ++i) CHECK(a.value[i] == b.value[i]); // bit-identical
}

TEST_CASE("upwind flux option also conserves and stays stable, at lower order") {
    FPControl ctl;
    ctl.scheme = FluxScheme::Upwind;
    const auto spec = FPEquationSpec::full_fp(DiffusionFunction::one_minus_w2(), 0.5);
    DensityGrid g = initial_grid(InitSpec::box(0.0, 0.8), 128);
    for (int s = 0; s < 300; ++s) fp_step(g, spec, stable_dtau(g, spec), ctl);
    CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : g.value) CHECK(v >= 0.0);
}

TEST_CASE("time step above the stability bound is rejected") {
    const auto spec = FPEquationSpec::full_fp(DiffusionFunction::one_minus_w2(), 0.5);
    DensityGrid g = DensityGrid::uniform(64);
    CHECK_THROWS_AS(fp_step(g, spec, 10.0 * stable_dtau(g, spec)), std::runtime_error);
    CHECK_THROWS_AS(fp_step(g, spec, -1.0), std::invalid_argument);
    DensityGrid tiny = DensityGrid::uniform(2);
    CHECK_THROWS_AS(fp_step(tiny, spec, 1e-9), std::invalid_argument);
}

TEST_CASE("long-time solution matches the closed-form steady state") {
    const double lambda = 0.5;
    const auto spec = FPEquationSpec::full_fp(DiffusionFunction::one_minus_w2(), lambda);
    const int k = 100;
    // box with edges on cell boundaries so the discrete mean is exactly 0.2
    const FPResult r = fp_solve(spec, initial_grid(InitSpec::box(0.2, 0.4), k), 30.0, 1.0);
    const StationaryDensity gs{StationarySpec(SteadyD::OneMinusWSquared, 0.2, lambda)};
    const DensityGrid ref = gs.tabulate(k);
    // exclude the outermost cells, where the density is essentially zero
    double l1 = 0.0;
    for (int i = 2; i < k - 2; ++i) l1 += std::abs(r.grid.value[i] - ref.value[i]) * r.grid.h();
    CHECK(l1 < 0.02); // h^2-limited at this coarse resolution
    // the mean creeps only at the discretization level during the transient
    CHECK(r.grid.mean() == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("closed moment system: stationary point, relaxation rate, invariant region") {
    // dM2/dtau = lambda (1 - M2) - 2 (M2 - m0^2) has the fixed point
    // (lambda + 2 m0^2)/(lambda + 2) and relaxes at rate lambda + 2
    const double lambda = 0.8, m0 = 0.2;
    const double m2_inf = (lambda + 2.0 * m0 * m0) / (lambda + 2.0);

    const auto fixed = closed_moment_odes(lambda, m0, m2_inf, 2.0, 0.1);
    for (double v : fixed.m2) CHECK(v == doctest::Approx(m2_inf).epsilon(1e-12));

    const double m2_0 = 0.9;
    const auto traj = closed_moment_odes(lambda, m0, m2_0, 3.0, 0.05);
    for (std::size_t i = 0; i < traj.tau.size(); ++i) {
        const double expected = m2_inf + (m2_0 - m2_inf) * std::exp(-(lambda + 2.0) * traj.tau[i]);
        CHECK(traj.m2[i] == doctest::Approx(expected).epsilon(1e-9));
        CHECK(traj.m[i] == m0);
        CHECK(traj.m2[i] >= m0 * m0);
    }

    // small lambda: relaxation toward m0^2 at rate approaching 2
    const auto small = closed_moment_odes(1e-9, 0.0, 0.5, 1.0, 1.0);
    CHECK(small.m2.back() == doctest::Approx(0.5 * std::exp(-2.0)).epsilon(1e-6));

    CHECK_THROWS_AS(closed_moment_odes(1.0, 0.5, 0.1, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(closed_moment_odes(1.0, 0.0, 1.5, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(closed_moment_odes(0.0, 0.0, 0.5, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("solver second moment tracks the closed moment system") {
    // lambda <= 1 - |m| keeps the steady state bounded at the endpoints, so
    // the spatial moment error stays at the clean h^2 level
    const double lambda = 0.5;
    const auto spec = FPEquationSpec::full_fp(DiffusionFunction::sqrt_one_minus_w2(), lambda);
    const StationaryDensity init{StationarySpec(SteadyD::SqrtOneMinusWSquared, 0.2, 0.25)};
    DensityGrid g0 = init.tabulate(200);
    const double m0 = g0.mean(), m2_0 = g0.second_moment();
    const FPResult pde = fp_solve(spec, std::move(g0), 2.0, 0.1, FPControl{}, 0.0);
    const auto ode = closed_moment_odes(lambda, m0, m2_0, 2.0, 0.1);
    REQUIRE(pde.series.size() >= 20);
    for (std::size_t i = 0; i < std::min(pde.series.size(), ode.tau.size()); ++i) {
        CHECK(pde.series[i].t == doctest::Approx(ode.tau[i]).epsilon(1e-9));
        CHECK(pde.series[i].second_moment == doctest::Approx(ode.m2[i]).epsilon(1e-3));
    }
}

TEST_CASE("mean evolution functional of the general equation") {
    // constant compromise: exactly zero
    const DensityGrid g = initial_grid(InitSpec::box(0.3, 0.5), 400);
    CHECK(mean_evolution_general_p(g, CompromiseFunction::constant()) ==
          doctest::Approx(0.0).epsilon(1e-13));
    // symmetric state, odd integrand: zero
    const DensityGrid sym = initial_grid(InitSpec::box(0.0, 0.7), 400);
    CHECK(mean_evolution_general_p(sym, CompromiseFunction::one_minus_w2()) ==
          doctest::Approx(0.0).epsilon(1e-13));
    // a point mass is stationary for the mean law: m P(m) - m P(m) = 0
    const DensityGrid pt = initial_grid(InitSpec::point(0.5), 400);
    CHECK(std::abs(mean_evolution_general_p(pt, CompromiseFunction::one_minus_w2())) < 1e-3);
}

TEST_CASE("symmetric data stays symmetric under the cubic comparison drift") {
    const auto spec = FPEquationSpec::sznajd_drift();
    const FPResult r = fp_solve(spec, initial_grid(InitSpec::box(0.0, 0.6), 200), 1.0, 0.1);
    for (const auto& rec : r.series) CHECK(std::abs(rec.mean) < 1e-10);
    CHECK(r.grid.mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("drift-only transport contracts toward the mean along characteristics") {
    // dw/dtau = -(1 - w^2)(w - m); for a box around m = 0.3 the edges drift
    // inward, and the edge trajectory integrates independently with RK4
    const auto p = CompromiseFunction::one_minus_w2();
    const auto spec = FPEquationSpec::pure_drift(p);
    const double tau_end = 0.8;
    const FPResult r = fp_solve(spec, initial_grid(InitSpec::box(0.3, 0.4), 400), tau_end, 0.1,
                                FPControl{}, 0.0);
    CHECK(r.grid.mass() == doctest::Approx(1.0).epsilon(1e-12));

    const double m = 0.3; // point masses leave the mean law stationary, and the
                          // box is near-symmetric, so m barely moves
    const auto velocity = [&](double w) { return -(1.0 - w * w) * (w - m); };
    const auto advect = [&](double w0) {
        double w = w0;
        const int steps = 400;
        const double dt = tau_end / steps;
        for (int i = 0; i < steps; ++i) {
            const double k1 = velocity(w);
            const double k2 = velocity(w + 0.5 * dt * k1);
            const double k3 = velocity(w + 0.5 * dt * k2);
            const double k4 = velocity(w + dt * k3);
            w += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return w;
    };
    const double left_expect = advect(-0.1);
    const double right_expect = advect(0.7);
    CHECK(left_expect > -0.1);
    CHECK(right_expect < 0.7);

    // locate the support edges of the solved profile (1% of peak threshold)
    double peak = 0.0;
    for (double v : r.grid.value) peak = std::max(peak, v);
    int lo = 0, hi = r.grid.cells() - 1;
    while (r.grid.value[lo] < 0.01 * peak) ++lo;
    while (r.grid.value[hi] < 0.01 * peak) --hi;
    const double left_edge = r.grid.center(lo);
    const double right_edge = r.grid.center(hi);
    // first-order transport smears edges by a few cells
    CHECK(left_edge == doctest::Approx(left_expect).epsilon(0.12));
    CHECK(right_edge == doctest::Approx(right_expect).epsilon(0.12));
    // variance shrinks as the support contracts
    CHECK(r.series.back().c_f < r.series.front().c_f);
}

TEST_CASE("diffusion-only equation: mass conserved, moments reported not pinned") {
    const auto spec = FPEquationSpec::pure_diffusion(DiffusionFunction::sqrt_one_minus_w2(), 2.0);
    const FPResult r = fp_solve(spec, initial_grid(InitSpec::box(0.3, 0.3), 200), 0.5, 0.05);
    CHECK(r.grid.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.series.size() >= 10);
}

TEST_CASE("stationary early stop reports the profile change rate") {
    const auto spec = FPEquationSpec::full_fp(DiffusionFunction::sqrt_one_minus_w2(), 1.0);
    const FPResult r = fp_solve(spec, DensityGrid::uniform(128), 100.0, 1.0);
    CHECK(r.stationary_reached);
    CHECK(r.grid.time < 5.0); // the fixed point triggers the stop immediately
    CHECK(r.profile_change_rate < 1e-9);
}
