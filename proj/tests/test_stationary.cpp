#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "opkin/quadrature.hpp"
#include "opkin/stationary.hpp"

using namespace opkin;

namespace {

std::vector<double> interior_points(const StationarySpec& s, int n) {
    std::vector<double> pts;
    if (s.d == SteadyD::OneMinusAbs) {
        // keep away from the kink at 0 and the boundary
        for (int i = 0; i < n / 2; ++i) {
            const double w = 0.03 + (0.95 - 0.03) * i / (n / 2 - 1.0);
            pts.push_back(w);
            pts.push_back(-w);
        }
    } else {
        for (int i = 0; i < n; ++i) pts.push_back(-0.95 + 1.9 * i / (n - 1.0));
    }
    return pts;
}

} // namespace

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(StationarySpec(SteadyD::OneMinusAbs, 1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(StationarySpec(SteadyD::OneMinusAbs, 0.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(StationarySpec(SteadyD::OneMinusAbs, 0.0, -1.0), std::domain_error);
}

TEST_CASE("stationary ODE residual vanishes for all closed forms") {
    // the finite-difference residual is the arbiter for the re-derived forms
    for (const auto d : {SteadyD::OneMinusWSquared, SteadyD::OneMinusAbs,
                         SteadyD::SqrtOneMinusWSquared}) {
        for (const double m : {0.0, 0.2}) {
            for (const double lambda : {0.5, 1.0}) {
                const StationarySpec s(d, m, lambda);
                const auto pts = interior_points(s, 100);
                const double r = stationary_ode_residual(s, pts);
                INFO("variant ", static_cast<int>(d), " m ", m, " lambda ", lambda,
                     " residual ", r);
                CHECK(r <= 1e-8);
            }
        }
    }
}

TEST_CASE("square-root diffusion with lambda 1 and centered mean is flat") {
    const StationarySpec s(SteadyD::SqrtOneMinusWSquared, 0.0, 1.0);
    // zero exponents: the un-normalized form is constant, the normalized one is 1/2
    CHECK(unnormalized_density(s, -0.7) == doctest::Approx(unnormalized_density(s, 0.3)));
    const StationaryDensity g(s);
    CHECK(g(0.0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(g(0.9) == doctest::Approx(0.5).epsilon(1e-10));
    // exact cancellation in the flux: (lambda/2) d/dw[(1-w^2)/2] + w/2 = 0
    const double w = 0.37;
    CHECK(0.5 * 1.0 * (-2.0 * w) * 0.5 + w * 0.5 == doctest::Approx(0.0));
}

TEST_CASE("normalization: two independent quadratures agree") {
    for (const auto d : {SteadyD::OneMinusWSquared, SteadyD::OneMinusAbs}) {
        for (const double m : {0.0, 0.2}) {
            for (const double lambda : {0.5, 1.0}) {
                const StationarySpec s(d, m, lambda);
                const double c = normalization_constant(s);
                CHECK(c > 0.0);
                // independent fixed-order route: composite Gauss-Legendre with
                // panels graded toward the endpoints is enough because these
                // densities vanish there with all derivatives
                const auto f = [&](double w) { return unnormalized_density(s, w); };
                const double mass = gauss_legendre_panels(f, -1.0, 0.0, 24, 64) +
                                    gauss_legendre_panels(f, 0.0, 1.0, 24, 64);
                CHECK(c * mass == doctest::Approx(1.0).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("beta-like normalization against the exact beta integral") {
    // for the square-root variant the mass integral is 2^{a+b-1} B(a, b) with
    // a = (1+m)/lambda, b = (1-m)/lambda
    for (const double m : {0.0, 0.2, -0.4}) {
        for (const double lambda : {0.5, 1.0, 2.5}) {
            const StationarySpec s(SteadyD::SqrtOneMinusWSquared, m, lambda);
            const double a = (1.0 + m) / lambda, b = (1.0 - m) / lambda;
            const double log_mass = (a + b - 1.0) * std::log(2.0) + std::lgamma(a) +
                                    std::lgamma(b) - std::lgamma(a + b);
            CHECK(normalization_constant(s) ==
                  doctest::Approx(std::exp(-log_mass)).epsilon(1e-9));
        }
    }
}

TEST_CASE("moments of the beta-like steady state") {
    // mean m and second moment (lambda + 2 m^2)/(lambda + 2): the same values
    // solve the closed moment system, so two routes must agree
    for (const double m : {0.0, 0.2}) {
        for (const double lambda : {0.5, 1.0}) {
            const StationaryDensity g{StationarySpec(SteadyD::SqrtOneMinusWSquared, m, lambda)};
            CHECK(g.mean() == doctest::Approx(m).epsilon(1e-6));
            CHECK(g.second_moment() ==
                  doctest::Approx((lambda + 2.0 * m * m) / (lambda + 2.0)).epsilon(1e-6));
        }
    }
}

TEST_CASE("symmetry for centered mean") {
    for (const auto d : {SteadyD::OneMinusWSquared, SteadyD::OneMinusAbs,
                         SteadyD::SqrtOneMinusWSquared}) {
        const StationarySpec s(d, 0.0, 0.7);
        for (const double w : {0.1, 0.33, 0.62, 0.9})
            CHECK(unnormalized_density(s, w) ==
                  doctest::Approx(unnormalized_density(s, -w)).epsilon(1e-13));
    }
}

TEST_CASE("kinked diffusion: jump at zero appears exactly when the mean is off-center") {
    const double lambda = 0.5;
    const StationarySpec off(SteadyD::OneMinusAbs, 0.2, lambda);
    const double left = unnormalized_density(off, -1e-13);
    const double right = unnormalized_density(off, 1e-13);
    // one-sided limits differ by exp(4 m / lambda)
    CHECK(right / left == doctest::Approx(std::exp(4.0 * 0.2 / lambda)).epsilon(1e-6));

    const StationarySpec centered(SteadyD::OneMinusAbs, 0.0, lambda);
    CHECK(unnormalized_density(centered, -1e-13) ==
          doctest::Approx(unnormalized_density(centered, 1e-13)).epsilon(1e-10));
}

TEST_CASE("vanishing at the boundary where the exponential dominates") {
    const StationarySpec s(SteadyD::OneMinusWSquared, 0.0, 0.5);
    CHECK(unnormalized_density(s, 0.999999) < 1e-200);
    CHECK(unnormalized_density(s, -0.999999) < 1e-200);
    CHECK(unnormalized_density(s, 1.0) == 0.0);
    CHECK(unnormalized_density(s, -1.5) == 0.0);
    const StationarySpec sq(SteadyD::SqrtOneMinusWSquared, 0.0, 1.0);
    CHECK_THROWS_AS(unnormalized_density(sq, 1.0), std::domain_error);
}

TEST_CASE("endpoint behavior report for the square-root variant") {
    // divergence at +1 requires lambda > 1 - m, at -1 requires lambda > 1 + m
    const auto both = endpoint_behavior(StationarySpec(SteadyD::SqrtOneMinusWSquared, 0.0, 2.0));
    CHECK(both.at_plus_one == EndpointTrend::Diverges);
    CHECK(both.at_minus_one == EndpointTrend::Diverges);
    const auto neither =
        endpoint_behavior(StationarySpec(SteadyD::SqrtOneMinusWSquared, 0.0, 0.5));
    CHECK(neither.at_plus_one == EndpointTrend::Vanishes);
    CHECK(neither.at_minus_one == EndpointTrend::Vanishes);
    const auto right_only =
        endpoint_behavior(StationarySpec(SteadyD::SqrtOneMinusWSquared, 0.3, 0.9));
    CHECK(right_only.at_plus_one == EndpointTrend::Diverges); // 0.9 > 1 - 0.3
    CHECK(right_only.at_minus_one == EndpointTrend::Vanishes); // 0.9 < 1 + 0.3
    const auto others = endpoint_behavior(StationarySpec(SteadyD::OneMinusWSquared, 0.0, 5.0));
    CHECK(others.at_plus_one == EndpointTrend::Vanishes);
}

TEST_CASE("peak diagnostic for the smooth quadratic diffusion at centered mean") {
    // d/du [-2 ln u - 1/(lambda u)] = 0 at u = 1/(2 lambda), u = 1 - w^2, so
    // two symmetric peaks at +-sqrt(1 - 1/(2 lambda)) exist exactly when
    // lambda > 1/2; below that the density is single-peaked at 0
    const StationaryDensity two{StationarySpec(SteadyD::OneMinusWSquared, 0.0, 1.0)};
    const auto peaks = two.peaks();
    REQUIRE(peaks.size() == 2);
    const double expected = std::sqrt(1.0 - 1.0 / 2.0);
    CHECK(peaks[0] == doctest::Approx(-expected).epsilon(1e-3));
    CHECK(peaks[1] == doctest::Approx(expected).epsilon(1e-3));

    const StationaryDensity one{StationarySpec(SteadyD::OneMinusWSquared, 0.0, 0.3)};
    const auto central = one.peaks();
    REQUIRE(central.size() == 1);
    CHECK(central[0] == doctest::Approx(0.0).epsilon(1e-3));

    // no interior peaks when the density diverges at the boundary
    const StationaryDensity flat{StationarySpec(SteadyD::SqrtOneMinusWSquared, 0.0, 2.0)};
    CHECK(flat.peaks().empty());
}

TEST_CASE("tabulated cell averages carry unit mass") {
    const StationaryDensity g{StationarySpec(SteadyD::SqrtOneMinusWSquared, 0.2, 0.9)};
    const auto grid = g.tabulate(64);
    CHECK(grid.mass() == doctest::Approx(1.0).epsilon(1e-8));
    const StationaryDensity g2{StationarySpec(SteadyD::OneMinusAbs, 0.2, 0.5)};
    const auto grid2 = g2.tabulate(64);
    CHECK(grid2.mass() == doctest::Approx(1.0).epsilon(1e-8));
}
