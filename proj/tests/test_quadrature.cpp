#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "opkin/quadrature.hpp"

using namespace opkin;

TEST_CASE("tanh-sinh on smooth integrands") {
    const auto poly = [](double x) { return 3.0 * x * x; };
    CHECK(tanh_sinh(poly, 0.0, 1.0).value == doctest::Approx(1.0).epsilon(1e-13));
    const auto expf = [](double x) { return std::exp(x); };
    CHECK(tanh_sinh(expf, -1.0, 1.0).value ==
          doctest::Approx(std::exp(1.0) - std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("tanh-sinh resolves integrable endpoint singularities") {
    // 1/sqrt(1-x^2) integrates to pi; direct evaluation is representable down
    // to one ulp from the endpoint, good to ~1e-8 for this strength
    const auto f = [](double x) { return 1.0 / std::sqrt(1.0 - x * x); };
    CHECK(tanh_sinh(f, -1.0, 1.0).value == doctest::Approx(M_PI).epsilon(5e-8));
    // log singularity
    const auto g = [](double x) { return std::log(x); };
    CHECK(tanh_sinh(g, 0.0, 1.0).value == doctest::Approx(-1.0).epsilon(1e-12));
    const auto h = [](double x) { return std::pow(x, -0.5); };
    CHECK(tanh_sinh(h, 0.0, 1.0).value == doctest::Approx(2.0).epsilon(5e-8));
    // a strong singularity handled the way the normalization handles it:
    // substitute x = e^{-t/0.1}; the integral of x^{-0.9} becomes 10 e^{-t}
    const auto mapped = [](double t) { return 10.0 * std::exp(-t); };
    CHECK(tanh_sinh(mapped, 0.0, 45.0).value == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("tanh-sinh and gauss-legendre agree") {
    const auto f = [](double x) { return std::cos(3.0 * x) * std::exp(-x * x); };
    const double a = tanh_sinh(f, -1.0, 1.0).value;
    const double b = gauss_legendre_panels(f, -1.0, 1.0, 12, 16);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("gauss-legendre is exact on low-degree polynomials") {
    const auto f = [](double x) { return x * x * x * x * x * x; }; // degree 6
    CHECK(gauss_legendre_panels(f, -1.0, 1.0, 4, 1) ==
          doctest::Approx(2.0 / 7.0).epsilon(1e-14)); // 4 nodes: exact to degree 7
}

TEST_CASE("ridders derivative") {
    const auto f = [](double x) { return std::sin(2.0 * x); };
    double err = 0.0;
    const double d = ridders_derivative(f, 0.4, 0.1, &err);
    CHECK(d == doctest::Approx(2.0 * std::cos(0.8)).epsilon(1e-10));
    CHECK(err < 1e-8);

    const auto sharp = [](double x) { return std::exp(-30.0 / (1.0 - x)); };
    const double ds = ridders_derivative(sharp, 0.6, 0.05);
    const double expected = sharp(0.6) * 30.0 / (0.16);
    CHECK(ds == doctest::Approx(expected).epsilon(1e-8));
}
