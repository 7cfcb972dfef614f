#include "opkin/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "opkin/quadrature.hpp"

namespace opkin {

StationarySpec::StationarySpec(SteadyD d_, double m_, double lambda_)
    : d(d_), m(m_), lambda(lambda_) {
    if (!(std::abs(m) < 1.0)) throw std::domain_error("m must lie in (-1, 1)");
    if (!(lambda > 0.0)) throw std::domain_error("lambda must be positive");
}

DiffusionFunction to_diffusion(SteadyD d) {
    switch (d) {
        case SteadyD::OneMinusWSquared: return DiffusionFunction::one_minus_w2();
        case SteadyD::OneMinusAbs: return DiffusionFunction::one_minus_abs();
        case SteadyD::SqrtOneMinusWSquared: return DiffusionFunction::sqrt_one_minus_w2();
    }
    return DiffusionFunction::one_minus_w2();
}

double log_unnormalized_density(const StationarySpec& s, double w) {
    switch (s.d) {
        case SteadyD::OneMinusWSquared: {
            if (std::abs(w) >= 1.0) return -std::numeric_limits<double>::infinity();
            const double e_plus = -2.0 + s.m / (2.0 * s.lambda);
            const double e_minus = -2.0 - s.m / (2.0 * s.lambda);
            return e_plus * std::log1p(w) + e_minus * std::log1p(-w)
                 - (1.0 - s.m * w) / (s.lambda * (1.0 - w * w));
        }
        case SteadyD::OneMinusAbs: {
            if (std::abs(w) >= 1.0) return -std::numeric_limits<double>::infinity();
            const double a = std::abs(w);
            const double sgn = (w < 0.0) ? -1.0 : 1.0; // w = 0 takes the right branch
            return (-2.0 - 2.0 / s.lambda) * std::log1p(-a)
                 - 2.0 * (1.0 - s.m * sgn) / (s.lambda * (1.0 - a));
        }
        case SteadyD::SqrtOneMinusWSquared: {
            if (!(std::abs(w) < 1.0))
                throw std::domain_error("density evaluation requires |w| < 1");
            const double alpha = (1.0 + s.m) / s.lambda; // Beta-like exponent + 1 on (1+w)
            const double beta = (1.0 - s.m) / s.lambda;
            return (alpha - 1.0) * std::log1p(w) + (beta - 1.0) * std::log1p(-w);
        }
    }
    return -std::numeric_limits<double>::infinity();
}

double unnormalized_density(const StationarySpec& s, double w) {
    if (s.d != SteadyD::SqrtOneMinusWSquared && std::abs(w) >= 1.0) return 0.0;
    return std::exp(log_unnormalized_density(s, w));
}

namespace {

// integral of f(w) * unnormalized(w) over (-1, 1) with the mapping suited to
// the variant's endpoint behavior
double integrate_weighted(const StationarySpec& s, const std::function<double(double)>& f,
                          double rel_tol) {
    if (s.d == SteadyD::SqrtOneMinusWSquared) {
        // Split at 0; near each endpoint substitute w = +-(1 - e^{-r/expo}) so
        // the integrand becomes smooth with e^{-r} decay on [0, inf).
        const double alpha = (1.0 + s.m) / s.lambda;
        const double beta = (1.0 - s.m) / s.lambda;
        // right half, in terms of r = beta * s, w = 1 - e^{-r/beta}:
        //   integrand = f(w) (1+w)^{alpha-1} e^{-r} / beta
        const auto right = [&](double r) {
            const double e = std::exp(-r / beta);
            const double w = 1.0 - e;
            return f(w) * std::pow(2.0 - e, alpha - 1.0) * std::exp(-r) / beta;
        };
        const auto left = [&](double r) {
            const double e = std::exp(-r / alpha);
            const double w = -1.0 + e;
            return f(w) * std::pow(2.0 - e, beta - 1.0) * std::exp(-r) / alpha;
        };
        const double hi = 45.0; // e^{-45} ~ 3e-20 relative tail
        return tanh_sinh(right, 0.0, hi, rel_tol).value
             + tanh_sinh(left, 0.0, hi, rel_tol).value;
    }
    const auto g = [&](double w) { return f(w) * unnormalized_density(s, w); };
    // split at 0 (kink or jump for OneMinusAbs; harmless otherwise)
    return tanh_sinh(g, -1.0, 0.0, rel_tol).value + tanh_sinh(g, 0.0, 1.0, rel_tol).value;
}

} // namespace

double normalization_constant(const StationarySpec& s, double rel_tol) {
    if (s.d == SteadyD::SqrtOneMinusWSquared) {
        // integrability needs both exponents > -1, i.e. (1 +- m)/lambda > 0
        if (!((1.0 + s.m) / s.lambda > 0.0 && (1.0 - s.m) / s.lambda > 0.0))
            throw std::domain_error("stationary density is not integrable");
    }
    const double mass = integrate_weighted(s, [](double) { return 1.0; }, rel_tol);
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw std::runtime_error("stationary density normalization failed");
    return 1.0 / mass;
}

double stationary_ode_residual(const StationarySpec& s, std::span<const double> points) {
    // (lambda/2)(D^2 g)' + (w-m) g  =  g [ (lambda/2)((D^2)' + D^2 (ln g)') + (w-m) ].
    // Differentiating ln g instead of D^2 g keeps the finite differences well
    // conditioned where the density spans hundreds of orders of magnitude; the
    // derivative is still measured numerically, independent of any derivation.
    const DiffusionFunction d = to_diffusion(s.d);
    const auto log_g = [&](double w) { return log_unnormalized_density(s, w); };
    double max_resid = 0.0;
    double max_g = 0.0;
    for (double w : points) {
        const double g = unnormalized_density(s, w);
        max_g = std::max(max_g, g);
        // step bounded away from the singular set ({+-1}, and 0 for the kinked variant)
        double room = std::min(1.0 - w, 1.0 + w);
        if (s.d == SteadyD::OneMinusAbs) room = std::min(room, std::abs(w));
        if (!(room > 0.0)) throw std::domain_error("residual point too close to the singular set");
        // crude probe of the local log-derivative sets the step so the stencil
        // stays inside one curvature scale
        const double probe_h = 1e-4 * room;
        const double probe =
            std::abs(log_g(w + probe_h) - log_g(w - probe_h)) / (2.0 * probe_h);
        const double h0 = std::min(0.1 * room, 0.25 / std::max(probe, 1.0));
        const double dlog = ridders_derivative(log_g, w, h0);
        const double r = g * (0.5 * s.lambda * (d.squared_derivative(w) + d.squared(w) * dlog)
                              + (w - s.m));
        max_resid = std::max(max_resid, std::abs(r));
    }
    if (!(max_g > 0.0)) return 0.0;
    return max_resid / max_g;
}

EndpointBehavior endpoint_behavior(const StationarySpec& s) {
    if (s.d != SteadyD::SqrtOneMinusWSquared)
        return {EndpointTrend::Vanishes, EndpointTrend::Vanishes}; // essential zeros
    const auto trend = [](double exponent) {
        if (exponent < 0.0) return EndpointTrend::Diverges;
        if (exponent == 0.0) return EndpointTrend::Finite;
        return EndpointTrend::Vanishes;
    };
    // (1-w)^{(1-m)/lambda - 1} at +1, (1+w)^{(1+m)/lambda - 1} at -1
    return {trend((1.0 + s.m) / s.lambda - 1.0), trend((1.0 - s.m) / s.lambda - 1.0)};
}

StationaryDensity::StationaryDensity(StationarySpec spec, double quad_rel_tol)
    : spec_(spec), c_(normalization_constant(spec, quad_rel_tol)) {}

double StationaryDensity::integrate_against(const std::function<double(double)>& f,
                                            double rel_tol) const {
    return c_ * integrate_weighted(spec_, f, rel_tol);
}

double StationaryDensity::mean() const {
    return integrate_against([](double w) { return w; });
}

double StationaryDensity::second_moment() const {
    return integrate_against([](double w) { return w * w; });
}

double StationaryDensity::cell_average(double lo, double hi, double rel_tol) const {
    lo = std::max(lo, -1.0);
    hi = std::min(hi, 1.0);
    const auto g = [&](double w) { return (*this)(w); };
    // keep the kink/jump at 0 on a panel edge
    double integral = 0.0;
    if (lo < 0.0 && hi > 0.0) {
        integral = tanh_sinh(g, lo, 0.0, rel_tol).value + tanh_sinh(g, 0.0, hi, rel_tol).value;
    } else {
        integral = tanh_sinh(g, lo, hi, rel_tol).value;
    }
    return integral / (hi - lo);
}

DensityGrid StationaryDensity::tabulate(int cells, double rel_tol) const {
    if (cells < 2) throw std::invalid_argument("tabulation needs at least 2 cells");
    DensityGrid g = DensityGrid::zeros(cells);
    const double h = g.h();
    for (int i = 0; i < cells; ++i)
        g.value[i] = cell_average(-1.0 + i * h, -1.0 + (i + 1) * h, rel_tol);
    return g;
}

std::vector<double> StationaryDensity::peaks(int n_grid) const {
    if (n_grid < 16) throw std::invalid_argument("peak scan grid too coarse");
    std::vector<double> w(n_grid), v(n_grid);
    for (int i = 0; i < n_grid; ++i) {
        // interior scan, endpoints excluded
        w[i] = -1.0 + 2.0 * (i + 1.0) / (n_grid + 1.0);
        v[i] = unnormalized_density(spec_, w[i]);
    }
    std::vector<double> out;
    for (int i = 1; i + 1 < n_grid; ++i) {
        if (v[i] > v[i - 1] && v[i] > v[i + 1]) {
            // parabolic refinement on the log scale
            const double l0 = std::log(v[i - 1]), l1 = std::log(v[i]), l2 = std::log(v[i + 1]);
            const double denom = l0 - 2.0 * l1 + l2;
            double shift = 0.0;
            if (std::isfinite(denom) && denom < 0.0) shift = 0.5 * (l0 - l2) / denom;
            if (!std::isfinite(shift)) shift = 0.0;
            out.push_back(w[i] + shift * (w[i + 1] - w[i]));
        }
    }
    return out;
}

} // namespace opkin
