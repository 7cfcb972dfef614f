#include "opkin/model.hpp"

#include <algorithm>
#include <string>

namespace opkin {

namespace {

void validate_table(const std::vector<double>& v, const char* what) {
    if (v.size() < 2)
        throw std::invalid_argument(std::string(what) + " table needs at least 2 values");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0 && v[i] <= 1.0))
            throw std::invalid_argument(std::string(what) + " table values must lie in [0, 1]");
        if (i > 0 && v[i] > v[i - 1] + 1e-14)
            throw std::invalid_argument(std::string(what) + " table must be non-increasing in |w|");
    }
}

double table_lookup(const std::vector<double>& t, double a) {
    // a in [0, 1]; uniform knots, linear interpolation
    if (a <= 0.0) return t.front();
    if (a >= 1.0) return t.back();
    const double pos = a * (t.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return t[i] + frac * (t[i + 1] - t[i]);
}

} // namespace

CompromiseFunction CompromiseFunction::from_table(std::vector<double> values) {
    validate_table(values, "compromise");
    CompromiseFunction p(Kind::Table);
    p.table_ = std::move(values);
    // the linear interpolant of a valid table stays valid; sample anyway
    for (int i = 0; i <= 512; ++i) {
        const double v = p(i / 512.0);
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("compromise table interpolant leaves [0, 1]");
    }
    return p;
}

double CompromiseFunction::interp_table(double a) const { return table_lookup(table_, a); }

DiffusionFunction DiffusionFunction::sqrt_regularized(double p, double gamma) {
    if (!(p > 0.0)) throw std::invalid_argument("regularization exponent p must be positive");
    if (!(gamma > 0.0 && gamma < 0.5))
        throw std::invalid_argument("gamma must lie in (0, 1/2)");
    DiffusionFunction d(Kind::SqrtRegularized);
    d.reg_p_ = p;
    d.reg_gamma_ = gamma;
    d.reg_beta_ = 1.0 + std::pow(gamma, p);
    return d;
}

DiffusionFunction DiffusionFunction::from_table(std::vector<double> values) {
    validate_table(values, "diffusion");
    DiffusionFunction d(Kind::Table);
    d.table_ = std::move(values);
    return d;
}

double DiffusionFunction::interp_table(double a) const { return table_lookup(table_, a); }

double DiffusionFunction::squared_derivative(double w) const {
    switch (kind_) {
        case Kind::OneMinusAbs: {
            if (w == 0.0) return 0.0; // kink; symmetric convention
            const double s = w > 0.0 ? 1.0 : -1.0;
            return -2.0 * s * (1.0 - std::abs(w));
        }
        case Kind::OneMinusWSquared:
            return -4.0 * w * (1.0 - w * w);
        case Kind::SqrtOneMinusWSquared:
            return -2.0 * w;
        case Kind::SqrtRegularized:
            return (1.0 - reg_beta_ * w * w > 0.0) ? -2.0 * reg_beta_ * w : 0.0;
        case Kind::Table: {
            // slope of the squared interpolant
            const double h = 1.0 / (table_.size() - 1);
            const double a = std::abs(w);
            const double lo = std::max(0.0, a - 0.5 * h);
            const double hi = std::min(1.0, a + 0.5 * h);
            const double dl = interp_table(lo), dh = interp_table(hi);
            const double slope = (dh * dh - dl * dl) / (hi - lo);
            return (w >= 0.0) ? slope : -slope;
        }
    }
    return 0.0;
}

NoiseModel NoiseModel::uniform_symmetric(double halfwidth) {
    if (!(halfwidth >= 0.0)) throw std::invalid_argument("noise halfwidth must be nonnegative");
    return NoiseModel(Kind::UniformSymmetric, halfwidth * halfwidth / 3.0, halfwidth, 0.0);
}

NoiseModel NoiseModel::truncated_gaussian(double sigma, double cutoff) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
    if (!(cutoff > 0.0)) throw std::invalid_argument("gaussian cutoff must be positive");
    return NoiseModel(Kind::TruncatedGaussian, sigma * sigma, cutoff, sigma);
}

NoiseModel NoiseModel::scaled_uniform(double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
    const double hw = sigma * std::sqrt(3.0);
    return NoiseModel(Kind::ScaledUniform, sigma * sigma, hw, 0.0);
}

NoiseModel NoiseModel::scaled_bimodal(double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
    return NoiseModel(Kind::ScaledBimodal, sigma * sigma, sigma, 0.0);
}

double NoiseModel::realized_variance() const {
    switch (kind_) {
        case Kind::UniformSymmetric:
        case Kind::ScaledUniform:
            return halfwidth_ * halfwidth_ / 3.0;
        case Kind::ScaledBimodal:
            return halfwidth_ * halfwidth_;
        case Kind::TruncatedGaussian: {
            if (sigma_ == 0.0 || halfwidth_ == 0.0) return 0.0;
            // Var[X | |X|<=c sigma] = sigma^2 (1 - 2 c phi(c) / (2 Phi(c) - 1))
            const double c = halfwidth_ / sigma_;
            const double phi = std::exp(-0.5 * c * c) / 2.5066282746310005024;
            const double mass = std::erf(c / 1.4142135623730950488); // 2 Phi(c) - 1
            return sigma_ * sigma_ * (1.0 - 2.0 * c * phi / mass);
        }
    }
    return 0.0;
}

NoiseModel NoiseModel::clipped_to(double halfwidth) const {
    if (!(halfwidth >= 0.0)) throw std::invalid_argument("clip halfwidth must be nonnegative");
    if (halfwidth_ <= halfwidth) return *this;
    switch (kind_) {
        case Kind::UniformSymmetric:
            return uniform_symmetric(halfwidth);
        case Kind::ScaledUniform:
            return scaled_uniform(halfwidth / std::sqrt(3.0));
        case Kind::ScaledBimodal:
            return scaled_bimodal(halfwidth);
        case Kind::TruncatedGaussian:
            return halfwidth > 0.0 ? truncated_gaussian(sigma_, halfwidth)
                                   : uniform_symmetric(0.0);
    }
    return uniform_symmetric(0.0);
}

InitSpec InitSpec::box(double center, double halfwidth) {
    if (!(halfwidth >= 0.0)) throw std::invalid_argument("init halfwidth must be nonnegative");
    if (!(center - halfwidth >= -1.0 && center + halfwidth <= 1.0))
        throw std::invalid_argument("init interval must lie inside [-1, 1]");
    InitSpec s;
    s.kind = Kind::Box;
    s.center = center;
    s.halfwidth = halfwidth;
    return s;
}

InitSpec InitSpec::point(double center) {
    if (!(center >= -1.0 && center <= 1.0))
        throw std::invalid_argument("init point must lie in [-1, 1]");
    InitSpec s;
    s.kind = Kind::Point;
    s.center = center;
    s.halfwidth = 0.0;
    return s;
}

double InitSpec::sample(Philox& rng) const {
    switch (kind) {
        case Kind::Uniform: return rng.uniform_symmetric(1.0);
        case Kind::Box: return center + rng.uniform_symmetric(halfwidth);
        case Kind::Point: return center;
    }
    return 0.0;
}

double max_noise_halfwidth(const DiffusionFunction& d, double gamma, std::optional<double> w) {
    if (!(gamma > 0.0 && gamma < 0.5))
        throw std::domain_error("gamma must lie in (0, 1/2)");
    switch (d.kind()) {
        case DiffusionFunction::Kind::OneMinusAbs:
            return 1.0 - gamma;
        case DiffusionFunction::Kind::OneMinusWSquared: {
            const double a = w ? std::abs(*w) : 1.0; // worst case at |w| = 1
            if (w && a > 1.0) throw std::domain_error("opinion must lie in [-1, 1]");
            return (1.0 - gamma) / (1.0 + a);
        }
        case DiffusionFunction::Kind::SqrtRegularized: {
            // minimize (1-w)/D(w) over w in [0, 1/sqrt(beta)); minimum at w = 1/beta
            const double beta = 1.0 + std::pow(d.reg_gamma(), d.reg_p());
            return (1.0 - gamma) * std::sqrt((beta - 1.0) / beta);
        }
        case DiffusionFunction::Kind::SqrtOneMinusWSquared:
        case DiffusionFunction::Kind::Table:
            // no positive halfwidth guarantees admissibility near the boundary
            return 0.0;
    }
    return 0.0;
}

} // namespace opkin
