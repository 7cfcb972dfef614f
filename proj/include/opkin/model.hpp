#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "opkin/rng.hpp"

namespace opkin {

// Scalar opinion confined to [-1, 1]; -1 and 1 are the extreme opinions.
class OpinionValue {
public:
    explicit OpinionValue(double w) : w_(w) {
        if (!(w >= -1.0 && w <= 1.0))
            throw std::domain_error("opinion must lie in [-1, 1]");
    }
    double value() const { return w_; }
    operator double() const { return w_; }

private:
    double w_;
};

// Local relevance of the compromise term, P(|w|), non-increasing in |w|,
// bounded by [0, 1].
class CompromiseFunction {
public:
    enum class Kind { Constant, OneMinusWSquared, Table };

    static CompromiseFunction constant() { return CompromiseFunction(Kind::Constant); }
    static CompromiseFunction one_minus_w2() { return CompromiseFunction(Kind::OneMinusWSquared); }
    // values on a uniform grid of |w| over [0, 1], linearly interpolated
    static CompromiseFunction from_table(std::vector<double> values);

    Kind kind() const { return kind_; }

    double operator()(double w) const {
        switch (kind_) {
            case Kind::Constant: return 1.0;
            case Kind::OneMinusWSquared: return 1.0 - w * w;
            case Kind::Table: return interp_table(std::abs(w));
        }
        return 0.0;
    }

private:
    explicit CompromiseFunction(Kind k) : kind_(k) {}
    double interp_table(double a) const;

    Kind kind_;
    std::vector<double> table_;
};

// Local relevance of the diffusion term, D(|w|), non-increasing in |w|,
// bounded by [0, 1]. squared()/squared_derivative() serve the Fokker-Planck
// side, where the operator acts on D^2 g.
class DiffusionFunction {
public:
    enum class Kind { OneMinusAbs, OneMinusWSquared, SqrtOneMinusWSquared, SqrtRegularized, Table };

    static DiffusionFunction one_minus_abs() { return DiffusionFunction(Kind::OneMinusAbs); }
    static DiffusionFunction one_minus_w2() { return DiffusionFunction(Kind::OneMinusWSquared); }
    static DiffusionFunction sqrt_one_minus_w2() { return DiffusionFunction(Kind::SqrtOneMinusWSquared); }
    // D(|w|) = sqrt((1 - (1+gamma^p) w^2)_+): vanishes slightly inside the
    // boundary so a small noise support keeps every interaction admissible.
    static DiffusionFunction sqrt_regularized(double p, double gamma);
    static DiffusionFunction from_table(std::vector<double> values);

    Kind kind() const { return kind_; }
    double reg_p() const { return reg_p_; }
    double reg_gamma() const { return reg_gamma_; }

    double operator()(double w) const { return std::sqrt(squared(w)); }

    double squared(double w) const {
        switch (kind_) {
            case Kind::OneMinusAbs: {
                const double d = 1.0 - std::abs(w);
                return d * d;
            }
            case Kind::OneMinusWSquared: {
                const double d = 1.0 - w * w;
                return d * d;
            }
            case Kind::SqrtOneMinusWSquared:
                return 1.0 - w * w;
            case Kind::SqrtRegularized: {
                const double d = 1.0 - reg_beta_ * w * w;
                return d > 0.0 ? d : 0.0;
            }
            case Kind::Table: {
                const double d = interp_table(std::abs(w));
                return d * d;
            }
        }
        return 0.0;
    }

    // d(D^2)/dw, analytic per variant (tables fall back to the interpolant slope)
    double squared_derivative(double w) const;

private:
    explicit DiffusionFunction(Kind k) : kind_(k) {}
    double interp_table(double a) const;

    Kind kind_;
    double reg_p_ = 0.0;
    double reg_gamma_ = 0.0;
    double reg_beta_ = 1.0; // 1 + gamma^p
    std::vector<double> table_;
};

// Symmetric zero-mean noise with bounded support. Sampling takes a
// caller-owned stream, so the model itself holds no mutable state.
class NoiseModel {
public:
    enum class Kind { UniformSymmetric, TruncatedGaussian, ScaledUniform, ScaledBimodal };

    // uniform on [-halfwidth, halfwidth]; variance halfwidth^2/3 exactly
    static NoiseModel uniform_symmetric(double halfwidth);
    // N(0, sigma^2) rejection-sampled to |eta| <= cutoff; the declared variance
    // is the pre-truncation sigma^2, the realized (post-truncation) variance is
    // reported separately
    static NoiseModel truncated_gaussian(double sigma, double cutoff);
    // sigma * Y with Y uniform on [-sqrt3, sqrt3] (unit variance)
    static NoiseModel scaled_uniform(double sigma);
    // sigma * Y with Y = +-1 fair coin
    static NoiseModel scaled_bimodal(double sigma);

    Kind kind() const { return kind_; }
    double declared_variance() const { return declared_var_; }
    double realized_variance() const; // exact variance of the sampled law
    double support_halfwidth() const { return halfwidth_; }

    // same family with support limited to [-halfwidth, halfwidth]
    NoiseModel clipped_to(double halfwidth) const;

    double sample(Philox& rng) const {
        switch (kind_) {
            case Kind::UniformSymmetric:
            case Kind::ScaledUniform:
                if (halfwidth_ == 0.0) return 0.0;
                return rng.uniform_symmetric(halfwidth_);
            case Kind::ScaledBimodal:
                if (halfwidth_ == 0.0) return 0.0;
                return (rng.next_u32() & 1u) ? halfwidth_ : -halfwidth_;
            case Kind::TruncatedGaussian: {
                if (halfwidth_ == 0.0) return 0.0;
                for (;;) {
                    const double x = sigma_ * rng.gauss();
                    if (std::abs(x) <= halfwidth_) return x;
                }
            }
        }
        return 0.0;
    }

private:
    NoiseModel(Kind k, double declared_var, double halfwidth, double sigma)
        : kind_(k), declared_var_(declared_var), halfwidth_(halfwidth), sigma_(sigma) {}

    Kind kind_;
    double declared_var_;
    double halfwidth_;
    double sigma_; // gaussian scale, unused for the uniform kinds
};

// Compromise strength and noise variance; lambda = sigma^2/gamma is always
// derived, never stored.
struct KineticParams {
    double gamma;
    double sigma2;

    KineticParams(double gamma_, double sigma2_) : gamma(gamma_), sigma2(sigma2_) {
        if (!(gamma > 0.0 && gamma < 0.5))
            throw std::domain_error("gamma must lie in (0, 1/2)");
        if (!(sigma2 >= 0.0))
            throw std::domain_error("sigma2 must be nonnegative");
    }
    static KineticParams from_lambda(double gamma, double lambda) {
        if (!(lambda >= 0.0)) throw std::domain_error("lambda must be nonnegative");
        return KineticParams(gamma, lambda * gamma);
    }
    double lambda() const { return sigma2 / gamma; }
};

// Initial law of the agent opinions / initial data of the solvers.
struct InitSpec {
    enum class Kind { Uniform, Box, Point };
    Kind kind = Kind::Uniform; // uniform on [-1, 1]
    double center = 0.0;
    double halfwidth = 1.0;

    static InitSpec uniform() { return {}; }
    static InitSpec box(double center, double halfwidth);
    static InitSpec point(double center);

    double sample(Philox& rng) const;
};

// The binary exchange rule. Returns the raw post-interaction pair, not yet
// checked against the bounds.
inline std::pair<double, double> interact(double w, double w_star, double gamma,
                                          const CompromiseFunction& p,
                                          const DiffusionFunction& d,
                                          double eta, double eta_star) {
    const double wp = w - gamma * p(w) * (w - w_star) + eta * d(w);
    const double wsp = w_star - gamma * p(w_star) * (w_star - w) + eta_star * d(w_star);
    return {wp, wsp};
}

inline std::pair<double, double> interact(OpinionValue w, OpinionValue w_star,
                                          const KineticParams& params,
                                          const CompromiseFunction& p,
                                          const DiffusionFunction& d,
                                          double eta, double eta_star) {
    return interact(w.value(), w_star.value(), params.gamma, p, d, eta, eta_star);
}

// Both proposals must stay inside the closed interval [-1, 1].
inline bool is_admissible(double w_prime, double w_star_prime) {
    return std::abs(w_prime) <= 1.0 && std::abs(w_star_prime) <= 1.0;
}

// Contraction factor of the opinion difference in a noise-free exchange:
// w' - w'_* = (1 - gamma (P(|w|) + P(|w_*|))) (w - w_*).
inline double restitution_coefficient(double w, double w_star, double gamma,
                                      const CompromiseFunction& p) {
    return 1.0 - gamma * (p(w) + p(w_star));
}

// Largest halfwidth a such that |eta|,|eta_*| <= a guarantees admissibility.
// With w given, the bound for that opinion; without, the worst case over w.
// Unsupported variants return the conservative 0.
double max_noise_halfwidth(const DiffusionFunction& d, double gamma,
                           std::optional<double> w = std::nullopt);

} // namespace opkin
