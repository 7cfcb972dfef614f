#pragma once

#include <functional>
#include <span>
#include <vector>

#include "opkin/grid.hpp"
#include "opkin/model.hpp"

namespace opkin {

// Closed-form stationary densities of the limiting Fokker-Planck equation
// (lambda/2) d/dw (D^2 g) + (w - m) g = 0 for the three diffusion variants.
// The forms are obtained by direct integration of the ODE; the residual check
// below is the arbiter for the transcription.
enum class SteadyD { OneMinusWSquared, OneMinusAbs, SqrtOneMinusWSquared };

struct StationarySpec {
    SteadyD d;
    double m;      // conserved average opinion, |m| < 1
    double lambda; // sigma^2/gamma balance, > 0

    StationarySpec(SteadyD d_, double m_, double lambda_);
};

DiffusionFunction to_diffusion(SteadyD d);

// log of the un-normalized closed form at interior w; evaluating the
// SqrtOneMinusWSquared form at |w| >= 1 is rejected (it can diverge there),
// the other two return -inf consistently with their zero limits.
double log_unnormalized_density(const StationarySpec& spec, double w);

// the closed form without its normalization constant; 0 at |w| >= 1 for the
// variants whose limit is 0, domain_error for SqrtOneMinusWSquared
double unnormalized_density(const StationarySpec& spec, double w);

// c such that the normalized density has unit mass, by adaptive quadrature on
// (-1, 1); the SqrtOneMinusWSquared case is mapped near each endpoint with
// w = +-(1 - e^{-s}) so its integrable power singularities are resolved
double normalization_constant(const StationarySpec& spec, double rel_tol = 1e-12);

// max over the points of |(lambda/2)(D^2 g)' + (w - m) g|, scaled by the max
// of g on the points; the derivative comes from Ridders extrapolated central
// differences, independent of how the closed form was derived
double stationary_ode_residual(const StationarySpec& spec, std::span<const double> points);

enum class EndpointTrend { Vanishes, Finite, Diverges };
struct EndpointBehavior {
    EndpointTrend at_minus_one;
    EndpointTrend at_plus_one;
};
EndpointBehavior endpoint_behavior(const StationarySpec& spec);

// Normalized stationary density with quadrature helpers.
class StationaryDensity {
public:
    explicit StationaryDensity(StationarySpec spec, double quad_rel_tol = 1e-12);

    const StationarySpec& spec() const { return spec_; }
    double constant() const { return c_; }

    double operator()(double w) const { return c_ * unnormalized_density(spec_, w); }

    // integral of F(w) g(w) over (-1, 1) with the variant-appropriate mapping
    double integrate_against(const std::function<double(double)>& f, double rel_tol = 1e-10) const;

    double mean() const;
    double second_moment() const;

    double cell_average(double lo, double hi, double rel_tol = 1e-10) const;
    DensityGrid tabulate(int cells, double rel_tol = 1e-10) const;

    // interior local maxima located numerically on a fine grid
    std::vector<double> peaks(int n_grid = 4001) const;

private:
    StationarySpec spec_;
    double c_;
};

} // namespace opkin
