#pragma once

#include <functional>

namespace opkin {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0; // estimated
    int levels = 0;
};

// Tanh-sinh (double exponential) quadrature on (a, b). Nodes cluster double
// exponentially at the endpoints, so integrable endpoint singularities and
// essential decay are handled without special casing. Levels are doubled
// until the estimate changes by less than rel_tol.
//
// Nodes closer to an endpoint than one ulp cannot be represented, which caps
// direct evaluation of power singularities near x^{-1/2} at ~1e-8 absolute;
// stronger singularities should be mapped away first (substitute the distance
// to the endpoint, as the steady-state normalization does).
QuadResult tanh_sinh(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-12, int max_level = 12);

// Composite fixed-order Gauss-Legendre. Independent of tanh_sinh; used as the
// second route in two-quadrature agreement checks.
double gauss_legendre_panels(const std::function<double(double)>& f, double a, double b,
                             int order, int panels);

// Derivative of f at x by Ridders' polynomial extrapolation of central
// differences; err receives the extrapolation error estimate.
double ridders_derivative(const std::function<double(double)>& f, double x, double h0,
                          double* err = nullptr);

} // namespace opkin
