#include "opkin/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace opkin {

FPEquationSpec FPEquationSpec::full_fp(DiffusionFunction d, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    return {Kind::FullFP, std::move(d), lambda, CompromiseFunction::constant()};
}

FPEquationSpec FPEquationSpec::general_p(DiffusionFunction d, double lambda,
                                         CompromiseFunction p) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    return {Kind::GeneralP, std::move(d), lambda, std::move(p)};
}

FPEquationSpec FPEquationSpec::pure_diffusion(DiffusionFunction d, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    return {Kind::PureDiffusion, std::move(d), lambda, CompromiseFunction::constant()};
}

FPEquationSpec FPEquationSpec::pure_drift(CompromiseFunction p) {
    return {Kind::PureDrift, DiffusionFunction::sqrt_one_minus_w2(), 0.0, std::move(p)};
}

FPEquationSpec FPEquationSpec::sznajd_drift() {
    return {Kind::SznajdDrift, DiffusionFunction::sqrt_one_minus_w2(), 0.0,
            CompromiseFunction::constant()};
}

namespace {

inline double drift_coefficient(const FPEquationSpec& spec, double w, double m) {
    switch (spec.kind) {
        case FPEquationSpec::Kind::FullFP: return w - m;
        case FPEquationSpec::Kind::GeneralP:
        case FPEquationSpec::Kind::PureDrift: return spec.p(w) * (w - m);
        case FPEquationSpec::Kind::SznajdDrift: return -(1.0 - w * w) * w;
        case FPEquationSpec::Kind::PureDiffusion: return 0.0;
    }
    return 0.0;
}

// Chang-Cooper weight delta(rho) = 1/rho - 1/(e^rho - 1); series for small rho
// keeps expm1 out of the hot loop.
inline double cc_delta(double rho) {
    const double a = std::abs(rho);
    if (a < 1e-8) return 0.5;
    if (a < 1.0) {
        const double r2 = rho * rho;
        return 0.5 - rho / 12.0 + rho * r2 / 720.0 - r2 * r2 * rho / 30240.0;
    }
    if (rho > 700.0) return 1.0 / rho;
    if (rho < -700.0) return 1.0 / rho + 1.0;
    return 1.0 / rho - 1.0 / std::expm1(rho);
}

} // namespace

FPStepper::FPStepper(FPEquationSpec spec, int cells, FPControl control)
    : spec_(std::move(spec)), control_(control), k_(cells), h_(2.0 / cells) {
    if (k_ < 4) throw std::invalid_argument("grid needs at least 4 cells");
    c_face_.assign(k_ + 1, 0.0);
    fit_face_.assign(k_ + 1, 0.0);
    a_fixed_face_.assign(k_ + 1, 0.0);
    p_face_.assign(k_ + 1, 0.0);
    x_face_.assign(k_ + 1, 0.0);
    d2_cell_.assign(k_, 0.0);
    flux_.assign(k_ + 1, 0.0);
    mean_dependent_ = spec_.tracks_mean();
    const double half_lambda = 0.5 * spec_.lambda;
    for (int f = 0; f <= k_; ++f) {
        const double x = -1.0 + f * h_;
        x_face_[f] = x;
        if (spec_.has_diffusion()) {
            c_face_[f] = half_lambda * spec_.d.squared(x);
            if (control_.scheme == FluxScheme::ChangCooper)
                fit_face_[f] = half_lambda * spec_.d.squared_derivative(x);
        }
        if (spec_.has_drift()) {
            if (mean_dependent_) {
                p_face_[f] = (spec_.kind == FPEquationSpec::Kind::FullFP) ? 1.0 : spec_.p(x);
            } else {
                a_fixed_face_[f] = drift_coefficient(spec_, x, 0.0);
            }
        }
    }
    if (spec_.has_diffusion())
        for (int i = 0; i < k_; ++i)
            d2_cell_[i] = half_lambda * spec_.d.squared(-1.0 + (i + 0.5) * h_);
}

double FPStepper::mean_if_tracked(const DensityGrid& g) const {
    return mean_dependent_ ? g.mean() : 0.0;
}

double FPStepper::stable_dtau(const DensityGrid&, double m) const {
    double max_c = 0.0, max_a = 0.0, max_b = 0.0;
    for (int f = 0; f <= k_; ++f) {
        const double a = drift_at(f, m);
        max_a = std::max(max_a, std::abs(a));
        max_b = std::max(max_b, std::abs(fit_face_[f] + a));
        max_c = std::max(max_c, c_face_[f]);
    }
    double bound = std::numeric_limits<double>::infinity();
    if (max_c > 0.0) bound = std::min(bound, h_ * h_ / (2.0 * max_c));
    if (max_a > 0.0) bound = std::min(bound, h_ / max_a);
    // positivity of the fitted update needs the full face coefficient B =
    // a + (lambda/2)(D^2)' counted alongside the diffusive number
    const double denom = 2.0 * max_c / (h_ * h_) + 2.0 * max_b / h_;
    if (denom > 0.0) bound = std::min(bound, 1.0 / denom);
    if (!std::isfinite(bound))
        throw std::invalid_argument("equation has neither diffusion nor drift");
    return control_.cfl_safety * bound;
}

void FPStepper::step(DensityGrid& g, double dtau, double m) {
    if (g.cells() != k_) throw std::invalid_argument("grid size does not match the stepper");
    const double inv_h = 1.0 / h_;
    const double* v = g.value.data();
    double* flux = flux_.data();
    flux[0] = flux[k_] = 0.0; // zero total flux at both boundaries
    if (control_.scheme == FluxScheme::Upwind) {
        // first-order variant: flux-form central differences of d(D^2 g)/dw on
        // cell values, upwinding by the sign of the drift coefficient alone
#pragma omp parallel for if (control_.parallel) schedule(static)
        for (int f = 1; f < k_; ++f) {
            const double a = drift_at(f, m);
            const double gl = v[f - 1];
            const double gr = v[f];
            const double g_up = a > 0.0 ? gr : gl;
            flux[f] = a * g_up + (d2_cell_[f] * gr - d2_cell_[f - 1] * gl) * inv_h;
        }
    } else {
#pragma omp parallel for if (control_.parallel) schedule(static)
        for (int f = 1; f < k_; ++f) {
            const double b = fit_face_[f] + drift_at(f, m);
            const double c = c_face_[f];
            const double gl = v[f - 1];
            const double gr = v[f];
            const double delta = (c == 0.0) ? (b > 0.0 ? 0.0 : 1.0) : cc_delta(h_ * b / c);
            flux[f] = b * (delta * gl + (1.0 - delta) * gr) + c * (gr - gl) * inv_h;
        }
    }

    const double r = dtau * inv_h;
    double* out = g.value.data();
#pragma omp parallel for if (control_.parallel) schedule(static)
    for (int i = 0; i < k_; ++i) out[i] += r * (flux[i + 1] - flux[i]);

    // positivity audit: tiny undershoots are clipped and the mass renormalized
    double min_v = 0.0;
    for (int i = 0; i < k_; ++i) min_v = std::min(min_v, out[i]);
    if (min_v < -control_.negative_tol)
        throw std::runtime_error("negative density beyond tolerance");
    if (min_v < 0.0) {
        for (int i = 0; i < k_; ++i)
            if (out[i] < 0.0) out[i] = 0.0;
        const double mass = g.mass();
        if (mass > 0.0) {
            const double scale = 1.0 / mass;
            for (int i = 0; i < k_; ++i) out[i] *= scale;
        }
    }
    g.time += dtau;
}

double stable_dtau(const DensityGrid& g, const FPEquationSpec& spec, double safety) {
    FPControl ctl;
    ctl.cfl_safety = safety;
    FPStepper stepper(spec, g.cells(), ctl);
    return stepper.stable_dtau(g, stepper.mean_if_tracked(g));
}

void fp_step(DensityGrid& g, const FPEquationSpec& spec, double dtau, const FPControl& control) {
    if (g.cells() < 4) throw std::invalid_argument("grid needs at least 4 cells");
    if (!(dtau > 0.0)) throw std::invalid_argument("dtau must be positive");
    FPStepper stepper(spec, g.cells(), control);
    const double m = stepper.mean_if_tracked(g);
    if (dtau > stepper.stable_dtau(g, m) * (1.0 + 1e-12))
        throw std::runtime_error("dtau violates the stability bound");
    stepper.step(g, dtau, m);
}

namespace {

MomentRecord record_moments(const DensityGrid& g) {
    MomentRecord r;
    r.t = g.time;
    r.mean = g.mean();
    r.second_moment = g.second_moment();
    r.c_f = r.second_moment - r.mean * r.mean;
    r.rejected_fraction = 0.0;
    return r;
}

} // namespace

FPResult fp_solve(const FPEquationSpec& spec, DensityGrid g0, double tau_end,
                  double record_every, const FPControl& control, double stationary_tol) {
    if (!(tau_end > 0.0)) throw std::invalid_argument("tau_end must be positive");
    if (!(record_every > 0.0)) throw std::invalid_argument("record_every must be positive");

    FPResult out;
    out.grid = std::move(g0);
    out.grid.time = 0.0;
    out.series.push_back(record_moments(out.grid));

    FPStepper stepper(spec, out.grid.cells(), control);
    DensityGrid prev = out.grid;
    double next_record = record_every;
    while (out.grid.time < tau_end - 1e-12) {
        const double m = stepper.mean_if_tracked(out.grid);
        const double dt = std::min({stepper.stable_dtau(out.grid, m),
                                    next_record - out.grid.time, tau_end - out.grid.time});
        stepper.step(out.grid, dt, m);
        if (out.grid.time >= next_record - 1e-12) {
            out.series.push_back(record_moments(out.grid));
            out.profile_change_rate = l1_distance(out.grid, prev) / record_every;
            if (out.profile_change_rate < stationary_tol) {
                out.stationary_reached = true;
                break;
            }
            prev = out.grid;
            next_record += record_every;
        }
    }
    return out;
}

MomentTrajectory closed_moment_odes(double lambda, double m0, double m2_0, double tau_end,
                                    double record_every, double dtau) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(m0 * m0 <= m2_0 && m2_0 <= 1.0))
        throw std::invalid_argument("moment pair must satisfy m0^2 <= M2 <= 1");
    if (!(tau_end > 0.0) || !(record_every > 0.0) || !(dtau > 0.0))
        throw std::invalid_argument("times must be positive");

    const double m0sq = m0 * m0;
    const auto rhs = [&](double m2) { return lambda * (1.0 - m2) - 2.0 * (m2 - m0sq); };

    MomentTrajectory out;
    double tau = 0.0, m2 = m2_0;
    out.tau.push_back(tau);
    out.m.push_back(m0);
    out.m2.push_back(m2);
    double next_record = record_every;
    while (tau < tau_end - 1e-12) {
        const double dt = std::min({dtau, next_record - tau, tau_end - tau});
        const double k1 = rhs(m2);
        const double k2 = rhs(m2 + 0.5 * dt * k1);
        const double k3 = rhs(m2 + 0.5 * dt * k2);
        const double k4 = rhs(m2 + dt * k3);
        m2 += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        tau += dt;
        if (tau >= next_record - 1e-12) {
            out.tau.push_back(tau);
            out.m.push_back(m0);
            out.m2.push_back(m2);
            next_record += record_every;
        }
    }
    return out;
}

double mean_evolution_general_p(const DensityGrid& g, const CompromiseFunction& p) {
    const double h = g.h();
    double int_pg = 0.0, int_wpg = 0.0;
    for (int i = 0; i < g.cells(); ++i) {
        const double w = g.center(i);
        const double pg = p(w) * g.value[i];
        int_pg += pg;
        int_wpg += w * pg;
    }
    return g.mean() * int_pg * h - int_wpg * h;
}

DensityGrid prolong(const DensityGrid& g, int factor) {
    if (factor < 1) throw std::invalid_argument("refinement factor must be >= 1");
    DensityGrid fine = DensityGrid::zeros(g.cells() * factor);
    fine.time = g.time;
    for (int i = 0; i < g.cells(); ++i)
        for (int j = 0; j < factor; ++j) fine.value[i * factor + j] = g.value[i];
    return fine;
}

DensityGrid initial_grid(const InitSpec& init, int cells) {
    DensityGrid g = DensityGrid::zeros(cells);
    const double h = g.h();
    const double lo = init.kind == InitSpec::Kind::Uniform ? -1.0 : init.center - init.halfwidth;
    const double hi = init.kind == InitSpec::Kind::Uniform ? 1.0 : init.center + init.halfwidth;
    if (init.kind == InitSpec::Kind::Point || hi - lo < h) {
        const int i = std::min(cells - 1, std::max(0, static_cast<int>((init.center + 1.0) / h)));
        g.value[i] = 1.0 / h;
        return g;
    }
    const double dens = 1.0 / (hi - lo);
    for (int i = 0; i < cells; ++i) {
        const double cl = -1.0 + i * h, ch = cl + h;
        const double overlap = std::max(0.0, std::min(ch, hi) - std::max(cl, lo));
        g.value[i] = dens * overlap / h;
    }
    return g;
}

} // namespace opkin
