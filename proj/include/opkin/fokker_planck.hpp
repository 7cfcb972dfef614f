#pragma once

#include <vector>

#include "opkin/grid.hpp"
#include "opkin/model.hpp"

namespace opkin {

// The limiting equations, all in flux form d(g)/dtau = d(J)/dw with
//   J = (lambda/2) d(D^2 g)/dw + a(w) g
// and zero total flux at w = +-1:
//   FullFP:        a = w - m            (P = 1; m recomputed from the grid)
//   GeneralP:      a = P(|w|)(w - m)    (m recomputed from the grid each step)
//   PureDiffusion: a = 0
//   PureDrift:     no diffusion, a = P(|w|)(w - m)
//   SznajdDrift:   no diffusion, a = -(1 - w^2) w
struct FPEquationSpec {
    enum class Kind { FullFP, GeneralP, PureDiffusion, PureDrift, SznajdDrift };

    Kind kind;
    DiffusionFunction d = DiffusionFunction::sqrt_one_minus_w2();
    double lambda = 0.0;
    CompromiseFunction p = CompromiseFunction::constant();

    static FPEquationSpec full_fp(DiffusionFunction d, double lambda);
    static FPEquationSpec general_p(DiffusionFunction d, double lambda, CompromiseFunction p);
    static FPEquationSpec pure_diffusion(DiffusionFunction d, double lambda);
    static FPEquationSpec pure_drift(CompromiseFunction p);
    static FPEquationSpec sznajd_drift();

    bool has_diffusion() const {
        return kind == Kind::FullFP || kind == Kind::GeneralP || kind == Kind::PureDiffusion;
    }
    bool has_drift() const { return kind != Kind::PureDiffusion; }
    bool tracks_mean() const {
        return kind == Kind::FullFP || kind == Kind::GeneralP || kind == Kind::PureDrift;
    }
};

// Face flux closure. ChangCooper blends the advective face value with the
// exponential fitting weight delta(rho), rho = h B / C, which reproduces the
// per-face integrating factor at steady state and is second order for smooth
// solutions; Upwind is the plain first-order choice kept for comparison.
enum class FluxScheme { ChangCooper, Upwind };

struct FPControl {
    double cfl_safety = 0.4;
    FluxScheme scheme = FluxScheme::ChangCooper;
    bool parallel = false;       // OpenMP over faces/cells; bit-identical either way
    double negative_tol = 1e-10; // cells below -tol are an error, above are clipped
};

// largest stable explicit step for the current grid state
double stable_dtau(const DensityGrid& g, const FPEquationSpec& spec, double safety = 0.4);

// one explicit conservative update; throws on a CFL violation or a negative
// cell beyond tolerance
void fp_step(DensityGrid& g, const FPEquationSpec& spec, double dtau,
             const FPControl& control = {});

// Reusable update kernel for a fixed (equation, grid size): the face geometry
// and the time-independent coefficient pieces are evaluated once, so the
// per-step work is the two sweeps over faces and cells.
class FPStepper {
public:
    FPStepper(FPEquationSpec spec, int cells, FPControl control = {});

    const FPEquationSpec& spec() const { return spec_; }
    int cells() const { return k_; }

    double mean_if_tracked(const DensityGrid& g) const;
    double stable_dtau(const DensityGrid& g, double m) const;
    // advances g by dtau; the caller guarantees dtau respects stable_dtau
    void step(DensityGrid& g, double dtau, double m);

private:
    double drift_at(int f, double m) const {
        return a_fixed_face_[f] + (mean_dependent_ ? p_face_[f] * (x_face_[f] - m) : 0.0);
    }

    FPEquationSpec spec_;
    FPControl control_;
    int k_;
    double h_;
    bool mean_dependent_ = false;
    std::vector<double> c_face_;       // (lambda/2) D^2 at faces
    std::vector<double> fit_face_;     // (lambda/2) (D^2)' at faces (fitted scheme only)
    std::vector<double> a_fixed_face_; // m-independent drift (cubic comparison equation)
    std::vector<double> p_face_;       // compromise weight at faces
    std::vector<double> x_face_;
    std::vector<double> d2_cell_;      // (lambda/2) D^2 at cell centers (upwind scheme)
    std::vector<double> flux_;
};

struct FPResult {
    DensityGrid grid;
    MomentSeries series;
    bool stationary_reached = false;
    double profile_change_rate = 0.0; // L1 change per unit tau at the last record
};

// steps to tau_end with automatic dtau; records moments every record_every and
// stops early once the profile change rate drops below stationary_tol
FPResult fp_solve(const FPEquationSpec& spec, DensityGrid g0, double tau_end,
                  double record_every, const FPControl& control = {},
                  double stationary_tol = 1e-9);

// Closed moment system of the FullFP equation with D = sqrt(1 - w^2),
// obtained by integrating the equation against w and w^2 with vanishing
// boundary flux:  dm/dtau = 0,  dM2/dtau = lambda (1 - M2) - 2 (M2 - m0^2).
// Integrated with classic RK4.
struct MomentTrajectory {
    std::vector<double> tau;
    std::vector<double> m;
    std::vector<double> m2;
};
MomentTrajectory closed_moment_odes(double lambda, double m0, double m2_0, double tau_end,
                                    double record_every, double dtau = 1e-3);

// dm/dtau = m * int P g - int w P g  (midpoint quadrature on the grid)
double mean_evolution_general_p(const DensityGrid& g, const CompromiseFunction& p);

// piecewise-constant refinement onto factor*cells cells (for grid continuation)
DensityGrid prolong(const DensityGrid& g, int factor);

// cell-averaged density of an initial law (box overlap resolved exactly)
DensityGrid initial_grid(const InitSpec& init, int cells);

} // namespace opkin
