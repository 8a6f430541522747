#pragma once

// Newton-continuity solution of the Monge-Ampere family
//   log det g~(u) - log det(ref) = t F + b,  t in [0, 1],
// plus the positive kernel of the adjoint linearization and the Gauduchon conformal factor.
//
// The discrete unknown u excludes Fourier modes with a Nyquist component (spectral
// derivatives vanish there), and the residual is projected the same way so the Newton
// system [L du - db = -r ; mean du = 0] is square.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hermma/linear_solver.hpp"
#include "hermma/ma_ops.hpp"

namespace hermma {

struct IterationRecord {
    double t = 0.0;
    int iter = 0;
    double residual_sup = 0.0;
    double b = 0.0;
    double positivity_margin = 0.0;
    double damping = 0.0;
};

using RecordSink = std::function<void(const IterationRecord&)>;

struct SolverConfig {
    double newton_tol = 1e-10;
    int max_newton = 40;
    std::vector<double> schedule{0.0, 0.25, 0.5, 0.75, 1.0};
    double min_step = 1.0 / 256.0;
    int max_halvings = 12;     // damping factors 1, 1/2, ..., 2^-max_halvings
    int stagnation_window = 5;  // required reduction 0.5 over this many steps
    double linear_tol = 1e-12;
    int gmres_restart = 80;
    int gmres_max_iterations = 1500;

    void validate() const;
};

struct SolveReport {
    SolveState state;                   // mean(u) = 0
    std::vector<double> residual_history;
    std::vector<double> b_history;
    std::vector<IterationRecord> records;
    double positivity_margin = 0.0;     // min eigenvalue of g~ over nodes
    std::optional<double> quadratic_constant;  // max r_{k+1} / r_k^2 over steps with r_k < 1e-2
    int newton_iterations = 0;
    int linear_iterations = 0;

    /// u shifted so that sup u = 0.
    ScalarField normalized_u() const;
};

/// Residual projected off the Nyquist modes; the quantity Newton drives to zero.
ScalarField projected_residual(const MongeAmpere& ma, const SolveState& s);

struct NewtonStep {
    SolveState state;
    double damping = 0.0;
    double residual_before = 0.0;
    double residual_after = 0.0;
    int linear_iterations = 0;
};

/// One damped Newton step. Throws SolverError if the linear solve fails or no damping factor
/// keeps g~ positive while reducing the residual.
NewtonStep newton_step(const MongeAmpere& ma, const SolveState& state, const SolverConfig& cfg);

/// Solves the family from t = 0 to t = 1. Throws SolverError carrying the last good t (-1 when
/// the starting t fails). A warm start begins at initial->t and skips earlier schedule points.
SolveReport continuity_solve(const MongeAmpere& ma, const SolverConfig& cfg, const RecordSink& sink = {},
                             std::optional<SolveState> initial = std::nullopt);

struct AdjointKernel {
    ScalarField f;      // positive, normalized so that the integral of f over the solution volume is 1
    ScalarField sigma;  // log f
    double adjoint_residual = 0.0;  // sup |L* f|
    int iterations = 0;
};

/// Positive kernel function of the adjoint of L with respect to the volume det g~.
AdjointKernel adjoint_kernel(const MongeAmpere& ma, const SolveState& state, const SolverConfig& cfg = {});

/// Integral of f L(zeta) over the solution volume.
double adjoint_pairing(const MongeAmpere& ma, const SolveState& state, const ScalarField& f,
                       const ScalarField& zeta);

struct GauduchonOptions {
    double tol = 1e-9;  // on the projected defect
    int max_iterations = 6;
    double linear_tol = 1e-13;
};

struct GauduchonFactor {
    ScalarField sigma;  // mean zero; e^sigma omega is Gauduchon
    double defect_before = 0.0;
    double defect_after = 0.0;
    double projected_defect = 0.0;  // Nyquist modes removed; the stopping quantity
    int iterations = 0;
};

GauduchonFactor gauduchon_factor(const MatrixField& omega, const GauduchonOptions& opt = {});

}  // namespace hermma
