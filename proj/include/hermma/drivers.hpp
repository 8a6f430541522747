#pragma once

// End-to-end pipelines: volume prescription for Gauduchon metrics, prescribed Chern-Ricci
// curvature, and the torsion-augmented (PHI) route to Gauduchon solutions.

#include <cstdint>
#include <optional>

#include "hermma/solver.hpp"
#include "hermma/testfields.hpp"

namespace hermma {

struct DriverOptions {
    double precondition_tol = 1e-8;
    SolverConfig solver;
    RecordSink sink;
    bool dealias_e_term = false;
};

/// Data F* for which (u*, b*) solves the problem exactly at the nodes, built from the
/// potential's closed-form derivatives.
struct Manufactured {
    ProblemSpec spec;
    ScalarField u_star;  // mean zero
    double b_star = 0.0;
};

Manufactured manufacture(ProblemSpec base, const testfields::RidgePotential& potential, double b_star);

struct CalabiYauResult {
    MatrixField omega_u;
    double b_prime = 0.0;
    SolveReport report;
    double volume_error = 0.0;       // sup |log(det omega_u / det omega) - F' - b'|
    double exponent_error = 0.0;     // sup |log(det Psi_u / det omega^{n-1}) - F - b|, (n-1,n-1) level
    double gauduchon_defect = 0.0;   // of omega_u
    double omega0_gauduchon_defect = 0.0;
    double omega_astheno_defect = 0.0;
};

/// Solves omega_u^n = e^{F' + b'} omega^n with omega_u^{n-1} = omega0^{n-1} + i d dbar u ^ omega^{n-2}.
/// Requires omega astheno-Kahler and omega0 Gauduchon (ValidationError otherwise).
CalabiYauResult calabi_yau_gauduchon(const ProblemSpec& spec, const ScalarField& F_prime,
                                     const DriverOptions& opt = {});

struct RicciResult {
    MatrixField omega_tilde;
    ScalarField F;  // Ric(omega) - psi = i d dbar F, mean zero
    double exactness_error = 0.0;
    double ricci_defect = 0.0;          // sup |Ric(omega~) - psi|
    double ricci_two_way_difference = 0.0;  // direct Ric vs Ric(omega) - d dbar log(omega~^n / omega^n)
    CalabiYauResult solve;
};

/// Metric omega~ with Ric(omega~) = psi. Throws CohomologyError when Ric(omega) - psi is not
/// d dbar-exact (nonzero mean, or not a complex Hessian).
RicciResult prescribed_ricci(const ProblemSpec& spec, const MatrixField& psi, const DriverOptions& opt = {});

struct PhiResult {
    MatrixField omega_tilde;
    double b = 0.0;
    SolveReport report;
    double gauduchon_defect = 0.0;        // of omega_tilde
    double omega0_gauduchon_defect = 0.0;
    double volume_error = 0.0;            // sup |(n-1) log(det omega~ / det omega) - F - b|
};

PhiResult phi_pipeline(const ProblemSpec& spec, const ScalarField& F, const DriverOptions& opt = {});

}  // namespace hermma
