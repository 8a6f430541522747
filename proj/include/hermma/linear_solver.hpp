#pragma once

#include <functional>
#include <span>

namespace hermma {

using LinearMap = std::function<void(std::span<const double> in, std::span<double> out)>;

struct GmresOptions {
    double tol = 1e-12;  // relative to |b|
    int restart = 60;
    int max_iterations = 600;
};

struct GmresResult {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Restarted GMRES with right preconditioning, solving A x = b. x holds the initial guess.
/// Returns early, unconverged, when a restart cycle stalls within 100 tol.
GmresResult gmres(const LinearMap& a, const LinearMap& precond, std::span<const double> b, std::span<double> x,
                  const GmresOptions& opt = {});

}  // namespace hermma
