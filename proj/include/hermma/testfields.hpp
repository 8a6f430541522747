#pragma once

// Deterministic test data: band-limited random metrics and potentials, SKT and Kahler
// metrics, and non-band-limited manufactured potentials with closed-form derivatives.

#include <cstdint>
#include <random>
#include <vector>

#include "hermma/grid.hpp"

namespace hermma::testfields {

using Rng = std::mt19937_64;

/// I + amplitude * sum of `modes` random Hermitian trigonometric modes (wavevector entries in {-1,0,1}).
/// Positive for amplitude * modes < 1/2.
MatrixField random_metric(const GridPtr& grid, Rng& rng, double amplitude = 0.1, int modes = 2);

/// Random real trigonometric polynomial with wavevector entries in [-max_wave, max_wave].
ScalarField random_smooth(const GridPtr& grid, Rng& rng, double amplitude = 1.0, int modes = 3, int max_wave = 2);

/// I + eps (M + M^*), M_{i j} = i dbar_j alpha_i for a random trigonometric (1,0)-form alpha.
/// The result satisfies d dbar omega = 0 but is not Kahler.
MatrixField skt_metric(const GridPtr& grid, Rng& rng, double eps = 0.1);

/// I + eps i d dbar phi for a random potential phi.
MatrixField kahler_metric(const GridPtr& grid, Rng& rng, double eps = 0.05);

/// u(x) = sum_r c_r exp(a_r cos(2 pi k_r . x + phase_r)).
struct RidgePotential {
    struct Ridge {
        std::vector<int> k;  // 2n real-axis wavenumbers
        double a = 1.0;
        double c = 0.0;
        double phase = 0.0;
    };
    int n = 0;
    std::vector<Ridge> ridges;

    ScalarField values(const GridPtr& grid) const;
    /// d_i u
    std::vector<ScalarField> holo_gradient(const GridPtr& grid) const;
    /// d_i dbar_j u
    MatrixField hessian(const GridPtr& grid) const;
};

/// Ridge potential supported on the grid's active axes with oscillation of about `amplitude`.
RidgePotential ridge_potential(const GridPtr& grid, double amplitude, std::uint64_t seed, int ridges = 3);

}  // namespace hermma::testfields
