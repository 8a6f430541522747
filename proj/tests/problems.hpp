#pragma once

#include "hermma/drivers.hpp"
#include "hermma/testfields.hpp"

namespace testing_util {

inline hermma::GridPtr grid3(int m = 16, hermma::DiffMode mode = hermma::DiffMode::spectral)
{
    return hermma::TorusGrid::make(3, {0, 3, 4}, m, mode);
}

inline hermma::ProblemSpec flat_problem(const hermma::GridPtr& grid, hermma::Variant v = hermma::Variant::PSI)
{
    const int n = grid->dim();
    hermma::ProblemSpec s;
    s.variant = v;
    s.omega = hermma::MatrixField(grid, n, hermma::identity(n));
    s.omega0 = s.omega;
    s.F = hermma::ScalarField(grid);
    return s;
}

/// Random background metrics and a ridge potential u*; F* generated forward from (u*, b*).
inline hermma::Manufactured manufactured(const hermma::GridPtr& grid, hermma::Variant v, double amplitude = 0.05,
                                         std::uint64_t seed = 7, double metric_amplitude = 0.08,
                                         double b_star = 0.05)
{
    hermma::testfields::Rng rng(seed);
    hermma::ProblemSpec base;
    base.variant = v;
    base.omega = hermma::testfields::random_metric(grid, rng, metric_amplitude, 2);
    base.omega0 = hermma::testfields::random_metric(grid, rng, metric_amplitude, 2);
    base.F = hermma::ScalarField(grid);
    return hermma::manufacture(base, hermma::testfields::ridge_potential(grid, amplitude, seed + 1), b_star);
}

}  // namespace testing_util
