#pragma once

#include <random>

#include "hermma/herm.hpp"

namespace testing_util {

inline hermma::CMat random_positive(int n, std::mt19937_64& rng, double spread = 1.0)
{
    std::normal_distribution<double> g(0.0, 1.0);
    hermma::CMat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = hermma::cplx(g(rng), g(rng));
    return spread * a * a.adjoint() + hermma::identity(n) * 0.5;
}

inline hermma::CMat random_hermitian(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    hermma::CMat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = hermma::cplx(g(rng), g(rng));
    return hermma::hermitian_part(a);
}

inline hermma::CMat random_complex(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    hermma::CMat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = hermma::cplx(g(rng), g(rng));
    return a;
}

inline double rel_diff(const hermma::CMat& a, const hermma::CMat& b)
{
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace testing_util
