#include "hermma/testfields.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hermma/geometry.hpp"

namespace hermma::testfields {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<int> random_wave(const GridPtr& grid, Rng& rng, int max_wave)
{
    const auto active = grid->active_axes();
    if (active.empty())
        throw std::invalid_argument("testfields: grid has no active axis");
    std::uniform_int_distribution<int> pick(-max_wave, max_wave);
    std::vector<int> k(grid->axes(), 0);
    bool nonzero = false;
    while (!nonzero) {
        for (int a : active) {
            k[a] = pick(rng);
            nonzero = nonzero || k[a] != 0;
        }
    }
    return k;
}

double phase_at(const GridPtr& grid, std::size_t node, const std::vector<int>& k)
{
    double th = 0.0;
    for (int a = 0; a < grid->axes(); ++a)
        if (k[a] != 0)
            th += kTwoPi * k[a] * grid->coordinate(node, a);
    return th;
}

CMat random_hermitian(int n, Rng& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CMat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = cplx(u(rng), u(rng));
    a = hermitian_part(a);
    const double norm = jacobi_eigh(a).values.cwiseAbs().maxCoeff();
    return a / std::max(norm, 1e-300);
}

}  // namespace

MatrixField random_metric(const GridPtr& grid, Rng& rng, double amplitude, int modes)
{
    const int n = grid->dim();
    MatrixField out(grid, n, identity(n));
    std::uniform_real_distribution<double> ph(0.0, kTwoPi);
    for (int m = 0; m < modes; ++m) {
        const auto k = random_wave(grid, rng, 1);
        const CMat a = random_hermitian(n, rng);
        const double phase = ph(rng);
        for (std::size_t node = 0; node < out.size(); ++node)
            out[node] += (amplitude * std::cos(phase_at(grid, node, k) + phase)) * a;
    }
    return out;
}

ScalarField random_smooth(const GridPtr& grid, Rng& rng, double amplitude, int modes, int max_wave)
{
    ScalarField out(grid);
    std::uniform_real_distribution<double> ph(0.0, kTwoPi), c(-1.0, 1.0);
    for (int m = 0; m < modes; ++m) {
        const auto k = random_wave(grid, rng, max_wave);
        const double phase = ph(rng);
        const double coef = amplitude * c(rng);
        for (std::size_t node = 0; node < out.size(); ++node)
            out[node] += coef * std::cos(phase_at(grid, node, k) + phase);
    }
    return out;
}

MatrixField skt_metric(const GridPtr& grid, Rng& rng, double eps)
{
    const int n = grid->dim();
    MatrixField m(grid, n);
    const double scale = 1.0 / (4.0 * std::numbers::pi * n);
    for (int i = 0; i < n; ++i) {
        ScalarField alpha = random_smooth(grid, rng, scale, 2, 1);
        ScalarField beta = random_smooth(grid, rng, scale, 2, 1);
        for (std::size_t k = 0; k < alpha.size(); ++k)
            alpha[k] += cplx(0.0, 1.0) * beta[k];
        const auto grad = antiholo_gradient(alpha);
        for (int j = 0; j < n; ++j)
            for (std::size_t k = 0; k < m.size(); ++k)
                m[k](i, j) = cplx(0.0, 1.0) * grad[j][k];
    }
    MatrixField out(grid, n, identity(n));
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] += eps * (m[k] + m[k].adjoint());
    require_positive(out, "skt_metric");
    return out;
}

MatrixField kahler_metric(const GridPtr& grid, Rng& rng, double eps)
{
    const int n = grid->dim();
    // scaled so eps is roughly the relative size of the perturbation
    const ScalarField phi = random_smooth(grid, rng, 1.0 / (6.0 * std::numbers::pi * std::numbers::pi), 3, 1);
    MatrixField out = hessian_complex(phi);
    out *= eps;
    out += MatrixField(grid, n, identity(n));
    require_positive(out, "kahler_metric");
    return out;
}

ScalarField RidgePotential::values(const GridPtr& grid) const
{
    ScalarField out(grid);
    for (const auto& r : ridges)
        for (std::size_t node = 0; node < out.size(); ++node)
            out[node] += r.c * std::exp(r.a * std::cos(phase_at(grid, node, r.k) + r.phase));
    return out;
}

std::vector<ScalarField> RidgePotential::holo_gradient(const GridPtr& grid) const
{
    std::vector<ScalarField> out(n, ScalarField(grid));
    for (const auto& r : ridges)
        for (std::size_t node = 0; node < grid->size(); ++node) {
            const double th = phase_at(grid, node, r.k) + r.phase;
            const double d1 = -r.c * r.a * std::sin(th) * std::exp(r.a * std::cos(th));
            for (int i = 0; i < n; ++i) {
                const cplx di(std::numbers::pi * r.k[2 * i], -std::numbers::pi * r.k[2 * i + 1]);
                out[i][node] += d1 * di;
            }
        }
    return out;
}

MatrixField RidgePotential::hessian(const GridPtr& grid) const
{
    MatrixField out(grid, n);
    for (const auto& r : ridges)
        for (std::size_t node = 0; node < grid->size(); ++node) {
            const double th = phase_at(grid, node, r.k) + r.phase;
            const double s = std::sin(th), c = std::cos(th);
            const double d2 = r.c * (r.a * r.a * s * s - r.a * c) * std::exp(r.a * c);
            for (int i = 0; i < n; ++i) {
                const cplx di(std::numbers::pi * r.k[2 * i], -std::numbers::pi * r.k[2 * i + 1]);
                for (int j = 0; j < n; ++j) {
                    const cplx dbj(std::numbers::pi * r.k[2 * j], std::numbers::pi * r.k[2 * j + 1]);
                    out[node](i, j) += d2 * di * dbj;
                }
            }
        }
    return out;
}

RidgePotential ridge_potential(const GridPtr& grid, double amplitude, std::uint64_t seed, int ridges)
{
    Rng rng(seed);
    std::uniform_real_distribution<double> a(0.8, 1.2), ph(0.0, kTwoPi), sign(-1.0, 1.0);
    RidgePotential u;
    u.n = grid->dim();
    for (int r = 0; r < ridges; ++r) {
        RidgePotential::Ridge ridge;
        ridge.k = random_wave(grid, rng, 1);
        ridge.a = a(rng);
        ridge.c = (sign(rng) < 0 ? -1.0 : 1.0) * amplitude / (ridges * std::sinh(ridge.a));
        ridge.phase = ph(rng);
        u.ridges.push_back(std::move(ridge));
    }
    return u;
}

}  // namespace hermma::testfields
