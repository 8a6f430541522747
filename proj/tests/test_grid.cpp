#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hermma/grid.hpp"
#include "hermma/testfields.hpp"
#include "problems.hpp"

using namespace hermma;
using std::numbers::pi;

namespace {

ScalarField sample(const GridPtr& grid, auto&& fn)
{
    ScalarField f(grid);
    for (std::size_t k = 0; k < f.size(); ++k) {
        std::vector<double> x(grid->axes());
        for (int a = 0; a < grid->axes(); ++a)
            x[a] = grid->coordinate(k, a);
        f[k] = fn(x);
    }
    return f;
}

}  // namespace

TEST_CASE("grid construction rules")
{
    CHECK_THROWS_AS(TorusGrid(3, {12, 1, 1, 16, 16, 1}), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(3, {2, 1, 1, 16, 16, 1}), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(3, {16, 1, 1, 16}), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(2, {64, 64, 64, 64}, DiffMode::spectral, 1u << 20), std::invalid_argument);
    CHECK_THROWS_AS(TorusGrid(5, {4, 4, 4, 4, 4, 4, 4, 4, 4, 4}), std::invalid_argument);
    auto g = TorusGrid::make(3, {0, 3, 4}, 8);
    CHECK(g->size() == 512);
    CHECK(g->active_axes() == std::vector<int>{0, 3, 4});
    CHECK(g->sizes() == std::vector<int>{8, 1, 1, 8, 8, 1});
}

TEST_CASE("derivatives of a single Fourier mode")
{
    auto grid = testing_util::grid3(16);
    const ScalarField f = sample(grid, [](const auto& x) { return std::exp(cplx(0, 2 * pi * x[0])); });
    const ScalarField expect = cplx(0, pi) * f;
    CHECK(sup_norm(d_holo(f, 0) - expect) < 1e-12);
    CHECK(sup_norm(d_antiholo(f, 0) - expect) < 1e-12);
    CHECK(sup_norm(d_holo(f, 1)) == 0.0);

    // y-mode: d_2 = (d_x - i d_y)/2 picks up -i * (2 pi i)/2 = pi
    const ScalarField g = sample(grid, [](const auto& x) { return std::exp(cplx(0, 2 * pi * 3 * x[3])); });
    CHECK(sup_norm(d_holo(g, 1) - cplx(3 * pi, 0) * g) < 1e-11);
    CHECK(sup_norm(d_antiholo(g, 1) - cplx(-3 * pi, 0) * g) < 1e-11);
}

TEST_CASE("spectral exactness over random modes")
{
    auto grid = testing_util::grid3(16);
    const std::vector<std::array<int, 3>> modes{{1, -2, 3}, {-7, 5, 0}, {4, 4, -6}};
    for (const auto& m : modes) {
        const ScalarField f = sample(grid, [&](const auto& x) {
            return std::exp(cplx(0, 2 * pi * (m[0] * x[0] + m[1] * x[3] + m[2] * x[4])));
        });
        // holomorphic symbols: pi*i*k_x for x-axes, pi*k_y for y-axes
        const cplx s0(0, pi * m[0]), s1(pi * m[1], 0), s2(0, pi * m[2]);
        CHECK(sup_norm(d_holo(f, 0) - s0 * f) < 1e-12 * 16 * pi);
        CHECK(sup_norm(d_holo(f, 1) - s1 * f) < 1e-12 * 16 * pi);
        CHECK(sup_norm(d_holo(f, 2) - s2 * f) < 1e-12 * 16 * pi);
    }
}

TEST_CASE("constant fields have zero derivatives")
{
    auto grid = testing_util::grid3(8);
    const ScalarField c(grid, 2.5);
    for (int k = 0; k < 3; ++k) {
        CHECK(sup_norm(d_holo(c, k)) < 1e-15);
        CHECK(sup_norm(d_antiholo(c, k)) < 1e-15);
    }
    CHECK(sup_norm(hessian_complex(c)) < 1e-15);
    CHECK(mean(c) == cplx(2.5));
    CHECK(sup_norm(c) == 2.5);
}

TEST_CASE("conjugation symmetry of derivatives")
{
    auto grid = testing_util::grid3(16);
    testfields::Rng rng(3);
    const ScalarField f = testfields::random_smooth(grid, rng, 1.0, 4, 3);
    CHECK(f.imag_sup() == 0.0);
    for (int k = 0; k < 3; ++k) {
        const ScalarField a = d_holo(f, k);
        ScalarField conj_a(grid);
        for (std::size_t i = 0; i < a.size(); ++i)
            conj_a[i] = std::conj(a[i]);
        CHECK(sup_norm(conj_a - d_antiholo(f, k)) < 1e-12);
    }
    CHECK(hessian_complex(f).hermitian_error() < 1e-12);
}

TEST_CASE("hessian, laplacian and gradient of cos(2 pi x1)")
{
    auto grid = testing_util::grid3(16);
    const ScalarField u = sample(grid, [](const auto& x) { return std::cos(2 * pi * x[0]); });
    const MatrixField h = hessian_complex(u);
    const MatrixField flat(grid, 3, identity(3));
    const ScalarField lap = laplacian(flat, u);
    const ScalarField gn = grad_norm_sq(flat, u);
    double err = 0.0, lap_err = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        CMat expect = CMat::Zero(3, 3);
        expect(0, 0) = -pi * pi * u[k].real();
        err = std::max(err, (h[k] - expect).cwiseAbs().maxCoeff());
        lap_err = std::max(lap_err, std::abs(lap[k] + pi * pi * u[k]));
        CHECK(gn[k].real() >= 0.0);
    }
    CHECK(err < 1e-11);
    CHECK(lap_err < 1e-11);
    CHECK(std::abs(mean(lap)) < 1e-14);
    CHECK(sup_norm(gn) == doctest::Approx(pi * pi).epsilon(1e-12));

    testfields::Rng rng(4);
    const ScalarField v = testfields::random_smooth(grid, rng);
    const MatrixField g = testfields::random_metric(grid, rng);
    const ScalarField lhs = laplacian(g, 2.0 * u + (-3.0) * v);
    const ScalarField rhs = 2.0 * laplacian(g, u) + (-3.0) * laplacian(g, v);
    CHECK(sup_norm(lhs - rhs) < 1e-11);
}

TEST_CASE("Parseval")
{
    auto grid = testing_util::grid3(16);
    testfields::Rng rng(8);
    const ScalarField f = testfields::random_smooth(grid, rng, 1.0, 5, 4);
    double phys = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
        phys += std::norm(f[k]);
    phys /= static_cast<double>(f.size());
    CHECK(std::abs(spectral_mean_square(f) - phys) < 1e-12 * phys);
}

TEST_CASE("reduced ansatz: fields constant along inactive axes")
{
    auto grid = testing_util::grid3(16);
    // depends on x1 and y2 only; d_3 sees neither
    const ScalarField f = sample(grid, [](const auto& x) { return std::sin(2 * pi * x[0]) * std::cos(4 * pi * x[3]); });
    CHECK(sup_norm(d_holo(f, 2)) == 0.0);
    CHECK(sup_norm(d_antiholo(f, 2)) == 0.0);
    // d_1 = d_x1 / 2 since y1 is inactive
    const ScalarField expect = sample(grid, [](const auto& x) {
        return pi * std::cos(2 * pi * x[0]) * std::cos(4 * pi * x[3]);
    });
    CHECK(sup_norm(d_holo(f, 0) - expect) < 1e-12);
}

TEST_CASE("finite-difference mode uses the sine symbol")
{
    auto grid = testing_util::grid3(16, DiffMode::finite_difference);
    const ScalarField f = sample(grid, [](const auto& x) { return std::exp(cplx(0, 2 * pi * x[0])); });
    const double s = std::sin(2 * pi / 16) * 16 / 2;
    CHECK(sup_norm(d_holo(f, 0) - cplx(0, s) * f) < 1e-12);
}

TEST_CASE("nyquist filter")
{
    auto grid = testing_util::grid3(8);
    const ScalarField nyq = sample(grid, [](const auto& x) { return std::cos(8 * pi * x[0]) * std::cos(2 * pi * x[4]); });
    CHECK(sup_norm(nyquist_filtered(nyq)) < 1e-15);
    const ScalarField low = sample(grid, [](const auto& x) { return std::cos(6 * pi * x[0]) + std::sin(2 * pi * x[3]); });
    CHECK(sup_norm(nyquist_filtered(low) - low) < 1e-14);
}

TEST_CASE("inverse flat laplacian")
{
    auto grid = testing_util::grid3(16);
    testfields::Rng rng(12);
    const ScalarField f = testfields::random_smooth(grid, rng, 1.0, 4, 3);
    const ScalarField v = inverse_flat_laplacian(f);
    CHECK(std::abs(mean(v)) < 1e-15);
    CHECK(sup_norm(flat_laplacian(v) - (f - ScalarField(grid, mean(f)))) < 1e-12);
}

TEST_CASE("dealiased product of band-limited fields is exact")
{
    auto grid = testing_util::grid3(16);
    const ScalarField a = sample(grid, [](const auto& x) { return std::cos(2 * pi * 3 * x[0]) + std::sin(2 * pi * x[4]); });
    const ScalarField b = sample(grid, [](const auto& x) { return std::sin(2 * pi * 2 * x[3]) + 0.5; });
    ScalarField ab(grid);
    for (std::size_t k = 0; k < ab.size(); ++k)
        ab[k] = a[k] * b[k];
    CHECK(sup_norm(dealiased_product(a, b) - ab) < 1e-13);
}

TEST_CASE("fields on different grids do not mix")
{
    const ScalarField a(testing_util::grid3(8), 1.0);
    const ScalarField b(testing_util::grid3(16), 1.0);
    CHECK_THROWS_AS(a + b, std::invalid_argument);
}
