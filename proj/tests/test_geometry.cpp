#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "hermma/geometry.hpp"
#include "hermma/testfields.hpp"
#include "oracle/exterior.hpp"

using namespace hermma;
using testing_util::rel_diff;

namespace {

CMat diag(std::initializer_list<double> d)
{
    CMat m = CMat::Zero(static_cast<int>(d.size()), static_cast<int>(d.size()));
    int i = 0;
    for (double v : d) {
        m(i, i) = v;
        ++i;
    }
    return m;
}

oracle::Mat to_dyn(const CMat& a) { return oracle::Mat(a); }

}  // namespace

TEST_CASE("star_power closed forms")
{
    CHECK(rel_diff(pointwise::star_power(identity(3), identity(3)), identity(3)) < 1e-15);
    CHECK(rel_diff(pointwise::star_power(identity(3), diag({1, 2, 3})), diag({6, 3, 2})) < 1e-14);
    CHECK(rel_diff(pointwise::star_power(identity(2), diag({1.5, 4})), diag({4, 1.5})) < 1e-14);
}

TEST_CASE("nm1_root closed forms")
{
    CHECK(rel_diff(pointwise::nm1_root(identity(3), diag({6, 3, 2})), diag({1, 2, 3})) < 1e-13);
    CHECK(rel_diff(pointwise::nm1_root(identity(4), identity(4)), identity(4)) < 1e-14);
    CHECK_THROWS_AS(pointwise::nm1_root(identity(3), diag({1, -1, 2})), std::domain_error);
}

TEST_CASE("star_power matches the exterior-algebra oracle")
{
    std::mt19937_64 rng(11);
    for (int n = 2; n <= 4; ++n)
        for (int trial = 0; trial < 5; ++trial) {
            const CMat ref = testing_util::random_positive(n, rng);
            const CMat om = testing_util::random_positive(n, rng);
            const oracle::Form psi =
                (1.0 / oracle::factorial(n - 1)) * oracle::power(oracle::one_one(to_dyn(om)), n - 1);
            const CMat expect = oracle::star_dual(psi, to_dyn(ref));
            CHECK(rel_diff(pointwise::star_power(ref, om), expect) < 1e-12);
        }
}

TEST_CASE("determinant of the star power")
{
    std::mt19937_64 rng(12);
    for (int n = 2; n <= 4; ++n) {
        const CMat om = testing_util::random_positive(n, rng);
        const double lhs = real_det(pointwise::star_power(identity(n), om));
        CHECK(lhs == doctest::Approx(std::pow(real_det(om), n - 1)).epsilon(1e-12));
    }
}

TEST_CASE("roundtrip nm1_root(star_power) on random matrices")
{
    std::mt19937_64 rng(13);
    for (int n = 2; n <= 4; ++n) {
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const CMat ref = testing_util::random_positive(n, rng);
            const CMat om = testing_util::random_positive(n, rng);
            worst = std::max(worst, rel_diff(pointwise::nm1_root(ref, pointwise::star_power(ref, om)), om));
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("star_wedge closed forms and oracle")
{
    CHECK(rel_diff(pointwise::star_wedge(identity(3), diag({1, 2, 5})), diag({7, 6, 3})) < 1e-14);
    std::mt19937_64 rng(14);
    for (int n = 3; n <= 4; ++n) {
        const CMat om = testing_util::random_positive(n, rng);
        CHECK(rel_diff(pointwise::star_wedge(om, om), (n - 1.0) * om) < 1e-13);
        CHECK(pointwise::star_wedge(om, CMat::Zero(n, n)).cwiseAbs().maxCoeff() == 0.0);
        for (int trial = 0; trial < 5; ++trial) {
            const CMat alpha = testing_util::random_hermitian(n, rng);
            const oracle::Form f = (1.0 / oracle::factorial(n - 2)) *
                                   oracle::wedge(oracle::one_one(to_dyn(alpha)),
                                                 oracle::power(oracle::one_one(to_dyn(om)), n - 2));
            CHECK(rel_diff(pointwise::star_wedge(om, alpha), oracle::star_dual(f, to_dyn(om))) < 1e-12);
        }
    }
}

TEST_CASE("star_pair_wedge matches the oracle for non-Hermitian input")
{
    std::mt19937_64 rng(15);
    for (int n = 3; n <= 4; ++n)
        for (int trial = 0; trial < 4; ++trial) {
            const CMat g = testing_util::random_positive(n, rng);
            const CMat b = testing_util::random_complex(n, rng);
            const CMat c = testing_util::random_complex(n, rng);
            oracle::Form f = oracle::wedge(oracle::one_one(to_dyn(b)), oracle::one_one(to_dyn(c)));
            f = (1.0 / oracle::factorial(n - 3)) * oracle::wedge(f, oracle::power(oracle::one_one(to_dyn(g)), n - 3));
            const CMat gi = g.inverse();
            CHECK(rel_diff(pointwise::star_pair_wedge(g, gi * b, gi * c), oracle::star_dual(f, to_dyn(g))) < 1e-12);
        }
}

TEST_CASE("mixed_wedge matches the oracle")
{
    std::mt19937_64 rng(16);
    for (int n = 2; n <= 4; ++n) {
        std::vector<CMat> forms;
        oracle::Form f = oracle::one(n);
        for (int k = 0; k < n; ++k) {
            forms.push_back(testing_util::random_complex(n, rng));
            f = oracle::wedge(f, oracle::one_one(to_dyn(forms.back())));
        }
        const cplx expect = oracle::top(f);
        CHECK(std::abs(pointwise::mixed_wedge(forms) - expect) < 1e-12 * std::max(1.0, std::abs(expect)));
        std::vector<CMat> same(n, forms[0]);
        CHECK(std::abs(pointwise::mixed_wedge(same) - oracle::factorial(n) * forms[0].determinant()) <
              1e-11 * std::max(1.0, std::abs(forms[0].determinant())));
    }
}

TEST_CASE("oracle conjugation agrees with the matrix adjoint")
{
    std::mt19937_64 rng(17);
    const CMat a = testing_util::random_complex(3, rng);
    const oracle::Form lhs = oracle::conj(oracle::one_one(to_dyn(a)));
    const oracle::Form rhs = oracle::one_one(to_dyn(CMat(a.adjoint())));
    double err = 0.0;
    for (std::size_t k = 0; k < lhs.c.size(); ++k)
        err = std::max(err, std::abs(lhs.c[k] - rhs.c[k]));
    CHECK(err < 1e-15);
}

TEST_CASE("field star_power validates input")
{
    auto grid = TorusGrid::make(3, {0, 2}, 8);
    MatrixField id(grid, 3, identity(3));
    MatrixField bad(grid, 3, diag({1, -2, 1}));
    CHECK_THROWS(star_power(id, bad));
    auto g2 = TorusGrid::make(2, {0}, 8);
    CHECK_THROWS_AS(star_power(id, MatrixField(g2, 2, identity(2))), std::invalid_argument);
    CHECK_THROWS_AS(star_wedge(MatrixField(g2, 2, identity(2)), MatrixField(g2, 2, identity(2))),
                    std::invalid_argument);
}

TEST_CASE("chern connection of constant and conformally flat metrics")
{
    auto grid = TorusGrid::make(3, {0, 3, 4}, 32);
    const auto flat = chern_connection(MatrixField(grid, 3, identity(3)));
    double worst = 0.0;
    for (const auto& f : flat.gamma)
        worst = std::max(worst, sup_norm(f));
    for (const auto& f : flat.curvature)
        worst = std::max(worst, sup_norm(f));
    CHECK(worst < 1e-14);

    // sigma band-limited; Gamma^k_{ij} = delta_{jk} d_i sigma, checked against central differences.
    ScalarField sigma(grid);
    for (std::size_t k = 0; k < grid->size(); ++k)
        sigma[k] = 0.3 * std::sin(2 * std::numbers::pi * grid->coordinate(k, 0)) +
                   0.2 * std::cos(2 * std::numbers::pi * (grid->coordinate(k, 3) + grid->coordinate(k, 4)));
    const auto conn = chern_connection(conformal(sigma, MatrixField(grid, 3, identity(3))));
    const auto ds = holo_gradient(sigma);
    double err = 0.0, anti = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                err = std::max(err, sup_norm(conn.Gamma(i, j, k) - (j == k ? 1.0 : 0.0) * ds[i]));
                ScalarField t_expect = (j == k ? 1.0 : 0.0) * ds[i] - (i == k ? 1.0 : 0.0) * ds[j];
                err = std::max(err, sup_norm(conn.T(i, j, k) - t_expect));
                anti = std::max(anti, sup_norm(conn.T(i, j, k) + conn.T(j, i, k)));
            }
    CHECK(err < 1e-12);
    CHECK(anti == 0.0);

    // d_1 sigma = (1/2)(d/dx1) sigma = 0.3 pi cos(2 pi x1); central difference in x1 as an outside check.
    const double h = 1e-5;
    const std::size_t node = 5 * grid->sizes()[3] * grid->sizes()[4];
    const double x = grid->coordinate(node, 0);
    const double fd = 0.5 * 0.3 * (std::sin(2 * std::numbers::pi * (x + h)) - std::sin(2 * std::numbers::pi * (x - h))) /
                      (2 * h);
    CHECK(std::abs(conn.Gamma(0, 1, 1)[node] - fd) < 1e-8);
}

TEST_CASE("chern_ricci of conformal metric")
{
    auto grid = TorusGrid::make(3, {0, 3}, 16);
    std::mt19937_64 rng(21);
    const ScalarField sigma = testfields::random_smooth(grid, rng, 0.2, 3, 2);
    const MatrixField ric = chern_ricci(conformal(sigma, MatrixField(grid, 3, identity(3))));
    MatrixField expect = hessian_complex(sigma);
    expect *= -3.0;
    CHECK(sup_norm(ric - expect) < 1e-11);
    CHECK(sup_norm(chern_ricci(MatrixField(grid, 3, identity(3) * 2.0))) < 1e-14);
}

TEST_CASE("ricci difference identity")
{
    auto grid = TorusGrid::make(3, {0, 2, 5}, 16);
    std::mt19937_64 rng(22);
    const MatrixField a = testfields::random_metric(grid, rng, 0.1, 2);
    const MatrixField b = testfields::random_metric(grid, rng, 0.1, 2);
    ScalarField ratio(grid);
    for (std::size_t k = 0; k < ratio.size(); ++k)
        ratio[k] = std::log(real_det(b[k]) / real_det(a[k]));
    MatrixField expect = hessian_complex(ratio);
    expect *= -1.0;
    CHECK(sup_norm(chern_ricci(b) - chern_ricci(a) - expect) < 1e-9);
}

TEST_CASE("metric defects")
{
    auto grid = TorusGrid::make(3, {0, 3, 4}, 16);
    std::mt19937_64 rng(23);
    const auto flat = metric_defects(MatrixField(grid, 3, identity(3)));
    CHECK(flat.gauduchon == 0.0);
    CHECK(flat.astheno.value() == 0.0);
    CHECK(flat.kahler == 0.0);

    const auto kahler = metric_defects(testfields::kahler_metric(grid, rng, 0.05));
    CHECK(kahler.kahler < 1e-12);
    CHECK(kahler.gauduchon < 1e-10);
    CHECK(*kahler.astheno < 1e-10);

    const auto skt = metric_defects(testfields::skt_metric(grid, rng, 0.1));
    CHECK(*skt.astheno < 1e-10);
    CHECK(skt.kahler > 1e-2);

    const auto random = metric_defects(testfields::random_metric(grid, rng, 0.1, 2));
    CHECK(random.gauduchon > 1e-3);

    auto g2 = TorusGrid::make(2, {0, 3}, 16);
    CHECK_FALSE(metric_defects(MatrixField(g2, 2, identity(2))).astheno.has_value());
}

TEST_CASE("gauduchon defect two ways")
{
    // ddbar_top of the star power against the direct expansion of d dbar (omega^{n-1}).
    auto grid = TorusGrid::make(3, {0, 3, 4}, 16);
    std::mt19937_64 rng(24);
    const MatrixField om = testfields::random_metric(grid, rng, 0.1, 2);
    const int n = 3;
    const FormNM1 psi = star_power(MatrixField(grid, n, identity(n)), om);
    const ScalarField top = ddbar_top(psi.reference, psi.star_rep);

    std::vector<MatrixField> d1(n), d1b(n);
    for (int i = 0; i < n; ++i) {
        d1[i] = d_holo(om, i);
        d1b[i] = d_antiholo(om, i);
    }
    double err = 0.0;
    for (std::size_t node = 0; node < grid->size(); node += 37) {
        cplx c = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                CMat e = CMat::Zero(n, n);
                e(i, j) = 1.0;
                const CMat d2 = d_antiholo(d1[i], j)[node];
                // E_ij ^ (2 omega ^ g_{,i jbar} + 2 g_{,i} ^ g_{,jbar}) / 2!
                std::vector<CMat> s1{e, om[node], d2}, s2{e, d1[i][node], d1b[j][node]};
                c += pointwise::mixed_wedge(s1) + pointwise::mixed_wedge(s2);
            }
        err = std::max(err, std::abs(c - top[node]));
    }
    CHECK(err < 1e-10);
}
