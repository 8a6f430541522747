#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "hermma/errors.hpp"
#include "hermma/kernels.hpp"
#include "hermma/ma_ops.hpp"
#include "hermma/testfields.hpp"
#include "oracle/exterior.hpp"

using namespace hermma;
using testing_util::rel_diff;

namespace {

ProblemSpec make_spec(const GridPtr& grid, Variant v, std::uint64_t seed, double amp = 0.1)
{
    testfields::Rng rng(seed);
    ProblemSpec s;
    s.variant = v;
    s.omega = testfields::random_metric(grid, rng, amp, 2);
    s.omega0 = testfields::random_metric(grid, rng, amp, 2);
    s.F = testfields::random_smooth(grid, rng, 0.1, 3, 2);
    return s;
}

GridPtr grid3(int m = 16) { return TorusGrid::make(3, {0, 3, 4}, m); }

}  // namespace

TEST_CASE("omega_h of identity and diagonal data")
{
    auto grid = grid3(8);
    ProblemSpec s;
    s.omega = MatrixField(grid, 3, identity(3));
    s.omega0 = s.omega;
    s.F = ScalarField(grid);
    CHECK(sup_norm(MongeAmpere(s).omega_h() - s.omega) < 1e-15);
    CMat d = CMat::Zero(3, 3);
    d.diagonal() << 1.0, 2.0, 3.0;
    s.omega0 = MatrixField(grid, 3, d);
    CMat expect = CMat::Zero(3, 3);
    expect.diagonal() << 6.0, 3.0, 2.0;
    CHECK(rel_diff(MongeAmpere(s).omega_h()[7], expect) < 1e-14);
}

TEST_CASE("problem validation")
{
    auto g2 = TorusGrid::make(2, {0, 3}, 8);
    ProblemSpec s;
    s.variant = Variant::PHI;
    s.omega = MatrixField(g2, 2, identity(2));
    s.omega0 = s.omega;
    s.F = ScalarField(g2);
    CHECK_THROWS_AS(MongeAmpere{s}, std::invalid_argument);
    s.variant = Variant::PSI;
    s.omega0 = MatrixField(g2, 2, -identity(2));
    CHECK_THROWS_AS(MongeAmpere{s}, PositivityError);
}

TEST_CASE("tilde metric closed form on the flat torus")
{
    auto grid = grid3(16);
    ProblemSpec s;
    s.omega = MatrixField(grid, 3, identity(3));
    s.omega0 = s.omega;
    s.F = ScalarField(grid);
    MongeAmpere ma(s);
    const double eps = 0.02;
    ScalarField u(grid);
    for (std::size_t k = 0; k < u.size(); ++k)
        u[k] = eps * std::cos(2 * std::numbers::pi * grid->coordinate(k, 0));
    const MatrixField gt = ma.tilde_metric(u);
    double err = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double c = std::cos(2 * std::numbers::pi * grid->coordinate(k, 0));
        CMat expect = identity(3);
        expect(1, 1) = expect(2, 2) = 1.0 - eps * std::numbers::pi * std::numbers::pi * c / 2.0;
        err = std::max(err, rel_diff(gt[k], expect));
    }
    CHECK(err < 1e-13);
    CHECK(sup_norm(ma.tilde_metric(ScalarField(grid)) - ma.omega_h()) == 0.0);
}

TEST_CASE("trace and reconstruction identities")
{
    auto grid = grid3(16);
    for (Variant v : {Variant::PSI, Variant::PHI}) {
        MongeAmpere ma(make_spec(grid, v, 31));
        testfields::Rng rng(32);
        const ScalarField u = testfields::random_smooth(grid, rng, 0.02, 4, 2);
        const MatrixField gt = ma.tilde_metric(u);
        const MatrixField hess = hessian_complex(u);
        const ScalarField lap = laplacian(ma.spec().omega, u);
        ScalarField hh(grid);
        MatrixField z(grid, 3);
        if (v == Variant::PHI) {
            const ETerm e = ma.e_term(u);
            hh = e.H;
            z = e.Z;
        }
        double trace_err = 0.0, recon_err = 0.0;
        for (std::size_t k = 0; k < grid->size(); ++k) {
            const CMat& gi = ma.omega_inverse()[k];
            const cplx tr_t = trace_with(gi, gt[k]);
            const cplx tr_h = trace_with(gi, ma.omega_h()[k]);
            trace_err = std::max(trace_err, std::abs(tr_t - tr_h - lap[k] - hh[k]));
            const CMat rebuilt = 2.0 * ma.omega_h()[k] + (tr_t - tr_h - hh[k]) * ma.spec().omega[k] - 2.0 * gt[k] +
                                 2.0 * z[k];
            recon_err = std::max(recon_err, (rebuilt - hess[k]).cwiseAbs().maxCoeff());
        }
        CHECK(trace_err < 1e-10);
        CHECK(recon_err < 1e-10);
    }
}

TEST_CASE("E term against the exterior-algebra oracle")
{
    for (int n : {3, 4}) {
        auto grid = n == 3 ? grid3(8) : TorusGrid::make(4, {0, 3, 5}, 8);
        MongeAmpere ma(make_spec(grid, Variant::PHI, 41 + n));
        testfields::Rng rng(43);
        const ScalarField u = testfields::random_smooth(grid, rng, 0.1, 3, 2);
        const ETerm e = ma.e_term(u);
        const auto du = holo_gradient(u);
        std::vector<MatrixField> dbar_g(n);
        for (int k = 0; k < n; ++k)
            dbar_g[k] = d_antiholo(ma.spec().omega, k);
        for (std::size_t node : {std::size_t{0}, std::size_t{77}, grid->size() - 1}) {
            const oracle::Mat g = ma.spec().omega[node];
            Eigen::VectorXcd iu(n);
            for (int l = 0; l < n; ++l)
                iu(l) = cplx(0.0, 1.0) * du[l][node];
            oracle::Form dbar_omega(n);
            for (int k = 0; k < n; ++k) {
                oracle::Form dzb(n);
                dzb.c[oracle::dzbar(n, k)] = 1.0;
                dbar_omega = dbar_omega + oracle::wedge(dzb, oracle::one_one(oracle::Mat(dbar_g[k][node])));
            }
            const oracle::Form om = oracle::one_one(g);
            const oracle::Form dbar_pow = static_cast<double>(n - 2) * oracle::wedge(oracle::power(om, n - 3), dbar_omega);
            const oracle::Form xi = oracle::wedge(oracle::one_zero(iu), dbar_pow);
            const oracle::Form e_form = (0.5 / oracle::factorial(n - 1)) * (xi + oracle::conj(xi));
            const CMat z_oracle = oracle::star_dual(e_form, g);
            CHECK(rel_diff(e.Z[node], z_oracle) < 1e-12);
            // n! E ^ omega = H omega^n, with omega^n = n! det g e_1..e_n
            const cplx lhs = oracle::factorial(n) * oracle::top(oracle::wedge(e_form, om));
            CHECK(std::abs(lhs - e.H[node] * oracle::factorial(n) * g.determinant()) < 1e-12);
        }
    }
}

TEST_CASE("E term linearity, vanishing and bound")
{
    auto grid = grid3(16);
    ProblemSpec flat;
    flat.variant = Variant::PHI;
    flat.omega = MatrixField(grid, 3, identity(3));
    flat.omega0 = flat.omega;
    flat.F = ScalarField(grid);
    testfields::Rng rng(51);
    const ScalarField u = testfields::random_smooth(grid, rng, 0.1, 3, 2);
    const ScalarField v = testfields::random_smooth(grid, rng, 0.1, 3, 2);
    CHECK(sup_norm(MongeAmpere(flat).e_term(u).Z) == 0.0);

    MongeAmpere ma(make_spec(grid, Variant::PHI, 52));
    const ETerm a = ma.e_term(u), b = ma.e_term(v), ab = ma.e_term(u + v);
    CHECK(sup_norm(ab.Z - a.Z - b.Z) < 1e-15);
    CHECK(sup_norm(ab.H - a.H - b.H) < 1e-15);

    // |Z| <= C |du| with C = sqrt(sum_l |C^l|^2) measured from the metric.
    const auto du = holo_gradient(u);
    bool ok = true;
    for (std::size_t k = 0; k < grid->size(); ++k) {
        double c2 = 0.0, g2 = 0.0;
        for (int l = 0; l < 3; ++l) {
            c2 += ma.e_coefficients()[l][k].squaredNorm();
            g2 += std::norm(du[l][k]);
        }
        ok = ok && a.Z[k].norm() <= std::sqrt(c2 * g2) * (1 + 1e-12);
    }
    CHECK(ok);
    CHECK_THROWS_AS(MongeAmpere(make_spec(grid, Variant::PSI, 53)).e_term(u), std::logic_error);
}

TEST_CASE("residual and determinant equation")
{
    auto grid = grid3(8);
    ProblemSpec s;
    s.omega = MatrixField(grid, 3, identity(3));
    s.omega0 = s.omega;
    s.F = ScalarField(grid);
    CHECK(sup_norm(MongeAmpere(s).residual({ScalarField(grid), 0.0, 1.0})) == 0.0);

    MongeAmpere ma(make_spec(grid, Variant::PSI, 61));
    testfields::Rng rng(62);
    SolveState st{testfields::random_smooth(grid, rng, 0.01, 3, 2), 0.3, 0.7};
    const ScalarField r = ma.residual(st);
    const MatrixField gt = ma.tilde_metric(st.u);
    double err = 0.0;
    for (std::size_t k = 0; k < grid->size(); ++k) {
        const double lhs = std::exp(r[k].real() + st.t * ma.spec().F[k].real() + st.b) * real_det(ma.spec().omega[k]);
        err = std::max(err, std::abs(lhs - real_det(gt[k])) / real_det(gt[k]));
    }
    CHECK(err < 1e-12);

    // Residual is blind to constant shifts of u.
    SolveState shifted = st;
    for (std::size_t k = 0; k < grid->size(); ++k)
        shifted.u[k] += 5.0;
    // roundoff of the shifted constant, amplified by second-derivative symbols
    CHECK(sup_norm(ma.residual(shifted) - r) < 1e-12);

    SolveState bad{testfields::random_smooth(grid, rng, 10.0, 3, 2), 0.0, 1.0};
    CHECK_THROWS_AS(ma.residual(bad), PositivityError);
}

TEST_CASE("theta coefficients")
{
    auto grid = grid3(8);
    ProblemSpec s;
    s.omega = MatrixField(grid, 3, identity(3));
    s.omega0 = s.omega;
    s.F = ScalarField(grid);
    MongeAmpere ma(s);
    CHECK(rel_diff(ma.theta(s.omega)[0], identity(3)) < 1e-15);
    CMat d = CMat::Zero(3, 3);
    d.diagonal() << 1.0, 2.0, 3.0;
    CMat expect = CMat::Zero(3, 3);
    expect.diagonal() << 5.0 / 12.0, 2.0 / 3.0, 3.0 / 4.0;
    CHECK(rel_diff(ma.theta(MatrixField(grid, 3, d))[3], expect) < 1e-15);

    MongeAmpere rnd(make_spec(grid, Variant::PSI, 71));
    testfields::Rng rng(72);
    const MatrixField th = rnd.theta(rnd.tilde_metric(testfields::random_smooth(grid, rng, 0.02, 3, 2)));
    CHECK(th.min_eigenvalue() > 0.0);
}

TEST_CASE("linearization matches central differences")
{
    auto grid = grid3(16);
    for (Variant v : {Variant::PSI, Variant::PHI}) {
        MongeAmpere ma(make_spec(grid, v, 81));
        testfields::Rng rng(82);
        const ScalarField u = testfields::random_smooth(grid, rng, 0.02, 3, 2);
        const ScalarField dir = testfields::random_smooth(grid, rng, 1.0, 4, 2);
        const double h = 1e-5;
        SolveState plus{u + h * dir, 0.0, 1.0}, minus{u - h * dir, 0.0, 1.0};
        ScalarField fd = ma.residual(plus) - ma.residual(minus);
        fd *= 1.0 / (2 * h);
        const ScalarField lin = ma.linearized_apply(u, dir);
        CHECK(sup_norm(fd - lin) / sup_norm(lin) < 1e-6);
        CHECK(sup_norm(ma.linearized_apply(u, ScalarField(grid, 3.0))) < 1e-14);
    }
}

TEST_CASE("linearization transpose")
{
    auto grid = grid3(16);
    for (Variant v : {Variant::PSI, Variant::PHI}) {
        MongeAmpere ma(make_spec(grid, v, 91));
        testfields::Rng rng(92);
        const Linearization lin = ma.linearize(testfields::random_smooth(grid, rng, 0.005, 3, 2));
        ScalarField a(grid), b(grid);
        std::normal_distribution<double> nd;
        for (std::size_t k = 0; k < grid->size(); ++k) {
            a[k] = nd(rng);
            b[k] = nd(rng);
        }
        const ScalarField la = lin.apply(a), ltb = lin.apply_transpose(b);
        cplx lhs = 0.0, rhs = 0.0;
        for (std::size_t k = 0; k < grid->size(); ++k) {
            lhs += b[k] * la[k];
            rhs += ltb[k] * a[k];
        }
        CHECK(std::abs(lhs - rhs) < 1e-9 * std::abs(lhs));
    }
}

TEST_CASE("flat linearization is the Laplacian")
{
    auto grid = grid3(16);
    ProblemSpec s;
    s.omega = MatrixField(grid, 3, identity(3));
    s.omega0 = s.omega;
    s.F = ScalarField(grid);
    testfields::Rng rng(95);
    const ScalarField v = testfields::random_smooth(grid, rng, 1.0, 3, 2);
    CHECK(sup_norm(MongeAmpere(s).linearized_apply(ScalarField(grid), v) - flat_laplacian(v)) < 1e-12);
}

TEST_CASE("eta tensor")
{
    auto grid = grid3(8);
    ProblemSpec s;
    s.omega = MatrixField(grid, 3, identity(3));
    CMat d = CMat::Zero(3, 3);
    d.diagonal() << 1.0, 2.0, 3.0;
    s.omega0 = MatrixField(grid, 3, pointwise::nm1_root(identity(3), d));
    s.F = ScalarField(grid);
    const EtaReport rep = MongeAmpere(s).eta_tensor(ScalarField(grid));
    CMat expect = CMat::Zero(3, 3);
    expect.diagonal() << 4.0, 2.0, 0.0;
    CHECK(rel_diff(rep.eta[0], expect) < 1e-13);

    s.omega0 = s.omega;
    CHECK(rel_diff(MongeAmpere(s).eta_tensor(ScalarField(grid)).eta[0], identity(3)) < 1e-15);

    for (Variant v : {Variant::PSI, Variant::PHI}) {
        MongeAmpere ma(make_spec(grid, v, 97));
        testfields::Rng rng(98);
        CHECK(ma.eta_tensor(testfields::random_smooth(grid, rng, 0.02, 3, 2)).max_difference < 1e-12);
    }
}

TEST_CASE("beta_u is d dbar closed")
{
    // (n-1)! (g~ - h) is the star-dual of beta_u with respect to omega.
    auto grid = grid3(16);
    testfields::Rng rng(99);
    ProblemSpec s = make_spec(grid, Variant::PHI, 100);
    MongeAmpere ma(s);
    const ScalarField u = testfields::random_smooth(grid, rng, 0.05, 3, 2);
    const MatrixField beta = 2.0 * (ma.tilde_metric(u) - ma.omega_h());
    CHECK(sup_norm(ddbar_top(s.omega, beta)) < 1e-10);
}
