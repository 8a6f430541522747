#include "hermma/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hermma/errors.hpp"
#include "hermma/kernels.hpp"

namespace hermma {

namespace pointwise {

CMat star_power(const CMat& ref, const CMat& omega)
{
    const double ratio = real_det(omega) / real_det(ref);
    return hermitian_part(ratio * ref * omega.inverse() * ref);
}

CMat nm1_root(const CMat& ref, const CMat& s)
{
    const int n = static_cast<int>(ref.rows());
    Eigen::LLT<CMat> llt(ref);
    if (llt.info() != Eigen::Success)
        throw std::domain_error("nm1_root: reference metric is not positive");
    const CMat l = llt.matrixL();
    const CMat l_inv = l.inverse();
    const Eigh eig = jacobi_eigh(l_inv * s * l_inv.adjoint());
    if (eig.values(0) <= 0.0)
        throw std::domain_error("nm1_root: form is not positive");
    double log_det = 0.0;
    for (int i = 0; i < n; ++i)
        log_det += std::log(eig.values(i));
    const double det_lambda = std::exp(log_det / (n - 1));
    RVec lambda(n);
    for (int i = 0; i < n; ++i)
        lambda(i) = det_lambda / eig.values(i);
    const CMat a_hat = eig.vectors * lambda.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
    return hermitian_part(l * a_hat * l.adjoint());
}

CMat star_wedge(const CMat& omega, const CMat& alpha)
{
    const cplx tr = trace_with(omega.inverse(), alpha);
    return tr * omega - alpha;
}

CMat star_pair_wedge(const CMat& g, const CMat& b, const CMat& c)
{
    const int n = static_cast<int>(g.rows());
    const cplx tb = b.trace();
    const cplx tc = c.trace();
    const cplx tbc = (b * c).trace();
    const CMat q = (tb * tc - tbc) * identity(n) - tb * c - tc * b + b * c + c * b;
    return g * q;
}

cplx mixed_wedge(std::span<const CMat> forms)
{
    const int n = static_cast<int>(forms.size());
    std::vector<int> tau(n);
    std::iota(tau.begin(), tau.end(), 0);
    cplx total = 0.0;
    CMat rows(n, n);
    do {
        int inversions = 0;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (tau[a] > tau[b])
                    ++inversions;
        bool zero_row = false;
        for (int k = 0; k < n && !zero_row; ++k) {
            rows.row(k) = forms[k].row(tau[k]);
            zero_row = rows.row(k).isZero(0.0);
        }
        if (zero_row)
            continue;
        const cplx d = rows.determinant();
        total += (inversions % 2 == 0) ? d : -d;
    } while (std::next_permutation(tau.begin(), tau.end()));
    return total;
}

CMat to_flat_dual(const CMat& g, const CMat& s)
{
    const CMat g_inv = g.inverse();
    return real_det(g) * g_inv * s * g_inv;
}

}  // namespace pointwise

namespace {

void check_pair(const MatrixField& a, const MatrixField& b, const char* what)
{
    if (a.dim() != b.dim())
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
    if (!a.grid() || !b.grid() || !a.grid()->same_as(*b.grid()))
        throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace

void require_positive(const MatrixField& m, const char* what)
{
    auto bad = m.non_positive_nodes();
    if (!bad.empty())
        throw PositivityError(std::string(what) + ": not positive definite", std::move(bad));
}

FormNM1 star_power(const MatrixField& omega_ref, const MatrixField& omega)
{
    check_pair(omega_ref, omega, "star_power");
    require_positive(omega_ref, "star_power reference");
    require_positive(omega, "star_power input");
    MatrixField out(omega.grid(), omega.dim());
    kernels::for_each_node(out.size(), [&](std::size_t k) { out[k] = pointwise::star_power(omega_ref[k], omega[k]); });
    return {std::move(out), omega_ref};
}

MatrixField nm1_root(const FormNM1& psi)
{
    check_pair(psi.reference, psi.star_rep, "nm1_root");
    require_positive(psi.star_rep, "nm1_root input");
    MatrixField out(psi.star_rep.grid(), psi.star_rep.dim());
    kernels::for_each_node(out.size(),
                           [&](std::size_t k) { out[k] = pointwise::nm1_root(psi.reference[k], psi.star_rep[k]); });
    return out;
}

MatrixField star_wedge(const MatrixField& omega, const MatrixField& alpha)
{
    check_pair(omega, alpha, "star_wedge");
    if (omega.dim() < 3)
        throw std::invalid_argument("star_wedge: requires n >= 3");
    MatrixField out(omega.grid(), omega.dim());
    kernels::for_each_node(out.size(), [&](std::size_t k) { out[k] = pointwise::star_wedge(omega[k], alpha[k]); });
    return out;
}

ConnectionData ConnectionData::from_gamma(std::vector<ScalarField> gamma, int n)
{
    ConnectionData c;
    c.n = n;
    c.gamma = std::move(gamma);
    c.torsion.resize(c.gamma.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                c.torsion[(i * n + j) * n + k] = c.Gamma(i, j, k) - c.Gamma(j, i, k);
    c.curvature.resize(static_cast<std::size_t>(n) * n * n * n);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int p = 0; p < n; ++p) {
                const auto grad = antiholo_gradient(c.Gamma(l, i, p));
                for (int m = 0; m < n; ++m)
                    c.curvature[((l * n + m) * n + i) * n + p] = -1.0 * grad[m];
            }
    return c;
}

ConnectionData chern_connection(const MatrixField& omega)
{
    require_positive(omega, "chern_connection");
    const int n = omega.dim();
    const auto& grid = omega.grid();
    MatrixField g_inv(grid, n);
    kernels::for_each_node(g_inv.size(), [&](std::size_t k) { g_inv[k] = omega[k].inverse(); });

    std::vector<ScalarField> gamma(static_cast<std::size_t>(n) * n * n, ScalarField(grid));
    for (int i = 0; i < n; ++i) {
        const MatrixField dg = d_holo(omega, i);
        for (std::size_t node = 0; node < grid->size(); ++node) {
            const CMat p = dg[node] * g_inv[node];  // p(j, k) = Gamma^k_{ij}
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    gamma[(i * n + j) * n + k][node] = p(j, k);
        }
    }
    return ConnectionData::from_gamma(std::move(gamma), n);
}

MatrixField chern_ricci(const MatrixField& omega)
{
    require_positive(omega, "chern_ricci");
    ScalarField log_det(omega.grid());
    kernels::for_each_node(log_det.size(), [&](std::size_t k) { log_det[k] = std::log(real_det(omega[k])); });
    MatrixField ric = hessian_complex(log_det);
    ric *= -1.0;
    return ric;
}

ScalarField ddbar_contract(const MatrixField& flat_dual, const ScalarField& w)
{
    const auto& grid = flat_dual.grid();
    const int n = flat_dual.dim();
    std::vector<cplx> acc(grid->size(), 0.0), hat(grid->size());
    ScalarField prod(grid);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < prod.size(); ++k)
                prod[k] = flat_dual[k](j, i) * w[k];
            grid->forward(prod.values(), hat);
            const auto& si = grid->holo_symbol(i);
            const auto& sj = grid->antiholo_symbol(j);
            for (std::size_t k = 0; k < hat.size(); ++k)
                acc[k] += si[k] * sj[k] * hat[k];
        }
    ScalarField out(grid);
    grid->inverse(acc, out.values());
    return out;
}

ScalarField ddbar_top(const MatrixField& reference, const MatrixField& star_rep)
{
    check_pair(reference, star_rep, "ddbar_top");
    MatrixField flat(star_rep.grid(), star_rep.dim());
    kernels::for_each_node(flat.size(),
                           [&](std::size_t k) { flat[k] = pointwise::to_flat_dual(reference[k], star_rep[k]); });
    return ddbar_contract(flat, ScalarField(star_rep.grid(), 1.0));
}

MatrixField conformal(const ScalarField& sigma, const MatrixField& omega)
{
    MatrixField out = omega;
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] *= std::exp(sigma[k].real());
    return out;
}

namespace {

double factorial(int m)
{
    double f = 1.0;
    for (int i = 2; i <= m; ++i)
        f *= i;
    return f;
}

CMat elementary(int n, int i, int j)
{
    CMat e = CMat::Zero(n, n);
    e(i, j) = 1.0;
    return e;
}

// Coefficients of E_pq ^ i d dbar (omega^{n-2}) on the top form.
double astheno_defect(const MatrixField& omega)
{
    const int n = omega.dim();
    const int m = n - 2;
    const auto& grid = omega.grid();
    std::vector<MatrixField> d1(n), d1bar(n);
    for (int i = 0; i < n; ++i) {
        d1[i] = d_holo(omega, i);
        d1bar[i] = d_antiholo(omega, i);
    }
    std::vector<MatrixField> d2(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            d2[i * n + j] = d_antiholo(d1[i], j);

    std::vector<double> node_max(grid->size(), 0.0);
    kernels::for_each_node(grid->size(), [&](std::size_t node) {
        std::vector<CMat> slots(n);
        double best = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) {
                cplx c = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        slots[0] = elementary(n, p, q);
                        slots[1] = elementary(n, i, j);
                        // m omega^{m-1} ^ g_{, i jbar}
                        for (int s = 0; s < m - 1; ++s)
                            slots[2 + s] = omega[node];
                        slots[n - 1] = d2[i * n + j][node];
                        c += static_cast<double>(m) * pointwise::mixed_wedge(slots);
                        if (m >= 2) {
                            // m(m-1) omega^{m-2} ^ g_{,i} ^ g_{,jbar}
                            for (int s = 0; s < m - 2; ++s)
                                slots[2 + s] = omega[node];
                            slots[n - 2] = d1[i][node];
                            slots[n - 1] = d1bar[j][node];
                            c += static_cast<double>(m * (m - 1)) * pointwise::mixed_wedge(slots);
                        }
                    }
                best = std::max(best, std::abs(c));
            }
        node_max[node] = best;
    });
    return *std::max_element(node_max.begin(), node_max.end());
}

}  // namespace

double gauduchon_defect(const MatrixField& omega)
{
    const int n = omega.dim();
    const FormNM1 psi = star_power(MatrixField(omega.grid(), n, identity(n)), omega);
    return factorial(n - 1) * sup_norm(ddbar_top(psi.reference, psi.star_rep));
}

MetricDefects metric_defects(const MatrixField& omega)
{
    require_positive(omega, "metric_defects");
    const int n = omega.dim();
    MetricDefects out;
    out.gauduchon = gauduchon_defect(omega);

    if (n >= 3)
        out.astheno = astheno_defect(omega);

    std::vector<MatrixField> d1(n);
    for (int i = 0; i < n; ++i)
        d1[i] = d_holo(omega, i);
    double kahler = 0.0;
    for (std::size_t node = 0; node < omega.size(); ++node)
        for (int k = 0; k < n; ++k)
            for (int i = k + 1; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    kahler = std::max(kahler, std::abs(d1[k][node](i, j) - d1[i][node](k, j)));
    out.kahler = kahler;
    return out;
}

}  // namespace hermma
