#include "hermma/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "hermma/kernels.hpp"

namespace hermma {

namespace {

double factorial(int m)
{
    double f = 1.0;
    for (int i = 2; i <= m; ++i)
        f *= i;
    return f;
}

double volume_mean(const std::vector<double>& terms)
{
    return kernels::pairwise_sum(terms) / static_cast<double>(terms.size());
}

}  // namespace

BBound b_bound_check(const MongeAmpere& ma, const SolveState& s)
{
    BBound out;
    out.abs_b = std::abs(s.b);
    for (std::size_t k = 0; k < s.u.size(); ++k) {
        out.sup_F = std::max(out.sup_F, std::abs(s.t * ma.spec().F[k].real()));
        if (ma.spec().rhs_volume == RhsVolume::OMEGA_N)
            out.c_meas = std::max(out.c_meas, std::abs(ma.log_det_h()[k].real() - ma.log_det_omega()[k].real()));
    }
    out.slack = out.sup_F + out.c_meas - out.abs_b;
    out.ok = out.slack >= -1e-12;
    return out;
}

C2Record c2_monitor(const MongeAmpere& ma, const SolveState& s)
{
    C2Record out;
    const MatrixField tilde = ma.tilde_metric(s.u);
    const ScalarField grad = grad_norm_sq(ma.spec().omega, s.u);
    double sup_grad = 0.0;
    for (std::size_t k = 0; k < tilde.size(); ++k) {
        out.sup_trace = std::max(out.sup_trace, trace_with(ma.omega_inverse()[k], tilde[k]).real());
        sup_grad = std::max(sup_grad, grad[k].real());
    }
    out.K = sup_grad + 1.0;
    out.ratio = out.sup_trace / out.K;
    return out;
}

EtaBand eta_band(const MongeAmpere& ma, const SolveState& s)
{
    const int n = ma.dim();
    const EtaReport eta = ma.eta_tensor(s.u);
    const MatrixField tilde = ma.tilde_metric(s.u);
    EtaBand out;
    out.dual_formula_gap = eta.max_difference;
    out.min_slack = std::numeric_limits<double>::infinity();
    const double tol = 1e-12;
    for (std::size_t k = 0; k < tilde.size(); ++k) {
        const CMat& g = ma.spec().omega[k];
        const RVec lam = relative_eigenvalues(g, tilde[k]);
        const RVec et = relative_eigenvalues(g, eta.eta[k]);
        const double lmax = lam(n - 1), emax = et(n - 1);
        const double mean_l = lam.sum() / n;
        const double scale = std::max(1.0, lmax);
        const double s1 = (lmax - mean_l) / scale;
        const double s2 = (emax - lmax) / scale;
        const double s3 = ((n - 1) * lmax - emax) / scale;
        const double slack = std::min({s1, s2, s3});
        out.min_slack = std::min(out.min_slack, slack);
        if (slack < -tol)
            ++out.violations;
    }
    return out;
}

std::vector<CherrierRow> cherrier_table(const MongeAmpere& ma, const SolveState& s, const std::vector<double>& p_list)
{
    const int n = ma.dim();
    const std::size_t count = s.u.size();
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < count; ++k)
        top = std::max(top, s.u[k].real());
    const ScalarField grad = grad_norm_sq(ma.spec().omega, s.u);
    const double nf = factorial(n);
    std::vector<double> vol(count);
    for (std::size_t k = 0; k < count; ++k)
        vol[k] = nf * real_det(ma.spec().omega[k]);

    std::vector<CherrierRow> rows;
    for (double p : p_list) {
        CherrierRow row;
        row.p = p;
        std::vector<double> l(count), r(count);
        for (std::size_t k = 0; k < count; ++k) {
            const double e = std::exp(-p * (s.u[k].real() - top));
            // d e^{-p u / 2} = -(p/2) e^{-p u / 2} du
            l[k] = 0.25 * p * p * e * grad[k].real() * vol[k];
            r[k] = e * vol[k];
        }
        row.lhs = volume_mean(l);
        row.rhs = volume_mean(r);
        row.saturated = !std::isfinite(row.lhs) || !std::isfinite(row.rhs);
        row.ratio = row.saturated ? std::numeric_limits<double>::quiet_NaN() : row.lhs / (p * row.rhs);
        rows.push_back(row);
    }
    return rows;
}

void write_cherrier_csv(std::ostream& os, const std::vector<CherrierRow>& rows)
{
    os << "p,lhs,rhs,ratio,saturated\n";
    os.precision(17);
    for (const auto& r : rows)
        os << r.p << ',' << r.lhs << ',' << r.rhs << ',' << r.ratio << ',' << (r.saturated ? 1 : 0) << '\n';
}

CommutationRecord commutation_check(const MatrixField& omega, const ScalarField& u)
{
    return commutation_check(chern_connection(omega), u);
}

CommutationRecord commutation_check(const ConnectionData& conn, const ScalarField& u)
{
    const int n = conn.n;
    const auto du = holo_gradient(u);
    const MatrixField hess = hessian_complex(u);
    std::vector<MatrixField> d_hess(n), db_hess(n);
    for (int l = 0; l < n; ++l) {
        d_hess[l] = d_holo(hess, l);
        db_hess[l] = d_antiholo(hess, l);
    }
    CommutationRecord out;
    const std::size_t count = u.size();

    for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) {
            // u_{i l} = d_l d_i u - Gamma^p_{l i} u_p
            ScalarField uil = d_holo(du[i], l);
            for (int p = 0; p < n; ++p)
                for (std::size_t k = 0; k < count; ++k)
                    uil[k] -= conn.Gamma(l, i, p)[k] * du[p][k];
            const auto d_uil = antiholo_gradient(uil);
            for (int j = 0; j < n; ++j)
                for (std::size_t k = 0; k < count; ++k) {
                    cplx lhs = d_hess[l][k](i, j);
                    cplx rhs = d_uil[j][k];
                    for (int p = 0; p < n; ++p) {
                        lhs -= conn.Gamma(l, i, p)[k] * hess[k](p, j);
                        rhs -= du[p][k] * conn.R(l, j, i, p)[k];
                    }
                    out.first = std::max(out.first, std::abs(lhs - rhs));
                }
        }

    for (int p = 0; p < n; ++p)
        for (int j = 0; j < n; ++j)
            for (int m = 0; m < n; ++m)
                for (std::size_t k = 0; k < count; ++k) {
                    cplx lhs = db_hess[m][k](p, j);
                    cplx rhs = db_hess[j][k](p, m);
                    for (int q = 0; q < n; ++q) {
                        lhs -= std::conj(conn.Gamma(m, j, q)[k]) * hess[k](p, q);
                        rhs -= std::conj(conn.Gamma(j, m, q)[k]) * hess[k](p, q);
                        rhs -= std::conj(conn.T(m, j, q)[k]) * hess[k](p, q);
                    }
                    out.second = std::max(out.second, std::abs(lhs - rhs));
                }
    return out;
}

double phi_closedness(const MongeAmpere& ma, const ScalarField& u)
{
    if (ma.spec().variant != Variant::PHI)
        throw std::logic_error("phi_closedness: requires the PHI variant");
    // (n-1)! (g~ - h) is the star-dual of beta_u with respect to omega
    MatrixField beta = ma.tilde_metric(u) - ma.omega_h();
    beta *= factorial(ma.dim() - 1);
    return sup_norm(ddbar_top(ma.spec().omega, beta));
}

EstimateReport estimate_report(const MongeAmpere& ma, const SolveState& s, const std::vector<double>& p_list)
{
    EstimateReport r;
    r.b_bound = b_bound_check(ma, s);
    r.c2 = c2_monitor(ma, s);
    r.eta = eta_band(ma, s);
    r.cherrier = cherrier_table(ma, s, p_list);
    if (ma.spec().variant == Variant::PHI)
        r.phi_closedness = phi_closedness(ma, s.u);
    return r;
}

}  // namespace hermma
