#include "hermma/ma_ops.hpp"

#include <cmath>
#include <stdexcept>

#include "hermma/errors.hpp"
#include "hermma/kernels.hpp"

namespace hermma {

void ProblemSpec::validate() const
{
    if (!omega.grid() || !omega0.grid() || !F.grid())
        throw std::invalid_argument("problem: omega, omega0 and F must all be set");
    if (!omega.grid()->same_as(*omega0.grid()) || !omega.grid()->same_as(*F.grid()))
        throw std::invalid_argument("problem: omega, omega0 and F live on different grids");
    if (omega.dim() != omega0.dim() || omega.dim() != omega.grid()->dim())
        throw std::invalid_argument("problem: dimension mismatch");
    if (omega.dim() < 2)
        throw std::invalid_argument("problem: complex dimension must be at least 2");
    if (variant == Variant::PHI && omega.dim() < 3)
        throw std::invalid_argument("problem: the PHI variant requires n >= 3");
    if (F.imag_sup() > 1e-12)
        throw std::invalid_argument("problem: F must be real");
    require_positive(omega, "problem omega");
    require_positive(omega0, "problem omega0");
}

namespace {

ScalarField log_det(const MatrixField& m)
{
    ScalarField out(m.grid());
    kernels::for_each_node(out.size(), [&](std::size_t k) { out[k] = std::log(real_det(m[k])); });
    return out;
}

CMat elementary(int n, int i, int j)
{
    CMat e = CMat::Zero(n, n);
    e(i, j) = 1.0;
    return e;
}

}  // namespace

MongeAmpere::MongeAmpere(ProblemSpec spec, bool dealias_e_term)
    : spec_(std::move(spec)), n_(spec_.dim()), dealias_(dealias_e_term)
{
    spec_.validate();
    const auto& grid = spec_.grid();
    g_inv_ = MatrixField(grid, n_);
    kernels::for_each_node(g_inv_.size(), [&](std::size_t k) { g_inv_[k] = spec_.omega[k].inverse(); });
    h_ = star_power(spec_.omega, spec_.omega0).star_rep;
    logdet_g_ = log_det(spec_.omega);
    logdet_h_ = log_det(h_);

    if (spec_.variant == Variant::PHI) {
        std::vector<MatrixField> dbar_g(n_);
        for (int k = 0; k < n_; ++k)
            dbar_g[k] = d_antiholo(spec_.omega, k);
        const double scale = 1.0 / (n_ - 1);
        c_.assign(n_, MatrixField(grid, n_));
        kernels::for_each_node(grid->size(), [&](std::size_t node) {
            const CMat& g = spec_.omega[node];
            const CMat& gi = g_inv_[node];
            for (int l = 0; l < n_; ++l) {
                CMat acc = CMat::Zero(n_, n_);
                for (int k = 0; k < n_; ++k)
                    acc += pointwise::star_pair_wedge(g, gi * elementary(n_, l, k), gi * dbar_g[k][node]);
                c_[l][node] = scale * acc;
            }
        });
    }
}

const ScalarField& MongeAmpere::log_det_reference() const
{
    return spec_.rhs_volume == RhsVolume::OMEGA_N ? logdet_g_ : logdet_h_;
}

ETerm MongeAmpere::e_term(const ScalarField& u) const
{
    if (spec_.variant != Variant::PHI)
        throw std::logic_error("e_term: only defined for the PHI variant");
    return e_term_from(holo_gradient(u));
}

ETerm MongeAmpere::e_term_from(const std::vector<ScalarField>& du) const
{
    if (spec_.variant != Variant::PHI)
        throw std::logic_error("e_term: only defined for the PHI variant");
    const auto& grid = spec_.grid();
    MatrixField m(grid, n_);
    if (dealias_) {
        for (int l = 0; l < n_; ++l)
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) {
                    const ScalarField p = dealiased_product(du[l], c_[l].entry(i, j));
                    for (std::size_t k = 0; k < m.size(); ++k)
                        m[k](i, j) += p[k];
                }
    } else {
        kernels::for_each_node(m.size(), [&](std::size_t k) {
            for (int l = 0; l < n_; ++l)
                m[k] += du[l][k] * c_[l][k];
        });
    }
    ETerm out{MatrixField(grid, n_), ScalarField(grid)};
    kernels::for_each_node(m.size(), [&](std::size_t k) {
        out.Z[k] = hermitian_part(m[k]);
        out.H[k] = trace_with(g_inv_[k], out.Z[k]).real();
    });
    return out;
}

MatrixField MongeAmpere::tilde_metric(const ScalarField& u) const
{
    std::vector<ScalarField> grad;
    if (spec_.variant == Variant::PHI)
        grad = holo_gradient(u);
    return tilde_metric_from(hessian_complex(u), grad);
}

MatrixField MongeAmpere::tilde_metric_from(const MatrixField& hess, const std::vector<ScalarField>& grad) const
{
    MatrixField out(spec_.grid(), n_);
    const double scale = 1.0 / (n_ - 1);
    kernels::for_each_node(out.size(), [&](std::size_t k) {
        const cplx lap = trace_with(g_inv_[k], hess[k]);
        out[k] = h_[k] + scale * (lap * spec_.omega[k] - hess[k]);
    });
    if (spec_.variant == Variant::PHI)
        out += e_term_from(grad).Z;
    return out;
}

ScalarField MongeAmpere::residual(const SolveState& s) const { return residual(s, tilde_metric(s.u)); }

ScalarField MongeAmpere::residual(const SolveState& s, const MatrixField& tilde) const
{
    auto bad = tilde.non_positive_nodes();
    if (!bad.empty())
        throw PositivityError("residual: tilde metric not positive", std::move(bad));
    const ScalarField& ref = log_det_reference();
    ScalarField r(spec_.grid());
    kernels::for_each_node(r.size(), [&](std::size_t k) {
        r[k] = std::log(real_det(tilde[k])) - ref[k].real() - s.t * spec_.F[k].real() - s.b;
    });
    return r;
}

MatrixField MongeAmpere::theta(const MatrixField& tilde) const
{
    auto bad = tilde.non_positive_nodes();
    if (!bad.empty())
        throw PositivityError("theta: tilde metric not positive", std::move(bad));
    MatrixField out(spec_.grid(), n_);
    const double scale = 1.0 / (n_ - 1);
    kernels::for_each_node(out.size(), [&](std::size_t k) {
        const CMat ti = tilde[k].inverse();
        const cplx tr = trace_with(ti, spec_.omega[k]);
        out[k] = hermitian_part(scale * (tr * g_inv_[k] - ti));
    });
    return out;
}

Linearization MongeAmpere::linearize(const ScalarField& u) const
{
    const MatrixField tilde = tilde_metric(u);
    Linearization lin;
    lin.theta_ = theta(tilde);
    lin.tilde_inv_ = MatrixField(spec_.grid(), n_);
    kernels::for_each_node(tilde.size(), [&](std::size_t k) { lin.tilde_inv_[k] = tilde[k].inverse(); });
    if (spec_.variant == Variant::PHI) {
        lin.a_.assign(n_, ScalarField(spec_.grid()));
        lin.b_.assign(n_, ScalarField(spec_.grid()));
        kernels::for_each_node(tilde.size(), [&](std::size_t k) {
            for (int l = 0; l < n_; ++l) {
                lin.a_[l][k] = 0.5 * trace_with(lin.tilde_inv_[k], c_[l][k]);
                lin.b_[l][k] = 0.5 * trace_with(lin.tilde_inv_[k], c_[l][k].adjoint());
            }
        });
    }
    return lin;
}

ScalarField MongeAmpere::linearized_apply(const ScalarField& u, const ScalarField& v) const
{
    return linearize(u).apply(v);
}

ScalarField Linearization::apply(const ScalarField& v) const
{
    const MatrixField hess = hessian_complex(v);
    ScalarField out(v.grid());
    kernels::for_each_node(out.size(), [&](std::size_t k) { out[k] = (theta_[k] * hess[k]).trace(); });
    if (!a_.empty()) {
        const auto dv = holo_gradient(v);
        const auto dbv = antiholo_gradient(v);
        kernels::for_each_node(out.size(), [&](std::size_t k) {
            for (std::size_t l = 0; l < a_.size(); ++l)
                out[k] += a_[l][k] * dv[l][k] + b_[l][k] * dbv[l][k];
        });
    }
    return out;
}

ScalarField Linearization::apply_transpose(const ScalarField& w) const
{
    ScalarField out = ddbar_contract(theta_, w);
    for (std::size_t l = 0; l < a_.size(); ++l) {
        ScalarField aw(w.grid()), bw(w.grid());
        for (std::size_t k = 0; k < w.size(); ++k) {
            aw[k] = a_[l][k] * w[k];
            bw[k] = b_[l][k] * w[k];
        }
        out -= d_holo(aw, static_cast<int>(l));
        out -= d_antiholo(bw, static_cast<int>(l));
    }
    return out;
}

CMat Linearization::mean_theta() const
{
    const int n = theta_.dim();
    CMat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out(i, j) = mean(theta_.entry(i, j));
    return out;
}

std::vector<cplx> Linearization::mean_symbol(bool transpose) const
{
    const auto& grid = theta_.grid();
    const int n = theta_.dim();
    const CMat th = mean_theta();
    std::vector<cplx> a_mean(a_.size()), b_mean(b_.size());
    for (std::size_t l = 0; l < a_.size(); ++l) {
        a_mean[l] = mean(a_[l]);
        b_mean[l] = mean(b_[l]);
    }
    const double sign = transpose ? -1.0 : 1.0;
    std::vector<cplx> out(grid->size(), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto& hj = grid->holo_symbol(j);
            const auto& ai = grid->antiholo_symbol(i);
            for (std::size_t k = 0; k < out.size(); ++k)
                out[k] += th(i, j) * hj[k] * ai[k];
        }
    for (std::size_t l = 0; l < a_mean.size(); ++l) {
        const auto& hl = grid->holo_symbol(static_cast<int>(l));
        const auto& al = grid->antiholo_symbol(static_cast<int>(l));
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] += sign * (a_mean[l] * hl[k] + b_mean[l] * al[k]);
    }
    return out;
}

EtaReport MongeAmpere::eta_tensor(const ScalarField& u) const
{
    const MatrixField tilde = tilde_metric(u);
    const MatrixField hess = hessian_complex(u);
    std::optional<ETerm> e;
    if (spec_.variant == Variant::PHI)
        e = e_term(u);
    EtaReport rep{MatrixField(spec_.grid(), n_), MatrixField(spec_.grid(), n_), 0.0};
    const double nm1 = n_ - 1;
    std::vector<double> diff(tilde.size());
    kernels::for_each_node(tilde.size(), [&](std::size_t k) {
        const CMat& g = spec_.omega[k];
        rep.eta[k] = trace_with(g_inv_[k], tilde[k]) * g - nm1 * tilde[k];
        CMat alt = hess[k] + trace_with(g_inv_[k], h_[k]) * g - nm1 * h_[k];
        if (e)
            alt += e->H[k] * g - nm1 * e->Z[k];
        rep.eta_alt[k] = alt;
        diff[k] = (rep.eta[k] - alt).cwiseAbs().maxCoeff();
    });
    for (double d : diff)
        rep.max_difference = std::max(rep.max_difference, d);
    return rep;
}

}  // namespace hermma
