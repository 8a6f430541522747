#include "hermma/herm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hermma {

Eigh jacobi_eigh(const CMat& a_in, double tol)
{
    const int n = static_cast<int>(a_in.rows());
    if (a_in.cols() != n)
        throw std::invalid_argument("jacobi_eigh: matrix is not square");
    CMat a = hermitian_part(a_in);
    CMat v = identity(n);
    const double scale = std::max(a.norm(), 1e-300);

    auto off_norm = [&] {
        double s = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q)
                s += std::norm(a(p, q));
        return std::sqrt(2.0 * s);
    };

    Eigh out;
    constexpr int max_sweeps = 64;
    for (out.sweeps = 0; out.sweeps < max_sweeps && off_norm() > tol * scale; ++out.sweeps) {
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double mag = std::abs(a(p, q));
                if (mag <= 1e-300)
                    continue;
                const cplx phase = a(p, q) / mag;  // e^{i phi}
                const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // J = D R with D = diag(1, conj(phase)) on (p, q)
                for (int k = 0; k < n; ++k) {
                    const cplx akp = a(k, p);
                    const cplx akq = a(k, q) * std::conj(phase);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const cplx apk = a(p, k);
                    const cplx aqk = a(q, k) * phase;
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (int k = 0; k < n; ++k) {
                    const cplx vkp = v(k, p);
                    const cplx vkq = v(k, q) * std::conj(phase);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x).real() < a(y, y).real(); });
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.values(i) = a(order[i], order[i]).real();
        out.vectors.col(i) = v.col(order[i]);
    }
    return out;
}

double hermitian_error(const CMat& a)
{
    double e = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            e = std::max(e, std::abs(a(i, j) - std::conj(a(j, i))));
    return e;
}

cplx trace_with(const CMat& g_inv, const CMat& a)
{
    // g^{i jbar} = (g^{-1})(j, i), so the contraction is tr(g^{-1} a)
    return (g_inv * a).trace();
}

bool is_positive(const CMat& a)
{
    Eigen::LLT<CMat> llt(hermitian_part(a));
    return llt.info() == Eigen::Success;
}

RVec relative_eigenvalues(const CMat& g, const CMat& a)
{
    Eigen::LLT<CMat> llt(g);
    if (llt.info() != Eigen::Success)
        throw std::domain_error("relative_eigenvalues: reference matrix is not positive");
    const CMat l_inv = llt.matrixL().solve(identity(static_cast<int>(g.rows())));
    return jacobi_eigh(l_inv * a * l_inv.adjoint()).values;
}

CMat identity(int n) { return CMat::Identity(n, n); }

}  // namespace hermma
