#include "hermma/linear_solver.hpp"

#include <cmath>
#include <vector>

#include "hermma/kernels.hpp"

namespace hermma {

namespace {

double norm2(std::span<const double> v) { return std::sqrt(kernels::dot(v, v)); }

}  // namespace

GmresResult gmres(const LinearMap& a, const LinearMap& precond, std::span<const double> b, std::span<double> x,
                  const GmresOptions& opt)
{
    const std::size_t n = b.size();
    const int m = opt.restart;
    GmresResult res;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }

    std::vector<std::vector<double>> v(m + 1, std::vector<double>(n));
    std::vector<std::vector<double>> h(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m), sn(m), g(m + 1), y(m);
    std::vector<double> w(n), z(n), r(n);
    double previous = INFINITY;

    while (res.iterations < opt.max_iterations) {
        a(x, r);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = b[i] - r[i];
        double beta = norm2(r);
        res.relative_residual = beta / bnorm;
        if (res.relative_residual <= opt.tol) {
            res.converged = true;
            return res;
        }
        // near tol, a cycle gaining less than a factor 2 means the roundoff floor was reached
        if (res.relative_residual <= 100.0 * opt.tol && res.relative_residual > 0.5 * previous)
            return res;
        previous = res.relative_residual;
        for (std::size_t i = 0; i < n; ++i)
            v[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        int k = 0;
        for (; k < m && res.iterations < opt.max_iterations; ++k) {
            ++res.iterations;
            precond(v[k], z);
            a(z, w);
            // modified Gram-Schmidt
            for (int j = 0; j <= k; ++j) {
                h[j][k] = kernels::dot(w, v[j]);
                for (std::size_t i = 0; i < n; ++i)
                    w[i] -= h[j][k] * v[j][i];
            }
            h[k + 1][k] = norm2(w);
            if (h[k + 1][k] > 0.0)
                for (std::size_t i = 0; i < n; ++i)
                    v[k + 1][i] = w[i] / h[k + 1][k];
            for (int j = 0; j < k; ++j) {
                const double t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            const double denom = std::hypot(h[k][k], h[k + 1][k]);
            cs[k] = denom == 0.0 ? 1.0 : h[k][k] / denom;
            sn[k] = denom == 0.0 ? 0.0 : h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            res.relative_residual = std::abs(g[k + 1]) / bnorm;
            if (res.relative_residual <= opt.tol || h[k][k] == 0.0) {
                ++k;
                break;
            }
        }
        // back substitution and update x += M V y
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j)
                s -= h[i][j] * y[j];
            y[i] = h[i][i] == 0.0 ? 0.0 : s / h[i][i];
        }
        std::fill(w.begin(), w.end(), 0.0);
        for (int j = 0; j < k; ++j)
            for (std::size_t i = 0; i < n; ++i)
                w[i] += y[j] * v[j][i];
        precond(w, z);
        for (std::size_t i = 0; i < n; ++i)
            x[i] += z[i];
    }
    a(x, r);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = b[i] - r[i];
    res.relative_residual = norm2(r) / bnorm;
    res.converged = res.relative_residual <= opt.tol;
    return res;
}

}  // namespace hermma
