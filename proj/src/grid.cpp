#include "hermma/grid.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fftw3.h>

#include "hermma/kernels.hpp"

namespace hermma {

namespace {

std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

fftw_complex* as_fftw(const cplx* p) { return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p)); }

fftw_plan make_plan(const std::vector<int>& sizes, int sign)
{
    std::lock_guard lock(planner_mutex());
    std::size_t count = 1;
    for (int s : sizes)
        count *= static_cast<std::size_t>(s);
    std::vector<cplx> a(count), b(count);
    return fftw_plan_dft(static_cast<int>(sizes.size()), sizes.data(), as_fftw(a.data()), as_fftw(b.data()), sign,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
}

void destroy_plan(void* p)
{
    if (p) {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(static_cast<fftw_plan>(p));
    }
}

void check_same_grid(const GridPtr& a, const GridPtr& b, const char* where)
{
    if (!a || !b || !a->same_as(*b))
        throw std::invalid_argument(std::string(where) + ": fields live on different grids");
}

}  // namespace

// ---- TorusGrid ---------------------------------------------------------------

TorusGrid::TorusGrid(int n, std::vector<int> sizes, DiffMode mode, std::size_t node_budget)
    : n_(n), sizes_(std::move(sizes)), mode_(mode)
{
    if (n < 1 || n > kMaxDim)
        throw std::invalid_argument("TorusGrid: complex dimension must be in [1, 4]");
    if (static_cast<int>(sizes_.size()) != 2 * n)
        throw std::invalid_argument("TorusGrid: expected 2n axis sizes");
    count_ = 1;
    for (int s : sizes_) {
        if (s != 1 && (!is_power_of_two(s) || s < 4))
            throw std::invalid_argument("TorusGrid: active axis sizes must be powers of two >= 4, got " +
                                        std::to_string(s));
        count_ *= static_cast<std::size_t>(s);
    }
    if (count_ > node_budget)
        throw std::invalid_argument("TorusGrid: " + std::to_string(count_) + " nodes exceeds budget of " +
                                    std::to_string(node_budget));

    strides_.assign(sizes_.size(), 1);
    for (int a = static_cast<int>(sizes_.size()) - 2; a >= 0; --a)
        strides_[a] = strides_[a + 1] * static_cast<std::size_t>(sizes_[a + 1]);

    // Real-axis derivative symbol. Spectral: 2 pi i k with the Nyquist mode dropped.
    // Finite differences: second-order central difference, i sin(2 pi k / M) M.
    auto axis_symbol = [&](std::size_t node, int axis) -> cplx {
        const int m = sizes_[axis];
        if (m == 1)
            return 0.0;
        const int k = wavenumber(node, axis);
        if (2 * k == m)
            return 0.0;
        if (mode_ == DiffMode::spectral)
            return {0.0, 2.0 * std::numbers::pi * k};
        return {0.0, std::sin(2.0 * std::numbers::pi * k / m) * m};
    };

    holo_.assign(n_, std::vector<cplx>(count_));
    antiholo_.assign(n_, std::vector<cplx>(count_));
    for (std::size_t node = 0; node < count_; ++node) {
        for (int k = 0; k < n_; ++k) {
            const cplx dx = axis_symbol(node, 2 * k);
            const cplx dy = axis_symbol(node, 2 * k + 1);
            holo_[k][node] = 0.5 * (dx - cplx(0.0, 1.0) * dy);
            antiholo_[k][node] = 0.5 * (dx + cplx(0.0, 1.0) * dy);
        }
    }

    plan_forward_ = make_plan(sizes_, FFTW_FORWARD);
    plan_inverse_ = make_plan(sizes_, FFTW_BACKWARD);
}

TorusGrid::~TorusGrid()
{
    destroy_plan(plan_forward_);
    destroy_plan(plan_inverse_);
}

std::shared_ptr<const TorusGrid> TorusGrid::make(int n, const std::vector<int>& active_axes, int points, DiffMode mode)
{
    std::vector<int> sizes(2 * n, 1);
    for (int a : active_axes) {
        if (a < 0 || a >= 2 * n)
            throw std::invalid_argument("TorusGrid::make: axis out of range");
        sizes[a] = points;
    }
    return std::make_shared<const TorusGrid>(n, std::move(sizes), mode);
}

std::vector<bool> TorusGrid::active_mask() const
{
    std::vector<bool> m(sizes_.size());
    for (std::size_t a = 0; a < sizes_.size(); ++a)
        m[a] = sizes_[a] > 1;
    return m;
}

std::vector<int> TorusGrid::active_axes() const
{
    std::vector<int> out;
    for (int a = 0; a < axes(); ++a)
        if (sizes_[a] > 1)
            out.push_back(a);
    return out;
}

double TorusGrid::coordinate(std::size_t node, int axis) const
{
    const std::size_t idx = (node / strides_[axis]) % static_cast<std::size_t>(sizes_[axis]);
    return static_cast<double>(idx) / sizes_[axis];
}

int TorusGrid::wavenumber(std::size_t node, int axis) const
{
    const int m = sizes_[axis];
    const int idx = static_cast<int>((node / strides_[axis]) % static_cast<std::size_t>(m));
    return idx <= m / 2 ? idx : idx - m;
}

bool TorusGrid::is_nyquist(std::size_t node) const
{
    for (int a = 0; a < axes(); ++a)
        if (sizes_[a] > 1 && 2 * wavenumber(node, a) == sizes_[a])
            return true;
    return false;
}

void TorusGrid::forward(std::span<const cplx> in, std::span<cplx> out) const
{
    fftw_execute_dft(static_cast<fftw_plan>(plan_forward_), as_fftw(in.data()), as_fftw(out.data()));
}

void TorusGrid::inverse(std::span<const cplx> in, std::span<cplx> out) const
{
    fftw_execute_dft(static_cast<fftw_plan>(plan_inverse_), as_fftw(in.data()), as_fftw(out.data()));
    const double s = 1.0 / static_cast<double>(count_);
    for (auto& v : out)
        v *= s;
}

bool TorusGrid::same_as(const TorusGrid& other) const noexcept
{
    return this == &other || (n_ == other.n_ && sizes_ == other.sizes_ && mode_ == other.mode_);
}

// ---- ScalarField -------------------------------------------------------------

ScalarField::ScalarField(GridPtr grid, cplx fill) : grid_(std::move(grid)), values_(grid_->size(), fill) {}

ScalarField::ScalarField(GridPtr grid, std::vector<cplx> values) : grid_(std::move(grid)), values_(std::move(values))
{
    if (values_.size() != grid_->size())
        throw std::invalid_argument("ScalarField: value count does not match grid");
}

std::vector<double> ScalarField::real_values() const
{
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i)
        out[i] = values_[i].real();
    return out;
}

double ScalarField::imag_sup() const
{
    double m = 0.0;
    for (const auto& v : values_)
        m = std::max(m, std::abs(v.imag()));
    return m;
}

ScalarField& ScalarField::make_real()
{
    for (auto& v : values_)
        v = v.real();
    return *this;
}

ScalarField& ScalarField::operator+=(const ScalarField& o)
{
    check_same_grid(grid_, o.grid_, "ScalarField +=");
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] += o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o)
{
    check_same_grid(grid_, o.grid_, "ScalarField -=");
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] -= o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(cplx s)
{
    for (auto& v : values_)
        v *= s;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(cplx s, ScalarField a) { return a *= s; }

// ---- MatrixField -------------------------------------------------------------

MatrixField::MatrixField(GridPtr grid, int n) : MatrixField(std::move(grid), n, CMat::Zero(n, n)) {}

MatrixField::MatrixField(GridPtr grid, int n, const CMat& fill) : grid_(std::move(grid)), n_(n)
{
    if (fill.rows() != n || fill.cols() != n)
        throw std::invalid_argument("MatrixField: fill matrix has wrong shape");
    values_.assign(grid_->size(), fill);
}

ScalarField MatrixField::entry(int i, int j) const
{
    ScalarField f(grid_);
    for (std::size_t k = 0; k < values_.size(); ++k)
        f[k] = values_[k](i, j);
    return f;
}

void MatrixField::set_entry(int i, int j, const ScalarField& f)
{
    check_same_grid(grid_, f.grid(), "MatrixField::set_entry");
    for (std::size_t k = 0; k < values_.size(); ++k)
        values_[k](i, j) = f[k];
}

double MatrixField::hermitian_error() const
{
    double e = 0.0;
    for (const auto& m : values_)
        e = std::max(e, hermma::hermitian_error(m));
    return e;
}

double MatrixField::min_eigenvalue(const MatrixField* reference) const
{
    std::vector<double> mins(values_.size());
    kernels::for_each_node(values_.size(), [&](std::size_t k) {
        mins[k] = reference ? relative_eigenvalues((*reference)[k], values_[k])(0)
                            : jacobi_eigh(values_[k]).values(0);
    });
    return *std::min_element(mins.begin(), mins.end());
}

std::vector<std::size_t> MatrixField::non_positive_nodes() const
{
    std::vector<char> bad(values_.size(), 0);
    kernels::for_each_node(values_.size(), [&](std::size_t k) { bad[k] = is_positive(values_[k]) ? 0 : 1; });
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < bad.size(); ++k)
        if (bad[k])
            out.push_back(k);
    return out;
}

MatrixField& MatrixField::operator+=(const MatrixField& o)
{
    check_same_grid(grid_, o.grid_, "MatrixField +=");
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] += o.values_[i];
    return *this;
}

MatrixField& MatrixField::operator-=(const MatrixField& o)
{
    check_same_grid(grid_, o.grid_, "MatrixField -=");
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] -= o.values_[i];
    return *this;
}

MatrixField& MatrixField::operator*=(cplx s)
{
    for (auto& v : values_)
        v *= s;
    return *this;
}

MatrixField operator+(MatrixField a, const MatrixField& b) { return a += b; }
MatrixField operator-(MatrixField a, const MatrixField& b) { return a -= b; }
MatrixField operator*(cplx s, MatrixField a) { return a *= s; }

// ---- differential operators --------------------------------------------------

namespace {

std::vector<cplx> spectrum(const ScalarField& f)
{
    std::vector<cplx> hat(f.size());
    f.grid()->forward(f.values(), hat);
    return hat;
}

ScalarField apply_symbol(const GridPtr& grid, const std::vector<cplx>& hat, const std::vector<cplx>& symbol)
{
    std::vector<cplx> tmp(hat.size());
    for (std::size_t i = 0; i < hat.size(); ++i)
        tmp[i] = hat[i] * symbol[i];
    ScalarField out(grid);
    grid->inverse(tmp, out.values());
    return out;
}

ScalarField apply_symbol2(const GridPtr& grid, const std::vector<cplx>& hat, const std::vector<cplx>& s1,
                          const std::vector<cplx>& s2)
{
    std::vector<cplx> tmp(hat.size());
    for (std::size_t i = 0; i < hat.size(); ++i)
        tmp[i] = hat[i] * s1[i] * s2[i];
    ScalarField out(grid);
    grid->inverse(tmp, out.values());
    return out;
}

}  // namespace

ScalarField d_holo(const ScalarField& f, int k)
{
    return apply_symbol(f.grid(), spectrum(f), f.grid()->holo_symbol(k));
}

ScalarField d_antiholo(const ScalarField& f, int k)
{
    return apply_symbol(f.grid(), spectrum(f), f.grid()->antiholo_symbol(k));
}

std::vector<ScalarField> holo_gradient(const ScalarField& f)
{
    const auto hat = spectrum(f);
    std::vector<ScalarField> out;
    for (int k = 0; k < f.grid()->dim(); ++k)
        out.push_back(apply_symbol(f.grid(), hat, f.grid()->holo_symbol(k)));
    return out;
}

std::vector<ScalarField> antiholo_gradient(const ScalarField& f)
{
    const auto hat = spectrum(f);
    std::vector<ScalarField> out;
    for (int k = 0; k < f.grid()->dim(); ++k)
        out.push_back(apply_symbol(f.grid(), hat, f.grid()->antiholo_symbol(k)));
    return out;
}

MatrixField hessian_complex(const ScalarField& u)
{
    const auto& grid = u.grid();
    const int n = grid->dim();
    const auto hat = spectrum(u);
    MatrixField h(grid, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            h.set_entry(i, j, apply_symbol2(grid, hat, grid->holo_symbol(i), grid->antiholo_symbol(j)));
    return h;
}

MatrixField d_holo(const MatrixField& m, int k)
{
    MatrixField out(m.grid(), m.dim());
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j)
            out.set_entry(i, j, d_holo(m.entry(i, j), k));
    return out;
}

MatrixField d_antiholo(const MatrixField& m, int k)
{
    MatrixField out(m.grid(), m.dim());
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j)
            out.set_entry(i, j, d_antiholo(m.entry(i, j), k));
    return out;
}

ScalarField laplacian(const MatrixField& omega, const ScalarField& u)
{
    check_same_grid(omega.grid(), u.grid(), "laplacian");
    const MatrixField hess = hessian_complex(u);
    ScalarField out(u.grid());
    kernels::for_each_node(u.size(), [&](std::size_t k) { out[k] = trace_with(omega[k].inverse(), hess[k]); });
    return out;
}

ScalarField flat_laplacian(const ScalarField& u)
{
    const auto& grid = u.grid();
    auto hat = spectrum(u);
    for (std::size_t i = 0; i < hat.size(); ++i) {
        cplx s = 0.0;
        for (int k = 0; k < grid->dim(); ++k)
            s += grid->holo_symbol(k)[i] * grid->antiholo_symbol(k)[i];
        hat[i] *= s;
    }
    ScalarField out(grid);
    grid->inverse(hat, out.values());
    return out;
}

ScalarField inverse_flat_laplacian(const ScalarField& f)
{
    const auto& grid = f.grid();
    auto hat = spectrum(f);
    for (std::size_t i = 0; i < hat.size(); ++i) {
        cplx s = 0.0;
        for (int k = 0; k < grid->dim(); ++k)
            s += grid->holo_symbol(k)[i] * grid->antiholo_symbol(k)[i];
        hat[i] = std::abs(s) > 1e-14 ? hat[i] / s : 0.0;
    }
    ScalarField out(grid);
    grid->inverse(hat, out.values());
    return out;
}

cplx mean(const ScalarField& f) { return kernels::pairwise_sum(f.values()) / static_cast<double>(f.size()); }

double sup_norm(const ScalarField& f)
{
    double m = 0.0;
    for (const auto& v : f.values())
        m = std::max(m, std::abs(v));
    return m;
}

double sup_norm(const MatrixField& mf)
{
    double m = 0.0;
    for (std::size_t k = 0; k < mf.size(); ++k)
        m = std::max(m, mf[k].cwiseAbs().maxCoeff());
    return m;
}

ScalarField grad_norm_sq(const MatrixField& omega, const ScalarField& f)
{
    check_same_grid(omega.grid(), f.grid(), "grad_norm_sq");
    const auto grad = holo_gradient(f);
    const int n = f.grid()->dim();
    ScalarField out(f.grid());
    kernels::for_each_node(f.size(), [&](std::size_t node) {
        const CMat g_inv = omega[node].inverse();
        cplx s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                s += g_inv(j, i) * grad[i][node] * std::conj(grad[j][node]);
        out[node] = s.real();
    });
    return out;
}

double spectral_mean_square(const ScalarField& f)
{
    const auto hat = spectrum(f);
    std::vector<double> p(hat.size());
    for (std::size_t i = 0; i < hat.size(); ++i)
        p[i] = std::norm(hat[i]);
    const double n = static_cast<double>(f.size());
    return kernels::pairwise_sum(p) / (n * n);
}

ScalarField dealiased_product(const ScalarField& a, const ScalarField& b)
{
    check_same_grid(a.grid(), b.grid(), "dealiased_product");
    const auto& grid = a.grid();
    const int axes = grid->axes();
    std::vector<int> padded(axes);
    std::size_t padded_count = 1;
    for (int ax = 0; ax < axes; ++ax) {
        const int m = grid->sizes()[ax];
        padded[ax] = m == 1 ? 1 : 3 * m / 2;
        padded_count *= static_cast<std::size_t>(padded[ax]);
    }
    auto padded_index = [&](std::size_t node) {
        std::size_t idx = 0;
        for (int ax = 0; ax < axes; ++ax) {
            const int k = grid->wavenumber(node, ax);
            const int p = padded[ax];
            idx = idx * static_cast<std::size_t>(p) + static_cast<std::size_t>(k >= 0 ? k : k + p);
        }
        return idx;
    };

    const auto ha = spectrum(a);
    const auto hb = spectrum(b);
    std::vector<cplx> pa(padded_count), pb(padded_count);
    for (std::size_t node = 0; node < ha.size(); ++node) {
        if (grid->is_nyquist(node))
            continue;
        pa[padded_index(node)] = ha[node];
        pb[padded_index(node)] = hb[node];
    }
    fftw_plan inv = make_plan(padded, FFTW_BACKWARD);
    fftw_plan fwd = make_plan(padded, FFTW_FORWARD);
    std::vector<cplx> xa(padded_count), xb(padded_count);
    fftw_execute_dft(inv, as_fftw(pa.data()), as_fftw(xa.data()));
    fftw_execute_dft(inv, as_fftw(pb.data()), as_fftw(xb.data()));
    const double scale = 1.0 / (static_cast<double>(grid->size()) * static_cast<double>(padded_count));
    for (std::size_t i = 0; i < padded_count; ++i)
        xa[i] *= xb[i];
    fftw_execute_dft(fwd, as_fftw(xa.data()), as_fftw(pa.data()));
    destroy_plan(inv);
    destroy_plan(fwd);

    std::vector<cplx> hat(grid->size());
    for (std::size_t node = 0; node < hat.size(); ++node)
        hat[node] = grid->is_nyquist(node) ? 0.0 : pa[padded_index(node)] * scale;
    ScalarField out(grid);
    grid->inverse(hat, out.values());
    return out;
}

ScalarField nyquist_filtered(const ScalarField& f)
{
    const auto& grid = f.grid();
    std::vector<cplx> hat = spectrum(f);
    for (std::size_t k = 0; k < hat.size(); ++k)
        if (grid->is_nyquist(k))
            hat[k] = 0.0;
    ScalarField out(grid);
    grid->inverse(hat, out.values());
    return out;
}

}  // namespace hermma
