#pragma once

// Periodic grid on the flat torus C^n / (Z^n + i Z^n).
//
// Real coordinates are ordered (x_1, y_1, ..., x_n, y_n) with z_k = x_k + i y_k, each in
// [0, 1). Node storage is row-major over those 2n axes with the last axis fastest.
// Inactive axes have a single node and fields are constant along them.
//
// Complex derivatives: d_k = (d/dx_k - i d/dy_k)/2 and dbar_k = (d/dx_k + i d/dy_k)/2.

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "hermma/herm.hpp"

namespace hermma {

enum class DiffMode { spectral, finite_difference };

class TorusGrid {
public:
    static constexpr std::size_t kDefaultNodeBudget = std::size_t{1} << 22;

    TorusGrid(int n, std::vector<int> sizes, DiffMode mode = DiffMode::spectral,
              std::size_t node_budget = kDefaultNodeBudget);
    ~TorusGrid();
    TorusGrid(const TorusGrid&) = delete;
    TorusGrid& operator=(const TorusGrid&) = delete;

    /// Grid with `points` nodes on each listed real axis (axis a = 2(k-1) for x_k, 2(k-1)+1 for y_k).
    static std::shared_ptr<const TorusGrid> make(int n, const std::vector<int>& active_axes, int points,
                                                 DiffMode mode = DiffMode::spectral);

    int dim() const noexcept { return n_; }
    int axes() const noexcept { return 2 * n_; }
    const std::vector<int>& sizes() const noexcept { return sizes_; }
    std::size_t size() const noexcept { return count_; }
    std::vector<bool> active_mask() const;
    std::vector<int> active_axes() const;
    DiffMode mode() const noexcept { return mode_; }

    /// Coordinate in [0,1) of `node` along real axis `axis`.
    double coordinate(std::size_t node, int axis) const;
    /// Signed integer wavenumber of spectral index `node` along `axis` (Nyquist reported as +M/2).
    int wavenumber(std::size_t node, int axis) const;
    bool is_nyquist(std::size_t node) const;

    void forward(std::span<const cplx> in, std::span<cplx> out) const;
    /// Normalized inverse transform.
    void inverse(std::span<const cplx> in, std::span<cplx> out) const;

    /// Fourier multiplier of d_k (holomorphic) and dbar_k.
    const std::vector<cplx>& holo_symbol(int k) const { return holo_[k]; }
    const std::vector<cplx>& antiholo_symbol(int k) const { return antiholo_[k]; }

    bool same_as(const TorusGrid& other) const noexcept;

private:
    int n_;
    std::vector<int> sizes_;
    std::vector<std::size_t> strides_;
    std::size_t count_;
    DiffMode mode_;
    std::vector<std::vector<cplx>> holo_;
    std::vector<std::vector<cplx>> antiholo_;
    void* plan_forward_ = nullptr;
    void* plan_inverse_ = nullptr;
};

using GridPtr = std::shared_ptr<const TorusGrid>;

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridPtr grid, cplx fill = 0.0);
    ScalarField(GridPtr grid, std::vector<cplx> values);

    const GridPtr& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    cplx& operator[](std::size_t i) { return values_[i]; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }
    std::span<cplx> values() noexcept { return values_; }
    std::span<const cplx> values() const noexcept { return values_; }

    std::vector<double> real_values() const;
    /// max |Im f|
    double imag_sup() const;
    /// Drop imaginary parts (for fields that are real up to rounding).
    ScalarField& make_real();

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(cplx s);

private:
    GridPtr grid_;
    std::vector<cplx> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(cplx s, ScalarField a);

/// Field of n x n complex matrices. Used for Hermitian (1,1)-forms, metrics, and
/// non-Hermitian derivative fields alike.
class MatrixField {
public:
    MatrixField() = default;
    MatrixField(GridPtr grid, int n);
    MatrixField(GridPtr grid, int n, const CMat& fill);

    const GridPtr& grid() const noexcept { return grid_; }
    int dim() const noexcept { return n_; }
    std::size_t size() const noexcept { return values_.size(); }
    CMat& operator[](std::size_t i) { return values_[i]; }
    const CMat& operator[](std::size_t i) const { return values_[i]; }

    ScalarField entry(int i, int j) const;
    void set_entry(int i, int j, const ScalarField& f);

    double hermitian_error() const;
    /// Smallest eigenvalue over all nodes, relative to `reference` when given.
    double min_eigenvalue(const MatrixField* reference = nullptr) const;
    std::vector<std::size_t> non_positive_nodes() const;

    MatrixField& operator+=(const MatrixField& o);
    MatrixField& operator-=(const MatrixField& o);
    MatrixField& operator*=(cplx s);

private:
    GridPtr grid_;
    int n_ = 0;
    std::vector<CMat> values_;
};

MatrixField operator+(MatrixField a, const MatrixField& b);
MatrixField operator-(MatrixField a, const MatrixField& b);
MatrixField operator*(cplx s, MatrixField a);

using HermField = MatrixField;

// ---- differential operators -------------------------------------------------

ScalarField d_holo(const ScalarField& f, int k);
ScalarField d_antiholo(const ScalarField& f, int k);
/// All n holomorphic first derivatives, sharing one forward transform.
std::vector<ScalarField> holo_gradient(const ScalarField& f);
std::vector<ScalarField> antiholo_gradient(const ScalarField& f);
/// Field of u_{i jbar} = d_i dbar_j u.
MatrixField hessian_complex(const ScalarField& u);
/// Entrywise derivative of a matrix field.
MatrixField d_holo(const MatrixField& m, int k);
MatrixField d_antiholo(const MatrixField& m, int k);

/// g^{i jbar} u_{i jbar}
ScalarField laplacian(const MatrixField& omega, const ScalarField& u);
/// Flat Laplacian sum_i d_i dbar_i, applied in Fourier space.
ScalarField flat_laplacian(const ScalarField& u);
/// Solves flat_laplacian(v) = f - mean(f) for mean-zero v.
ScalarField inverse_flat_laplacian(const ScalarField& f);

cplx mean(const ScalarField& f);
double sup_norm(const ScalarField& f);
double sup_norm(const MatrixField& m);
/// g^{i jbar} d_i f conj(d_j f)
ScalarField grad_norm_sq(const MatrixField& omega, const ScalarField& f);

/// Product of two fields evaluated on a 3/2-padded grid and truncated back.
ScalarField dealiased_product(const ScalarField& a, const ScalarField& b);

/// Mean of |f|^2 computed from Fourier coefficients (Parseval).
double spectral_mean_square(const ScalarField& f);

/// Removes every Fourier mode with a Nyquist wavenumber on some active axis. Spectral
/// derivatives vanish on those modes, so the discrete equations are posed on their complement.
ScalarField nyquist_filtered(const ScalarField& f);

}  // namespace hermma
