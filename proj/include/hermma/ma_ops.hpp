#pragma once

// Assembly of the (n-1)-plurisubharmonic Monge-Ampere operator in its two forms:
//   PSI:  g~ = h + ((Delta u) g - u_{i jbar}) / (n-1)
//   PHI:  g~ = h + ((Delta u) g - u_{i jbar}) / (n-1) + Z(u)
// where h = star_power(omega, omega0) and Z = *E is the torsion term, linear in du.
// The residual is log det g~ - log det(ref) - t F - b with ref = g or h.

#include <optional>
#include <vector>

#include "hermma/geometry.hpp"
#include "hermma/grid.hpp"

namespace hermma {

enum class Variant { PSI, PHI };
enum class RhsVolume { OMEGA_N, OMEGA_H_N };

struct ProblemSpec {
    Variant variant = Variant::PSI;
    MatrixField omega0;
    MatrixField omega;
    ScalarField F;
    RhsVolume rhs_volume = RhsVolume::OMEGA_N;

    const GridPtr& grid() const { return omega.grid(); }
    int dim() const { return omega.dim(); }
    /// Throws std::invalid_argument / PositivityError on a malformed problem.
    void validate() const;
};

struct SolveState {
    ScalarField u;  // real, mean zero while iterating
    double b = 0.0;
    double t = 0.0;
};

struct ETerm {
    MatrixField Z;
    ScalarField H;
};

struct EtaReport {
    MatrixField eta;      // (tr_g g~) g - (n-1) g~
    MatrixField eta_alt;  // u_{i jbar} + (tr_g h) g - (n-1) h  (+ H g - (n-1) Z for PHI)
    double max_difference = 0.0;
};

/// Frozen linearization of u -> log det g~(u) at one state.
class Linearization {
public:
    const MatrixField& theta() const { return theta_; }
    const MatrixField& tilde_inverse() const { return tilde_inv_; }
    /// L(v) = tr(Theta v_{i jbar}) + sum_l a_l d_l v + b_l dbar_l v
    ScalarField apply(const ScalarField& v) const;
    /// Transpose with respect to the plain nodal sum: sum w L(v) = sum L^T(w) v.
    ScalarField apply_transpose(const ScalarField& w) const;
    /// Node average of Theta, used by the constant-coefficient preconditioner.
    CMat mean_theta() const;
    /// Fourier symbol of L (or L^T) with every coefficient replaced by its node average.
    std::vector<cplx> mean_symbol(bool transpose = false) const;

private:
    friend class MongeAmpere;
    MatrixField theta_;
    MatrixField tilde_inv_;
    std::vector<ScalarField> a_;  // PHI only
    std::vector<ScalarField> b_;
};

class MongeAmpere {
public:
    explicit MongeAmpere(ProblemSpec spec, bool dealias_e_term = false);

    const ProblemSpec& spec() const { return spec_; }
    int dim() const { return n_; }
    const GridPtr& grid() const { return spec_.grid(); }

    const MatrixField& omega_h() const { return h_; }
    const MatrixField& omega_inverse() const { return g_inv_; }
    const ScalarField& log_det_omega() const { return logdet_g_; }
    const ScalarField& log_det_h() const { return logdet_h_; }
    /// log det of the right-hand-side volume (g or h, per rhs_volume).
    const ScalarField& log_det_reference() const;

    MatrixField tilde_metric(const ScalarField& u) const;
    ETerm e_term(const ScalarField& u) const;
    /// Same assembly from prescribed derivative data u_{i jbar} and d_l u (e.g. analytic ones).
    /// The gradient is ignored for PSI.
    MatrixField tilde_metric_from(const MatrixField& hess, const std::vector<ScalarField>& grad) const;
    ETerm e_term_from(const std::vector<ScalarField>& grad) const;
    /// Coefficient matrices C^l with Z(u) = Re sum_l (d_l u) C^l. PHI only.
    const std::vector<MatrixField>& e_coefficients() const { return c_; }

    /// Throws PositivityError (with the offending nodes) when g~ is not positive.
    ScalarField residual(const SolveState& s) const;
    ScalarField residual(const SolveState& s, const MatrixField& tilde) const;

    MatrixField theta(const MatrixField& tilde) const;
    Linearization linearize(const ScalarField& u) const;
    ScalarField linearized_apply(const ScalarField& u, const ScalarField& v) const;

    EtaReport eta_tensor(const ScalarField& u) const;

private:
    ProblemSpec spec_;
    int n_;
    bool dealias_;
    MatrixField g_inv_;
    MatrixField h_;
    ScalarField logdet_g_;
    ScalarField logdet_h_;
    std::vector<MatrixField> c_;
};

}  // namespace hermma
