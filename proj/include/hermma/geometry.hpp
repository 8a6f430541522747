#pragma once

// Pointwise Hermitian multilinear algebra and Chern geometry of torus metrics.
//
// Conventions (see docs/conventions.md):
//   a (1,1)-form  i a_{i jbar} dz^i ^ dzbar^j  is stored as the matrix a(i, j) = a_{i jbar};
//   g^{i jbar} a_{i jbar} = tr(g^{-1} a);
//   an (n-1,n-1)-form Psi is stored through S = *Psi, the unique (1,1)-form with
//   beta ^ Psi = <beta, S>_g  omega^n / n!  for every (1,1)-form beta.
//   Gamma^k_{ij} = g^{k qbar} d_i g_{j qbar},  T^k_{ij} = Gamma^k_{ij} - Gamma^k_{ji},
//   R_{l mbar i}^p = -dbar_m Gamma^p_{l i}.

#include <optional>
#include <span>
#include <vector>

#include "hermma/grid.hpp"
#include "hermma/herm.hpp"

namespace hermma {

namespace pointwise {

/// (1/(n-1)!) *_ref (omega^{n-1}) = (det omega / det ref) ref omega^{-1} ref.
CMat star_power(const CMat& ref, const CMat& omega);

/// Inverse of star_power: the metric A with star_power(ref, A) = s.
CMat nm1_root(const CMat& ref, const CMat& s);

/// (1/(n-2)!) *(alpha ^ omega^{n-2}) = (tr_omega alpha) omega - alpha.
CMat star_wedge(const CMat& omega, const CMat& alpha);

/// *(B ^ C ^ omega^{n-3}/(n-3)!) for (1,1)-forms B, C given in raised form
/// b_hat = g^{-1} B, c_hat = g^{-1} C. Bilinear, valid for non-Hermitian input.
CMat star_pair_wedge(const CMat& g, const CMat& b_hat, const CMat& c_hat);

/// Coefficient of A_1 ^ ... ^ A_n on e_1 ^ ... ^ e_n, e_k = i dz^k ^ dzbar^k.
cplx mixed_wedge(std::span<const CMat> forms);

/// Flat star-dual of Psi given its star-dual s with respect to g: det(g) g^{-1} s g^{-1}.
CMat to_flat_dual(const CMat& g, const CMat& s);

}  // namespace pointwise

/// An (n-1,n-1)-form, held through its star-dual with respect to `reference`.
struct FormNM1 {
    MatrixField star_rep;
    MatrixField reference;
};

void require_positive(const MatrixField& m, const char* what);

FormNM1 star_power(const MatrixField& omega_ref, const MatrixField& omega);
MatrixField nm1_root(const FormNM1& psi);
MatrixField star_wedge(const MatrixField& omega, const MatrixField& alpha);

struct ConnectionData {
    int n = 0;
    std::vector<ScalarField> gamma;      // index (i*n + j)*n + k  ->  Gamma^k_{ij}
    std::vector<ScalarField> torsion;    // same layout            ->  T^k_{ij}
    std::vector<ScalarField> curvature;  // ((l*n + m)*n + i)*n + p ->  R_{l mbar i}^p

    const ScalarField& Gamma(int i, int j, int k) const { return gamma[(i * n + j) * n + k]; }
    const ScalarField& T(int i, int j, int k) const { return torsion[(i * n + j) * n + k]; }
    const ScalarField& R(int l, int m, int i, int p) const { return curvature[((l * n + m) * n + i) * n + p]; }

    /// Torsion and curvature from a prescribed Gamma (e.g. an analytic one).
    static ConnectionData from_gamma(std::vector<ScalarField> gamma, int n);
};

ConnectionData chern_connection(const MatrixField& omega);

/// -d_i dbar_j log det g
MatrixField chern_ricci(const MatrixField& omega);

struct MetricDefects {
    double gauduchon = 0.0;             // sup of the coefficient of d dbar (omega^{n-1})
    std::optional<double> astheno;      // sup of coefficients of d dbar (omega^{n-2}); n = 2 not applicable
    double kahler = 0.0;                // sup of coefficients of d omega
};

MetricDefects metric_defects(const MatrixField& omega);
/// The gauduchon member of metric_defects alone.
double gauduchon_defect(const MatrixField& omega);

/// Scalar coefficient of i d dbar Psi on e_1 ^ ... ^ e_n for an (n-1,n-1)-form given by
/// its star-dual with respect to `reference`.
ScalarField ddbar_top(const MatrixField& reference, const MatrixField& star_rep);

/// sum_{i,j} d_i dbar_j (w s_{ji}) for a flat star-dual s; the Gauduchon operator on conformal weights.
ScalarField ddbar_contract(const MatrixField& flat_dual, const ScalarField& w);

/// Field e^{sigma} omega.
MatrixField conformal(const ScalarField& sigma, const MatrixField& omega);

}  // namespace hermma
