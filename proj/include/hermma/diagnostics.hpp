#pragma once

// Monitors for the quantities bounded by the a priori estimates, and identity checks.
// Constants are measured from the data; none is asserted as a universal bound.

#include <iosfwd>
#include <optional>
#include <vector>

#include "hermma/geometry.hpp"
#include "hermma/ma_ops.hpp"

namespace hermma {

struct BBound {
    double abs_b = 0.0;
    double sup_F = 0.0;   // sup |t F|
    double c_meas = 0.0;  // sup |log det h - log det g| for OMEGA_N, 0 for OMEGA_H_N
    double slack = 0.0;   // sup_F + c_meas - abs_b
    bool ok = true;
};

BBound b_bound_check(const MongeAmpere& ma, const SolveState& s);

struct C2Record {
    double sup_trace = 0.0;  // sup tr_g g~
    double K = 0.0;          // sup |du|_g^2 + 1
    double ratio = 0.0;
};

C2Record c2_monitor(const MongeAmpere& ma, const SolveState& s);

struct EtaBand {
    std::size_t violations = 0;
    double min_slack = 0.0;         // smallest margin over the three inequalities, relative
    double dual_formula_gap = 0.0;  // max difference of the two expressions for eta
};

/// (1/n) tr_g g~ <= lambda_max <= eta_max <= (n-1) lambda_max at every node,
/// eigenvalues taken relative to g.
EtaBand eta_band(const MongeAmpere& ma, const SolveState& s);

struct CherrierRow {
    double p = 0.0;
    double lhs = 0.0;  // integral of |d e^{-p u/2}|_g^2 omega^n
    double rhs = 0.0;  // integral of e^{-p u} omega^n
    double ratio = 0.0;  // lhs / (p rhs)
    bool saturated = false;
};

/// Evaluated with u shifted so that sup u = 0.
std::vector<CherrierRow> cherrier_table(const MongeAmpere& ma, const SolveState& s, const std::vector<double>& p_list);
void write_cherrier_csv(std::ostream& os, const std::vector<CherrierRow>& rows);

struct CommutationRecord {
    double first = 0.0;   // u_{i jbar l} vs u_{i l jbar} - u_p R_{l jbar i}^p
    double second = 0.0;  // u_{p jbar mbar} vs u_{p mbar jbar} - conj(T^q_{mj}) u_{p qbar}
    double max() const { return first > second ? first : second; }
};

CommutationRecord commutation_check(const MatrixField& omega, const ScalarField& u);
CommutationRecord commutation_check(const ConnectionData& conn, const ScalarField& u);

/// sup |d dbar beta_u| for beta_u = i d dbar u ^ omega^{n-2} + Re(i du ^ dbar omega^{n-2}). PHI only.
double phi_closedness(const MongeAmpere& ma, const ScalarField& u);

struct EstimateReport {
    BBound b_bound;
    C2Record c2;
    EtaBand eta;
    std::vector<CherrierRow> cherrier;
    std::optional<double> phi_closedness;
};

EstimateReport estimate_report(const MongeAmpere& ma, const SolveState& s,
                               const std::vector<double>& p_list = {4, 8, 16, 32});

}  // namespace hermma
