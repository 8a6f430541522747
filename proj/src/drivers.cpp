#include "hermma/drivers.hpp"

#include <cmath>
#include <string>

#include "hermma/errors.hpp"
#include "hermma/kernels.hpp"

namespace hermma {

Manufactured manufacture(ProblemSpec base, const testfields::RidgePotential& potential, double b_star)
{
    const GridPtr grid = base.grid();
    base.F = ScalarField(grid);
    const MongeAmpere ma(base);
    std::vector<ScalarField> grad;
    if (base.variant == Variant::PHI)
        grad = potential.holo_gradient(grid);
    const MatrixField gt = ma.tilde_metric_from(potential.hessian(grid), grad);
    require_positive(gt, "manufacture: tilde metric of u*");
    for (std::size_t k = 0; k < grid->size(); ++k)
        base.F[k] = std::log(real_det(gt[k])) - ma.log_det_reference()[k].real() - b_star;
    Manufactured out{std::move(base), potential.values(grid), b_star};
    const double m = mean(out.u_star).real();
    for (std::size_t k = 0; k < out.u_star.size(); ++k)
        out.u_star[k] = out.u_star[k].real() - m;
    return out;
}

namespace {

double log_volume_error(const MatrixField& a, const MatrixField& ref, const ScalarField& rhs, double c, double scale)
{
    double err = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double lhs = scale * std::log(real_det(a[k]) / real_det(ref[k]));
        err = std::max(err, std::abs(lhs - rhs[k].real() - c));
    }
    return err;
}

}  // namespace

CalabiYauResult calabi_yau_gauduchon(const ProblemSpec& spec, const ScalarField& F_prime, const DriverOptions& opt)
{
    const int n = spec.dim();
    CalabiYauResult out;
    out.omega0_gauduchon_defect = gauduchon_defect(spec.omega0);
    if (n >= 3) {
        const auto d = metric_defects(spec.omega);
        out.omega_astheno_defect = d.astheno.value_or(0.0);
    }
    if (out.omega_astheno_defect > opt.precondition_tol)
        throw ValidationError("calabi_yau_gauduchon: omega is not astheno-Kahler (defect " +
                              sci(out.omega_astheno_defect) + ")");
    if (out.omega0_gauduchon_defect > opt.precondition_tol)
        throw ValidationError("calabi_yau_gauduchon: omega0 is not Gauduchon (defect " +
                              sci(out.omega0_gauduchon_defect) + ")");

    ProblemSpec psi_spec = spec;
    psi_spec.variant = Variant::PSI;
    psi_spec.rhs_volume = RhsVolume::OMEGA_N;
    psi_spec.F = static_cast<double>(n - 1) * F_prime;
    const MongeAmpere ma(psi_spec);
    out.report = continuity_solve(ma, opt.solver, opt.sink);
    const SolveState& st = out.report.state;
    out.b_prime = st.b / (n - 1);

    const MatrixField tilde = ma.tilde_metric(st.u);
    out.omega_u = nm1_root(FormNM1{tilde, spec.omega});
    out.volume_error = log_volume_error(out.omega_u, spec.omega, F_prime, out.b_prime, 1.0);
    out.exponent_error = log_volume_error(tilde, spec.omega, psi_spec.F, st.b, 1.0);
    out.gauduchon_defect = gauduchon_defect(out.omega_u);
    return out;
}

RicciResult prescribed_ricci(const ProblemSpec& spec, const MatrixField& psi, const DriverOptions& opt)
{
    const int n = spec.dim();
    const GridPtr& grid = spec.grid();
    const MatrixField diff = chern_ricci(spec.omega) - psi;
    double zero_mode = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            zero_mode = std::max(zero_mode, std::abs(mean(diff.entry(i, j))));
    if (zero_mode > opt.precondition_tol)
        throw CohomologyError("prescribed_ricci: Ric(omega) - psi has a nonzero constant part (" +
                              sci(zero_mode) + "); it is not d dbar-exact");

    ScalarField trace(grid);
    for (std::size_t k = 0; k < grid->size(); ++k)
        trace[k] = diff[k].trace();
    RicciResult out;
    out.F = inverse_flat_laplacian(trace);
    out.F.make_real();
    out.exactness_error = sup_norm(hessian_complex(out.F) - diff);
    if (out.exactness_error > std::max(opt.precondition_tol, 1e-6 * std::max(1.0, sup_norm(diff))))
        throw CohomologyError("prescribed_ricci: Ric(omega) - psi is not a complex Hessian (error " +
                              sci(out.exactness_error) + ")");

    out.solve = calabi_yau_gauduchon(spec, out.F, opt);
    out.omega_tilde = out.solve.omega_u;
    const MatrixField ric = chern_ricci(out.omega_tilde);
    out.ricci_defect = sup_norm(ric - psi);

    ScalarField log_ratio(grid);
    for (std::size_t k = 0; k < grid->size(); ++k)
        log_ratio[k] = std::log(real_det(out.omega_tilde[k]) / real_det(spec.omega[k]));
    const MatrixField via_volume = chern_ricci(spec.omega) - hessian_complex(log_ratio);
    out.ricci_two_way_difference = sup_norm(ric - via_volume);
    return out;
}

PhiResult phi_pipeline(const ProblemSpec& spec, const ScalarField& F, const DriverOptions& opt)
{
    const int n = spec.dim();
    if (n < 3)
        throw ValidationError("phi_pipeline: requires n >= 3");
    const double om_defect = gauduchon_defect(spec.omega);
    if (om_defect > opt.precondition_tol)
        throw ValidationError("phi_pipeline: omega is not Gauduchon (defect " + sci(om_defect) + ")");

    ProblemSpec phi_spec = spec;
    phi_spec.variant = Variant::PHI;
    phi_spec.F = F;
    const MongeAmpere ma(phi_spec, opt.dealias_e_term);
    PhiResult out;
    out.report = continuity_solve(ma, opt.solver, opt.sink);
    out.b = out.report.state.b;
    const MatrixField tilde = ma.tilde_metric(out.report.state.u);
    out.omega_tilde = nm1_root(FormNM1{tilde, spec.omega});
    out.gauduchon_defect = gauduchon_defect(out.omega_tilde);
    out.omega0_gauduchon_defect = gauduchon_defect(spec.omega0);
    const ScalarField& ref = ma.log_det_reference();
    double err = 0.0;
    for (std::size_t k = 0; k < tilde.size(); ++k) {
        const double lhs = (n - 1) * std::log(real_det(out.omega_tilde[k])) - (n - 2) * std::log(real_det(spec.omega[k]));
        err = std::max(err, std::abs(lhs - ref[k].real() - F[k].real() - out.b));
    }
    out.volume_error = err;
    return out;
}

}  // namespace hermma
