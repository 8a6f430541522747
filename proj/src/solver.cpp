#include "hermma/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hermma/errors.hpp"
#include "hermma/kernels.hpp"

namespace hermma {

void SolverConfig::validate() const
{
    if (!(newton_tol > 0.0))
        throw std::invalid_argument("solver: newton_tol must be positive");
    if (max_newton < 1)
        throw std::invalid_argument("solver: max_newton must be at least 1");
    if (schedule.size() < 2 || schedule.front() != 0.0 || schedule.back() != 1.0)
        throw std::invalid_argument("solver: schedule must start at 0 and end at 1");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i] > schedule[i - 1]))
            throw std::invalid_argument("solver: schedule must be strictly increasing");
    if (!(min_step > 0.0) || !(linear_tol > 0.0) || gmres_restart < 1 || gmres_max_iterations < 1)
        throw std::invalid_argument("solver: invalid linear-solver or step settings");
}

ScalarField SolveReport::normalized_u() const
{
    ScalarField u = state.u;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < u.size(); ++k)
        top = std::max(top, u[k].real());
    for (std::size_t k = 0; k < u.size(); ++k)
        u[k] -= top;
    return u;
}

namespace {

ScalarField field_from(const GridPtr& grid, std::span<const double> x)
{
    ScalarField f(grid);
    for (std::size_t k = 0; k < f.size(); ++k)
        f[k] = x[k];
    return f;
}

void copy_real(const ScalarField& f, std::span<double> out)
{
    for (std::size_t k = 0; k < f.size(); ++k)
        out[k] = f[k].real();
}

double mean_real(std::span<const double> x) { return kernels::pairwise_sum(x) / static_cast<double>(x.size()); }

// Bordered system [A x + s c ; mean x] with A a grid operator, preconditioned by the
// inverse of a constant-coefficient symbol on the non-null modes.
class BorderedSystem {
public:
    BorderedSystem(GridPtr grid, std::vector<cplx> symbol, double border_sign)
        : grid_(std::move(grid)), symbol_(std::move(symbol)), sign_(border_sign), keep_(grid_->size())
    {
        for (std::size_t k = 0; k < keep_.size(); ++k)
            keep_[k] = k != 0 && !grid_->is_nyquist(k) && std::abs(symbol_[k]) > 0.0;
    }

    std::size_t size() const { return grid_->size() + 1; }

    LinearMap op(std::function<ScalarField(const ScalarField&)> a) const
    {
        return [this, a = std::move(a)](std::span<const double> in, std::span<double> out) {
            const std::size_t n = grid_->size();
            const ScalarField x = field_from(grid_, in.first(n));
            const ScalarField ax = nyquist_filtered(a(x));
            for (std::size_t k = 0; k < n; ++k)
                out[k] = ax[k].real() + sign_ * in[n];
            out[n] = mean_real(in.first(n));
        };
    }

    LinearMap preconditioner() const
    {
        return [this](std::span<const double> in, std::span<double> out) {
            const std::size_t n = grid_->size();
            std::vector<cplx> r(n), hat(n);
            for (std::size_t k = 0; k < n; ++k)
                r[k] = in[k];
            grid_->forward(r, hat);
            const cplx mean_r = hat[0] / static_cast<double>(n);
            for (std::size_t k = 0; k < n; ++k)
                hat[k] = keep_[k] ? hat[k] / symbol_[k] : cplx(0.0);
            hat[0] = in[n] * static_cast<double>(n);
            grid_->inverse(hat, r);
            for (std::size_t k = 0; k < n; ++k)
                out[k] = r[k].real();
            out[n] = sign_ * mean_r.real();
        };
    }

private:
    GridPtr grid_;
    std::vector<cplx> symbol_;
    double sign_;
    std::vector<char> keep_;
};

double sup_real(const ScalarField& f)
{
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
        m = std::max(m, std::abs(f[k].real()));
    return m;
}

// Restarted GMRES can plateau just above a tight tolerance; a residual within 100x still counts.
bool accepted(const GmresResult& gr, double tol) { return gr.converged || gr.relative_residual <= 100.0 * tol; }

}  // namespace

ScalarField projected_residual(const MongeAmpere& ma, const SolveState& s)
{
    return nyquist_filtered(ma.residual(s));
}

NewtonStep newton_step(const MongeAmpere& ma, const SolveState& state, const SolverConfig& cfg)
{
    const GridPtr& grid = ma.grid();
    const std::size_t n = grid->size();
    NewtonStep out;
    const ScalarField r = projected_residual(ma, state);
    out.residual_before = sup_real(r);

    const Linearization lin = ma.linearize(state.u);
    // unknowns (du, db):  L du - db = -r,  mean du = 0
    BorderedSystem sys(grid, lin.mean_symbol(), -1.0);
    std::vector<double> rhs(n + 1, 0.0), x(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        rhs[k] = -r[k].real();
    const GmresResult gr = gmres(sys.op([&](const ScalarField& v) { return lin.apply(v); }), sys.preconditioner(), rhs,
                                 x, {cfg.linear_tol, cfg.gmres_restart, cfg.gmres_max_iterations});
    out.linear_iterations = gr.iterations;
    if (!accepted(gr, cfg.linear_tol))
        throw SolverError("newton_step: linear solve stalled at relative residual " +
                              sci(gr.relative_residual),
                          state.t);
    const ScalarField du = field_from(grid, std::span<const double>(x).first(n));
    const double db = x[n];

    for (int h = 0; h <= cfg.max_halvings; ++h) {
        const double alpha = std::ldexp(1.0, -h);
        SolveState trial{state.u + alpha * du, state.b + alpha * db, state.t};
        const MatrixField tilde = ma.tilde_metric(trial.u);
        if (!tilde.non_positive_nodes().empty())
            continue;
        const double after = sup_real(nyquist_filtered(ma.residual(trial, tilde)));
        if (after < out.residual_before) {
            out.state = std::move(trial);
            out.damping = alpha;
            out.residual_after = after;
            return out;
        }
    }
    throw SolverError("newton_step: no damping factor keeps the metric positive and reduces the residual", state.t);
}

namespace {

struct AttemptResult {
    bool ok = false;
    SolveState state;
    std::string message;
};

class ContinuityRun {
public:
    ContinuityRun(const MongeAmpere& ma, const SolverConfig& cfg, const RecordSink& sink, SolveReport& rep)
        : ma_(ma), cfg_(cfg), sink_(sink), rep_(rep)
    {
    }

    AttemptResult solve_at(SolveState s, double t)
    {
        s.t = t;
        std::vector<double> local;
        double damping = 0.0;
        for (int iter = 0; iter <= cfg_.max_newton; ++iter) {
            double r = 0.0, margin = 0.0;
            try {
                const MatrixField tilde = ma_.tilde_metric(s.u);
                r = sup_real(nyquist_filtered(ma_.residual(s, tilde)));
                margin = tilde.min_eigenvalue();
            } catch (const PositivityError& e) {
                return {false, s, e.what()};
            }
            IterationRecord rec{t, iter, r, s.b, margin, damping};
            rep_.records.push_back(rec);
            rep_.residual_history.push_back(r);
            rep_.b_history.push_back(s.b);
            if (sink_)
                sink_(rec);
            if (!local.empty() && local.back() < 1e-2 && r > 0.0) {
                const double c = r / (local.back() * local.back());
                rep_.quadratic_constant = std::max(rep_.quadratic_constant.value_or(0.0), c);
            }
            local.push_back(r);
            if (r < cfg_.newton_tol) {
                rep_.positivity_margin = margin;
                return {true, s, {}};
            }
            const int w = cfg_.stagnation_window;
            if (static_cast<int>(local.size()) > w && r > 0.5 * local[local.size() - 1 - w])
                return {false, s, "Newton stagnated"};
            if (iter == cfg_.max_newton)
                break;
            try {
                NewtonStep step = newton_step(ma_, s, cfg_);
                ++rep_.newton_iterations;
                rep_.linear_iterations += step.linear_iterations;
                damping = step.damping;
                s = std::move(step.state);
            } catch (const SolverError& e) {
                return {false, s, e.what()};
            }
        }
        return {false, s, "Newton iteration budget exhausted"};
    }

private:
    const MongeAmpere& ma_;
    const SolverConfig& cfg_;
    const RecordSink& sink_;
    SolveReport& rep_;
};

}  // namespace

SolveReport continuity_solve(const MongeAmpere& ma, const SolverConfig& cfg, const RecordSink& sink,
                             std::optional<SolveState> initial)
{
    cfg.validate();
    const GridPtr& grid = ma.grid();
    SolveReport rep;
    ContinuityRun run(ma, cfg, sink, rep);

    SolveState s;
    if (initial) {
        s = *initial;
        s.u = nyquist_filtered(s.u);
        const cplx m = mean(s.u);
        for (std::size_t k = 0; k < s.u.size(); ++k)
            s.u[k] = s.u[k].real() - m.real();
    } else {
        s.u = ScalarField(grid);
        s.b = mean(ma.log_det_h() - ma.log_det_reference()).real();
    }

    const double t0 = initial ? initial->t : cfg.schedule.front();
    if (!(t0 >= 0.0 && t0 <= 1.0))
        throw std::invalid_argument("continuity_solve: initial t outside [0, 1]");
    AttemptResult first = run.solve_at(s, t0);
    if (!first.ok)
        throw SolverError("continuity_solve: no solution at the starting t: " + first.message, -1.0);
    s = std::move(first.state);

    double t_good = t0;
    for (std::size_t i = 1; i < cfg.schedule.size(); ++i) {
        if (cfg.schedule[i] <= t_good)
            continue;
        const double target = cfg.schedule[i];
        double step = target - t_good;
        while (t_good < target) {
            const double t_try = std::min(t_good + step, target);
            AttemptResult a = run.solve_at(s, t_try);
            if (a.ok) {
                s = std::move(a.state);
                t_good = t_try;
                step = std::min(2.0 * step, target - t_good);
            } else {
                step *= 0.5;
                if (step < cfg.min_step)
                    throw SolverError("continuity_solve: step fell below the minimum after failure at t = " +
                                          std::to_string(t_try) + ": " + a.message,
                                      t_good);
            }
        }
    }
    rep.state = std::move(s);
    return rep;
}

AdjointKernel adjoint_kernel(const MongeAmpere& ma, const SolveState& state, const SolverConfig& cfg)
{
    const GridPtr& grid = ma.grid();
    const std::size_t n = grid->size();
    const int dim = ma.dim();
    const MatrixField tilde = ma.tilde_metric(state.u);
    require_positive(tilde, "adjoint_kernel");
    const Linearization lin = ma.linearize(state.u);

    // unknowns (g, c):  L^T g + c = 0,  mean g = 1
    BorderedSystem sys(grid, lin.mean_symbol(true), 1.0);
    std::vector<double> rhs(n + 1, 0.0), x(n + 1, 0.0);
    rhs[n] = 1.0;
    const GmresResult gr = gmres(sys.op([&](const ScalarField& w) { return lin.apply_transpose(w); }),
                                 sys.preconditioner(), rhs, x,
                                 {cfg.linear_tol, cfg.gmres_restart, cfg.gmres_max_iterations});
    if (!accepted(gr, cfg.linear_tol))
        throw SolverError("adjoint_kernel: linear solve stalled at relative residual " +
                              sci(gr.relative_residual),
                          state.t);

    double fact = 1.0;
    for (int i = 2; i <= dim; ++i)
        fact *= i;
    const double gmean = mean_real(std::span<const double>(x).first(n));
    AdjointKernel out;
    out.iterations = gr.iterations;
    out.f = ScalarField(grid);
    out.sigma = ScalarField(grid);
    ScalarField vol(grid);
    for (std::size_t k = 0; k < n; ++k) {
        vol[k] = real_det(tilde[k]);
        out.f[k] = x[k] / (vol[k].real() * fact * gmean);
    }
    double fmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k)
        fmin = std::min(fmin, out.f[k].real());
    if (!(fmin > 0.0))
        throw SolverError("adjoint_kernel: kernel function changes sign", state.t);
    for (std::size_t k = 0; k < n; ++k)
        out.sigma[k] = std::log(out.f[k].real());

    ScalarField vf(grid);
    for (std::size_t k = 0; k < n; ++k)
        vf[k] = vol[k] * out.f[k];
    const ScalarField lt = nyquist_filtered(lin.apply_transpose(vf));
    for (std::size_t k = 0; k < n; ++k)
        out.adjoint_residual = std::max(out.adjoint_residual, std::abs(lt[k] / vol[k]));
    return out;
}

double adjoint_pairing(const MongeAmpere& ma, const SolveState& state, const ScalarField& f, const ScalarField& zeta)
{
    const MatrixField tilde = ma.tilde_metric(state.u);
    const ScalarField lz = ma.linearized_apply(state.u, zeta);
    double fact = 1.0;
    for (int i = 2; i <= ma.dim(); ++i)
        fact *= i;
    std::vector<double> terms(f.size());
    for (std::size_t k = 0; k < f.size(); ++k)
        terms[k] = (f[k] * lz[k]).real() * fact * real_det(tilde[k]);
    return kernels::pairwise_sum(terms) / static_cast<double>(terms.size());
}

GauduchonFactor gauduchon_factor(const MatrixField& omega, const GauduchonOptions& opt)
{
    require_positive(omega, "gauduchon_factor");
    const GridPtr& grid = omega.grid();
    const std::size_t n = grid->size();
    const int dim = omega.dim();
    MatrixField s0(grid, dim);
    for (std::size_t k = 0; k < n; ++k)
        s0[k] = real_det(omega[k]) * omega[k].inverse();

    // Mean-coefficient symbol of w -> sum d_i dbar_j (s0_{ji} w).
    std::vector<cplx> symbol(n, 0.0);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            const cplx c = mean(s0.entry(j, i));
            const auto& hi = grid->holo_symbol(i);
            const auto& aj = grid->antiholo_symbol(j);
            for (std::size_t k = 0; k < n; ++k)
                symbol[k] += c * hi[k] * aj[k];
        }
    BorderedSystem sys(grid, symbol, 1.0);
    const auto op = sys.op([&](const ScalarField& w) { return ddbar_contract(s0, w); });

    GauduchonFactor out;
    out.defect_before = gauduchon_defect(omega);
    ScalarField w(grid, 1.0);
    auto sigma_of = [&](const ScalarField& wf) {
        ScalarField sg(grid);
        for (std::size_t k = 0; k < n; ++k) {
            if (!(wf[k].real() > 0.0))
                throw SolverError("gauduchon_factor: conformal weight lost positivity", 0.0);
            sg[k] = std::log(wf[k].real()) / (dim - 1);
        }
        const cplx m = mean(sg);
        for (std::size_t k = 0; k < n; ++k)
            sg[k] -= m;
        return sg;
    };
    double fact = 1.0;
    for (int i = 2; i < dim; ++i)
        fact *= i;
    const MatrixField flat(grid, dim, identity(dim));
    auto projected = [&](const MatrixField& metric) {
        const FormNM1 psi = star_power(flat, metric);
        return fact * sup_norm(nyquist_filtered(ddbar_top(psi.reference, psi.star_rep)));
    };
    out.sigma = ScalarField(grid);
    out.defect_after = out.defect_before;
    out.projected_defect = projected(omega);
    while (out.projected_defect > opt.tol) {
        if (out.iterations == opt.max_iterations)
            throw SolverError("gauduchon_factor: defect stalled at " + sci(out.projected_defect), 0.0);
        ++out.iterations;
        const ScalarField r = nyquist_filtered(ddbar_contract(s0, w));
        std::vector<double> rhs(n + 1), x(n + 1, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            rhs[k] = -r[k].real();
        rhs[n] = 1.0 - mean(w).real();
        const GmresResult gr = gmres(op, sys.preconditioner(), rhs, x, {opt.linear_tol, 80, 1500});
        if (!accepted(gr, opt.linear_tol))
            throw SolverError("gauduchon_factor: linear solve stalled", 0.0);
        for (std::size_t k = 0; k < n; ++k)
            w[k] += x[k];
        out.sigma = sigma_of(w);
        const MatrixField scaled = conformal(out.sigma, omega);
        out.defect_after = gauduchon_defect(scaled);
        out.projected_defect = projected(scaled);
    }
    return out;
}

}  // namespace hermma
