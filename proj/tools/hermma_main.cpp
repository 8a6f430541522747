// hermma: command-line front end for the solver, pipelines and diagnostics.
//
// Exit status: 0 on success, 2 for invalid input (config, field files, metric
// preconditions, cohomology), 3 when the solver fails.

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hermma/diagnostics.hpp"
#include "hermma/drivers.hpp"
#include "hermma/io.hpp"
#include "hermma/kernels.hpp"
#include "hermma/testfields.hpp"

namespace fs = std::filesystem;
using namespace hermma;
using io::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

// Precedence: --threads, then HERMMA_NUM_THREADS, then [run] threads, then the OpenMP default.
void configure_threads(std::optional<int> from_config, int from_flag)
{
    std::optional<int> t = from_config;
    if (const char* env = std::getenv("HERMMA_NUM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ValidationError("HERMMA_NUM_THREADS must be a positive integer");
        t = static_cast<int>(v);
    }
    if (from_flag > 0)
        t = from_flag;
    if (t)
        kernels::set_thread_count(*t);
}

void emit(const json& j, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream os(path);
    if (!os)
        throw ValidationError("cannot write report " + path);
    os << j.dump(2) << '\n';
}

json grid_json(const TorusGrid& g)
{
    return json{{"dim", g.dim()}, {"sizes", g.sizes()},
                {"diff", g.mode() == DiffMode::spectral ? "spectral" : "finite_difference"}};
}

const char* variant_name(Variant v) { return v == Variant::PSI ? "psi" : "phi"; }

std::string output(const io::RunConfig& rc, const std::string& key)
{
    const auto it = rc.outputs.find(key);
    return it == rc.outputs.end() ? std::string() : it->second;
}

struct RecordWriter {
    std::ofstream os;
    RecordSink sink()
    {
        if (!os.is_open())
            return {};
        return [this](const IterationRecord& r) { os << io::to_json(r).dump() << '\n'; };
    }
};

RecordWriter open_records(const io::RunConfig& rc)
{
    RecordWriter w;
    const std::string path = output(rc, "records");
    if (!path.empty()) {
        w.os.open(path);
        if (!w.os)
            throw ValidationError("cannot write records " + path);
    }
    return w;
}

double min_eigenvalue(const MatrixField& g)
{
    double m = INFINITY;
    for (std::size_t k = 0; k < g.size(); ++k)
        m = std::min(m, jacobi_eigh(g[k]).values.minCoeff());
    return m;
}

// ---- subcommands -------------------------------------------------------------------

struct SolveArgs {
    std::string config;
    std::string report;
};

int cmd_solve(const SolveArgs& a, int threads)
{
    const io::Config cfg = io::Config::load(a.config);
    const io::RunConfig rc = io::load_run_config(cfg);
    configure_threads(rc.threads, threads);

    const MongeAmpere ma(rc.problem, rc.dealias_e_term);
    RecordWriter records = open_records(rc);
    json j;
    j["command"] = "solve";
    j["variant"] = variant_name(rc.problem.variant);
    j["grid"] = grid_json(*rc.problem.grid());
    try {
        const SolveReport rep = continuity_solve(ma, rc.solver, records.sink());
        j["solve"] = io::to_json(rep);
        j["estimates"] = io::to_json(estimate_report(ma, rep.state, rc.cherrier_p));
        if (rc.reference.u_star || rc.reference.b_star) {
            json rec;
            if (rc.reference.u_star) {
                ScalarField u_star = io::read_scalar(*rc.reference.u_star, rc.problem.grid());
                const cplx m = mean(u_star);
                for (std::size_t k = 0; k < u_star.size(); ++k)
                    u_star[k] -= m;
                rec["u_rel_error"] = sup_norm(rep.state.u - u_star) / std::max(sup_norm(u_star), 1e-300);
            }
            if (rc.reference.b_star)
                rec["b_error"] = std::abs(rep.state.b - *rc.reference.b_star);
            j["recovery"] = rec;
        }
        if (const std::string p = output(rc, "state"); !p.empty())
            io::write_hmf1(p, rep.state.u);
        if (const std::string p = output(rc, "cherrier_csv"); !p.empty()) {
            std::ofstream os(p);
            write_cherrier_csv(os, cherrier_table(ma, rep.state, rc.cherrier_p));
        }
    } catch (const SolverError& e) {
        j["error"] = e.what();
        j["last_good_t"] = e.last_good_t();
        emit(j, a.report.empty() ? output(rc, "report") : a.report);
        std::cerr << "hermma solve: " << e.what() << '\n';
        return kExitSolver;
    }
    emit(j, a.report.empty() ? output(rc, "report") : a.report);
    return 0;
}

struct MetricArgs {
    std::string metric;
    std::string diff = "spectral";
    std::string out;
    std::string report;
};

DiffMode parse_diff(const std::string& s)
{
    if (s == "spectral")
        return DiffMode::spectral;
    if (s == "finite_difference")
        return DiffMode::finite_difference;
    throw ValidationError("--diff must be spectral or finite_difference");
}

MatrixField load_metric(const MetricArgs& a)
{
    const io::FieldData d = io::read_hmf1(a.metric);
    const GridPtr grid = io::grid_for(d.header, parse_diff(a.diff));
    MatrixField g = io::read_matrix(a.metric, grid);
    require_positive(g, "metric");
    return g;
}

int cmd_validate_metric(const MetricArgs& a, int threads)
{
    configure_threads(std::nullopt, threads);
    const MatrixField g = load_metric(a);
    const ConnectionData conn = chern_connection(g);
    double torsion = 0.0;
    for (const auto& t : conn.torsion)
        torsion = std::max(torsion, sup_norm(t));
    json j;
    j["command"] = "validate-metric";
    j["grid"] = grid_json(*g.grid());
    j["min_eigenvalue"] = min_eigenvalue(g);
    j["hermitian_error"] = [&] {
        double e = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k)
            e = std::max(e, hermitian_error(g[k]));
        return e;
    }();
    j["defects"] = io::to_json(metric_defects(g));
    j["torsion_sup"] = torsion;
    emit(j, a.report);
    return 0;
}

int cmd_gauduchon_factor(const MetricArgs& a, int threads)
{
    configure_threads(std::nullopt, threads);
    const MatrixField g = load_metric(a);
    const GauduchonFactor gf = gauduchon_factor(g);
    if (!a.out.empty())
        io::write_hmf1(a.out, gf.sigma);
    json j;
    j["command"] = "gauduchon-factor";
    j["grid"] = grid_json(*g.grid());
    j["defect_before"] = gf.defect_before;
    j["defect_after"] = gf.defect_after;
    j["projected_defect"] = gf.projected_defect;
    j["iterations"] = gf.iterations;
    j["sigma_sup"] = sup_norm(gf.sigma);
    emit(j, a.report);
    return 0;
}

struct ManufactureArgs {
    double amplitude = 0.05;
    std::uint64_t seed = 7;
    int dim = 3;
    int points = 16;
    std::vector<int> axes;
    std::string variant = "psi";
    double metric_amplitude = 0.08;
    double b_star = 0.05;
    bool with_psi = false;
    std::string out = ".";
};

std::string fmt(double v)
{
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string join(const std::vector<int>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? ", " : "") + std::to_string(v[i]);
    return s;
}

int cmd_manufacture(ManufactureArgs a, int threads)
{
    configure_threads(std::nullopt, threads);
    if (a.variant != "psi" && a.variant != "phi")
        throw ValidationError("--variant must be psi or phi");
    if (a.dim < 2 || a.dim > kMaxDim)
        throw ValidationError("--dim must be 2, 3 or 4");
    if (a.axes.empty())
        a.axes = a.dim == 2 ? std::vector<int>{0, 3} : a.dim == 3 ? std::vector<int>{0, 3, 4} : std::vector<int>{0, 3, 4, 7};
    GridPtr grid;
    try {
        grid = TorusGrid::make(a.dim, a.axes, a.points);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    fs::create_directories(a.out);
    const fs::path dir(a.out);

    testfields::Rng rng(a.seed);
    const auto pot = testfields::ridge_potential(grid, a.amplitude, a.seed + 1);
    std::ofstream cfg(dir / "problem.cfg");
    if (!cfg)
        throw ValidationError("cannot write " + (dir / "problem.cfg").string());
    cfg << "# generated by hermma manufacture --seed " << a.seed << " --amplitude " << fmt(a.amplitude) << "\n\n";
    cfg << "[problem]\nvariant = " << a.variant << "\ndim = " << a.dim << "\npoints = " << a.points
        << "\nactive_axes = " << join(a.axes) << '\n';

    json j;
    j["command"] = "manufacture";
    j["grid"] = grid_json(*grid);

    if (a.with_psi) {
        // Ricci data: psi = Ric(omega) - i d dbar phi for a known phi, omega pluriclosed, omega0 flat.
        const MatrixField omega = a.dim >= 3 ? testfields::skt_metric(grid, rng, a.metric_amplitude)
                                             : testfields::random_metric(grid, rng, a.metric_amplitude);
        const MatrixField psi = chern_ricci(omega) - hessian_complex(pot.values(grid));
        io::write_hmf1((dir / "omega.hmf1").string(), omega);
        io::write_hmf1((dir / "psi.hmf1").string(), psi);
        cfg << "omega = omega.hmf1\nomega0 = @flat\n\n[drivers]\npsi = psi.hmf1\n\n"
            << "[output]\nreport = ricci_report.json\nmetric = omega_tilde.hmf1\n";
        j["files"] = {"omega.hmf1", "psi.hmf1", "problem.cfg"};
    } else {
        ProblemSpec base;
        base.variant = a.variant == "psi" ? Variant::PSI : Variant::PHI;
        base.omega = testfields::random_metric(grid, rng, a.metric_amplitude, 2);
        base.omega0 = testfields::random_metric(grid, rng, a.metric_amplitude, 2);
        base.F = ScalarField(grid);
        const Manufactured m = manufacture(base, pot, a.b_star);
        io::write_hmf1((dir / "omega.hmf1").string(), m.spec.omega);
        io::write_hmf1((dir / "omega0.hmf1").string(), m.spec.omega0);
        io::write_hmf1((dir / "F.hmf1").string(), m.spec.F);
        io::write_hmf1((dir / "u_star.hmf1").string(), m.u_star);
        cfg << "omega = omega.hmf1\nomega0 = omega0.hmf1\nF = F.hmf1\n\n"
            << "[reference]\nu_star = u_star.hmf1\nb_star = " << fmt(a.b_star) << "\n\n"
            << "[output]\nreport = solve_report.json\nrecords = records.jsonl\nstate = u.hmf1\n";
        j["files"] = {"omega.hmf1", "omega0.hmf1", "F.hmf1", "u_star.hmf1", "problem.cfg"};
        j["u_star_sup"] = sup_norm(m.u_star);
        j["b_star"] = a.b_star;
    }
    cfg << "\n[run]\nseed = " << a.seed << '\n';
    emit(j, "");
    return 0;
}

struct RicciArgs {
    std::string config;
    std::string report;
};

int cmd_ricci(const RicciArgs& a, int threads)
{
    const io::Config cfg = io::Config::load(a.config);
    const io::RunConfig rc = io::load_run_config(cfg);
    configure_threads(rc.threads, threads);
    const auto psi_path = rc.extra.find("psi");
    if (psi_path == rc.extra.end())
        throw io::ConfigError(cfg.source(), 0, "drivers.psi", "required by the ricci command");
    const MatrixField psi = io::read_matrix(psi_path->second, rc.problem.grid());

    DriverOptions opt;
    opt.precondition_tol = rc.precondition_tol;
    opt.solver = rc.solver;
    opt.dealias_e_term = rc.dealias_e_term;
    RecordWriter records = open_records(rc);
    opt.sink = records.sink();
    json j;
    j["command"] = "ricci";
    j["grid"] = grid_json(*rc.problem.grid());
    const std::string report = a.report.empty() ? output(rc, "report") : a.report;
    try {
        const RicciResult r = prescribed_ricci(rc.problem, psi, opt);
        j["exactness_error"] = r.exactness_error;
        j["ricci_defect"] = r.ricci_defect;
        j["ricci_two_way_difference"] = r.ricci_two_way_difference;
        j["b_prime"] = r.solve.b_prime;
        j["volume_error"] = r.solve.volume_error;
        j["gauduchon_defect"] = r.solve.gauduchon_defect;
        j["solve"] = io::to_json(r.solve.report);
        if (const std::string p = output(rc, "metric"); !p.empty())
            io::write_hmf1(p, r.omega_tilde);
    } catch (const SolverError& e) {
        j["error"] = e.what();
        j["last_good_t"] = e.last_good_t();
        emit(j, report);
        std::cerr << "hermma ricci: " << e.what() << '\n';
        return kExitSolver;
    }
    emit(j, report);
    return 0;
}

struct DiagnoseArgs {
    std::string config;
    std::string state;
    std::optional<double> b;
    std::string report;
};

int cmd_diagnose(const DiagnoseArgs& a, int threads)
{
    const io::Config cfg = io::Config::load(a.config);
    const io::RunConfig rc = io::load_run_config(cfg);
    configure_threads(rc.threads, threads);
    const MongeAmpere ma(rc.problem, rc.dealias_e_term);

    SolveState s{io::read_scalar(a.state, rc.problem.grid()), 0.0, 1.0};
    s.u.make_real();
    if (a.b) {
        s.b = *a.b;
    } else {
        // b from the residual mean at t = 1.
        const MatrixField gt = ma.tilde_metric(s.u);
        double acc = 0.0;
        for (std::size_t k = 0; k < gt.size(); ++k)
            acc += std::log(real_det(gt[k])) - ma.log_det_reference()[k].real() - rc.problem.F[k].real();
        s.b = acc / static_cast<double>(gt.size());
    }
    const ScalarField r = ma.residual(s);
    json j;
    j["command"] = "diagnose";
    j["variant"] = variant_name(rc.problem.variant);
    j["grid"] = grid_json(*rc.problem.grid());
    j["b"] = s.b;
    j["residual_sup"] = sup_norm(r);
    j["estimates"] = io::to_json(estimate_report(ma, s, rc.cherrier_p));
    const MatrixField gt = ma.tilde_metric(s.u);
    j["tilde_min_eigenvalue"] = min_eigenvalue(gt);
    const CommutationRecord cr = commutation_check(rc.problem.omega, s.u);
    j["commutation"] = {{"first", cr.first}, {"second", cr.second}};
    j["omega_defects"] = io::to_json(metric_defects(rc.problem.omega));
    try {
        const AdjointKernel ak = adjoint_kernel(ma, s, rc.solver);
        j["adjoint"] = {{"f_min", [&] {
                             double m = INFINITY;
                             for (std::size_t k = 0; k < ak.f.size(); ++k)
                                 m = std::min(m, ak.f[k].real());
                             return m;
                         }()},
                        {"f_max", sup_norm(ak.f)},
                        {"residual", ak.adjoint_residual},
                        {"iterations", ak.iterations}};
    } catch (const SolverError& e) {
        j["adjoint"] = {{"error", e.what()}};
    }
    if (const std::string p = output(rc, "cherrier_csv"); !p.empty()) {
        std::ofstream os(p);
        write_cherrier_csv(os, cherrier_table(ma, s, rc.cherrier_p));
    }
    emit(j, a.report);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hermitian Monge-Ampere solver on flat tori"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (overrides config and HERMMA_NUM_THREADS)")
        ->check(CLI::PositiveNumber);

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "run the continuity method from a config file");
    solve->add_option("--config", solve_args.config)->required()->check(CLI::ExistingFile);
    solve->add_option("--report", solve_args.report, "report path ('-' for stdout)");

    MetricArgs vm_args;
    auto* vm = app.add_subcommand("validate-metric", "defects and torsion of a metric field");
    vm->add_option("metric", vm_args.metric)->required()->check(CLI::ExistingFile);
    vm->add_option("--diff", vm_args.diff);
    vm->add_option("--report", vm_args.report);

    ManufactureArgs mf_args;
    auto* mf = app.add_subcommand("manufacture", "write a problem with a known solution");
    mf->add_option("--amplitude", mf_args.amplitude);
    mf->add_option("--seed", mf_args.seed);
    mf->add_option("--dim", mf_args.dim);
    mf->add_option("--points", mf_args.points);
    mf->add_option("--axes", mf_args.axes);
    mf->add_option("--variant", mf_args.variant);
    mf->add_option("--metric-amplitude", mf_args.metric_amplitude);
    mf->add_option("--b-star", mf_args.b_star);
    mf->add_flag("--with-psi", mf_args.with_psi, "write prescribed Ricci data instead");
    mf->add_option("--out", mf_args.out);

    RicciArgs ricci_args;
    auto* ricci = app.add_subcommand("ricci", "metric with prescribed Chern-Ricci form");
    ricci->add_option("--config", ricci_args.config)->required()->check(CLI::ExistingFile);
    ricci->add_option("--report", ricci_args.report);

    DiagnoseArgs dg_args;
    auto* dg = app.add_subcommand("diagnose", "estimate monitors on a saved solution");
    dg->add_option("--config", dg_args.config)->required()->check(CLI::ExistingFile);
    dg->add_option("--state", dg_args.state)->required()->check(CLI::ExistingFile);
    dg->add_option("--b", dg_args.b);
    dg->add_option("--report", dg_args.report);

    MetricArgs gf_args;
    auto* gf = app.add_subcommand("gauduchon-factor", "conformal factor to a Gauduchon metric");
    gf->add_option("metric", gf_args.metric)->required()->check(CLI::ExistingFile);
    gf->add_option("--diff", gf_args.diff);
    gf->add_option("--out", gf_args.out, "sigma as an HMF1 scalar field");
    gf->add_option("--report", gf_args.report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*solve)
            return cmd_solve(solve_args, threads);
        if (*vm)
            return cmd_validate_metric(vm_args, threads);
        if (*mf)
            return cmd_manufacture(mf_args, threads);
        if (*ricci)
            return cmd_ricci(ricci_args, threads);
        if (*dg)
            return cmd_diagnose(dg_args, threads);
        if (*gf)
            return cmd_gauduchon_factor(gf_args, threads);
    } catch (const ValidationError& e) {
        std::cerr << "hermma: invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const CohomologyError& e) {
        std::cerr << "hermma: " << e.what() << '\n';
        return kExitValidation;
    } catch (const PositivityError& e) {
        std::cerr << "hermma: " << e.what() << '\n';
        return kExitValidation;
    } catch (const SolverError& e) {
        std::cerr << "hermma: solver failed: " << e.what() << '\n';
        return kExitSolver;
    }
    return 0;
}
