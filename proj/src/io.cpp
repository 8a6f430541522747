#include "hermma/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hermma::io {

namespace {

constexpr std::array<char, 12> kMagic{'H', 'M', 'F', '1', '-', 'F', 'I', 'E', 'L', 'D', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v)
{
    char b[4];
    for (int i = 0; i < 4; ++i)
        b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(b, 4);
}

void put_f64(std::ostream& os, double d)
{
    const auto v = std::bit_cast<std::uint64_t>(d);
    char b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(b, 8);
}

class Reader {
public:
    Reader(std::istream& is, std::string name) : is_(is), name_(std::move(name)) {}

    void bytes(char* out, std::size_t n, const char* what)
    {
        is_.read(out, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(is_.gcount()) != n)
            throw ValidationError(name_ + ": truncated HMF1 file while reading " + what);
    }
    std::uint32_t u32(const char* what)
    {
        unsigned char b[4];
        bytes(reinterpret_cast<char*>(b), 4, what);
        return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
    }
    double f64(const char* what)
    {
        unsigned char b[8];
        bytes(reinterpret_cast<char*>(b), 8, what);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i)
            v = (v << 8) | b[i];
        return std::bit_cast<double>(v);
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ValidationError(name_ + ": " + msg); }

private:
    std::istream& is_;
    std::string name_;
};

void write_header(std::ostream& os, const TorusGrid& g, std::uint32_t components)
{
    os.write(kMagic.data(), kMagic.size());
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(g.dim()));
    for (int s : g.sizes())
        put_u32(os, static_cast<std::uint32_t>(s));
    for (int s : g.sizes()) {
        const char a = s > 1 ? 1 : 0;
        os.write(&a, 1);
    }
    put_u32(os, components);
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ValidationError("cannot open " + path + " for writing");
    return os;
}

}  // namespace

void write_hmf1(std::ostream& os, const ScalarField& f)
{
    write_header(os, *f.grid(), 1);
    for (std::size_t k = 0; k < f.size(); ++k) {
        put_f64(os, f[k].real());
        put_f64(os, f[k].imag());
    }
}

void write_hmf1(std::ostream& os, const MatrixField& f)
{
    const int n = f.dim();
    write_header(os, *f.grid(), static_cast<std::uint32_t>(n * n));
    for (std::size_t k = 0; k < f.size(); ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                put_f64(os, f[k](i, j).real());
                put_f64(os, f[k](i, j).imag());
            }
}

void write_hmf1(const std::string& path, const ScalarField& f)
{
    auto os = open_out(path);
    write_hmf1(os, f);
}

void write_hmf1(const std::string& path, const MatrixField& f)
{
    auto os = open_out(path);
    write_hmf1(os, f);
}

FieldData read_hmf1(std::istream& is, const std::string& name)
{
    Reader rd(is, name);
    std::array<char, 12> magic{};
    rd.bytes(magic.data(), magic.size(), "magic");
    if (magic != kMagic)
        rd.fail("not an HMF1 field file (bad magic)");
    const std::uint32_t version = rd.u32("version");
    if (version != kVersion)
        rd.fail("unsupported HMF1 version " + std::to_string(version));
    FieldData out;
    const std::uint32_t n = rd.u32("dimension");
    if (n < 1 || n > static_cast<std::uint32_t>(kMaxDim))
        rd.fail("complex dimension " + std::to_string(n) + " outside [1, 4]");
    out.header.n = static_cast<int>(n);
    std::size_t count = 1;
    for (std::uint32_t a = 0; a < 2 * n; ++a) {
        const std::uint32_t s = rd.u32("sizes");
        if (s == 0 || s > (1u << 20))
            rd.fail("axis " + std::to_string(a) + " has invalid size " + std::to_string(s));
        out.header.sizes.push_back(static_cast<int>(s));
        count *= s;
    }
    for (std::uint32_t a = 0; a < 2 * n; ++a) {
        char c = 0;
        rd.bytes(&c, 1, "active mask");
        if (c != 0 && c != 1)
            rd.fail("active mask byte must be 0 or 1");
        if ((c == 1) != (out.header.sizes[a] > 1))
            rd.fail("active mask disagrees with size on axis " + std::to_string(a));
        out.header.active.push_back(static_cast<std::uint8_t>(c));
    }
    out.header.components = rd.u32("component count");
    if (out.header.components != 1 && out.header.components != n * n)
        rd.fail("component count must be 1 or n*n, got " + std::to_string(out.header.components));
    if (count > TorusGrid::kDefaultNodeBudget)
        rd.fail("node count exceeds the budget");
    out.values.resize(count * out.header.components);
    for (auto& v : out.values) {
        const double re = rd.f64("payload");
        const double im = rd.f64("payload");
        v = cplx(re, im);
    }
    if (is.peek() != std::char_traits<char>::eof())
        rd.fail("trailing bytes after payload");
    return out;
}

FieldData read_hmf1(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ValidationError("cannot open field file " + path);
    return read_hmf1(is, path);
}

GridPtr grid_for(const FieldHeader& h, DiffMode mode)
{
    try {
        return std::make_shared<const TorusGrid>(h.n, h.sizes, mode);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
}

namespace {

void check_grid(const FieldHeader& h, const GridPtr& grid, const std::string& path)
{
    if (h.n != grid->dim() || h.sizes != grid->sizes())
        throw ValidationError(path + ": field grid does not match the configured grid");
}

}  // namespace

ScalarField read_scalar(const std::string& path, const GridPtr& grid)
{
    FieldData d = read_hmf1(path);
    check_grid(d.header, grid, path);
    if (d.header.components != 1)
        throw ValidationError(path + ": expected a scalar field");
    return ScalarField(grid, std::move(d.values));
}

MatrixField read_matrix(const std::string& path, const GridPtr& grid)
{
    FieldData d = read_hmf1(path);
    check_grid(d.header, grid, path);
    const int n = d.header.n;
    if (d.header.components != static_cast<std::uint32_t>(n * n))
        throw ValidationError(path + ": expected a matrix field");
    MatrixField m(grid, n);
    for (std::size_t k = 0; k < m.size(); ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m[k](i, j) = d.values[k * n * n + i * n + j];
    return m;
}

// ---- configuration --------------------------------------------------------------

ConfigError::ConfigError(const std::string& source, int line, const std::string& field, const std::string& msg)
    : ValidationError(source + ":" + std::to_string(line) + ": " + field + ": " + msg), line_(line), field_(field)
{
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ','))
        if (!trim(cur).empty())
            out.push_back(trim(cur));
    return out;
}

template <class T>
bool parse_number(const std::string& s, T& out)
{
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

}  // namespace

Config Config::parse(std::istream& is, const std::string& source)
{
    Config c;
    c.source_ = source;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ConfigError(source, lineno, line, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (c.section_lines_.count(section))
                throw ConfigError(source, lineno, section, "duplicate section");
            c.section_lines_[section] = lineno;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source, lineno, line, "expected key = value");
        if (section.empty())
            throw ConfigError(source, lineno, trim(line.substr(0, eq)), "key outside of any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(source, lineno, line, "empty key");
        auto& sec = c.entries_[section];
        if (sec.count(key))
            throw ConfigError(source, lineno, section + "." + key, "duplicate key");
        sec[key] = {value, lineno};
    }
    return c;
}

Config Config::load(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw ValidationError("cannot open config file " + path);
    Config c = parse(is, path);
    c.base_dir_ = std::filesystem::path(path).parent_path().string();
    return c;
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const
{
    const auto s = entries_.find(section);
    if (s == entries_.end())
        return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

void Config::fail(const std::string& section, const std::string& key, int line, const std::string& msg) const
{
    throw ConfigError(source_, line, section + "." + key, msg);
}

int Config::line_of(const std::string& section, const std::string& key) const
{
    if (const Entry* e = find(section, key))
        return e->line;
    const auto s = section_lines_.find(section);
    return s == section_lines_.end() ? 0 : s->second;
}

bool Config::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::optional<std::string>& fallback) const
{
    if (const Entry* e = find(section, key))
        return e->value;
    if (!fallback)
        fail(section, key, line_of(section, key), "required key is missing");
    return *fallback;
}

double Config::get_double(const std::string& section, const std::string& key, std::optional<double> fallback) const
{
    const Entry* e = find(section, key);
    if (!e) {
        if (!fallback)
            fail(section, key, line_of(section, key), "required key is missing");
        return *fallback;
    }
    double v = 0.0;
    if (!parse_number(e->value, v))
        fail(section, key, e->line, "expected a number, got '" + e->value + "'");
    return v;
}

int Config::get_int(const std::string& section, const std::string& key, std::optional<int> fallback) const
{
    const Entry* e = find(section, key);
    if (!e) {
        if (!fallback)
            fail(section, key, line_of(section, key), "required key is missing");
        return *fallback;
    }
    int v = 0;
    if (!parse_number(e->value, v))
        fail(section, key, e->line, "expected an integer, got '" + e->value + "'");
    return v;
}

bool Config::get_bool(const std::string& section, const std::string& key, std::optional<bool> fallback) const
{
    const Entry* e = find(section, key);
    if (!e) {
        if (!fallback)
            fail(section, key, line_of(section, key), "required key is missing");
        return *fallback;
    }
    if (e->value == "true" || e->value == "yes" || e->value == "1")
        return true;
    if (e->value == "false" || e->value == "no" || e->value == "0")
        return false;
    fail(section, key, e->line, "expected true or false, got '" + e->value + "'");
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key,
                                        const std::optional<std::vector<double>>& fallback) const
{
    const Entry* e = find(section, key);
    if (!e) {
        if (!fallback)
            fail(section, key, line_of(section, key), "required key is missing");
        return *fallback;
    }
    std::vector<double> out;
    for (const auto& item : split_list(e->value)) {
        double v = 0.0;
        if (!parse_number(item, v))
            fail(section, key, e->line, "expected a comma-separated list of numbers, got '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<int> Config::get_ints(const std::string& section, const std::string& key,
                                  const std::optional<std::vector<int>>& fallback) const
{
    const Entry* e = find(section, key);
    if (!e) {
        if (!fallback)
            fail(section, key, line_of(section, key), "required key is missing");
        return *fallback;
    }
    std::vector<int> out;
    for (const auto& item : split_list(e->value)) {
        int v = 0;
        if (!parse_number(item, v))
            fail(section, key, e->line, "expected a comma-separated list of integers, got '" + item + "'");
        out.push_back(v);
    }
    return out;
}

void Config::check_known(const std::map<std::string, std::set<std::string>>& allowed) const
{
    for (const auto& [section, keys] : entries_) {
        const auto a = allowed.find(section);
        if (a == allowed.end())
            throw ConfigError(source_, section_lines_.at(section), section, "unknown section");
        for (const auto& [key, entry] : keys)
            if (!a->second.count(key))
                throw ConfigError(source_, entry.line, section + "." + key, "unknown key");
    }
}

std::string Config::resolve(const std::string& path) const
{
    const std::filesystem::path p(path);
    if (p.is_absolute() || base_dir_.empty())
        return p.string();
    return (std::filesystem::path(base_dir_) / p).string();
}

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys{
    {"problem",
     {"variant", "dim", "points", "active_axes", "diff", "omega", "omega0", "F", "rhs_volume", "dealias"}},
    {"solver",
     {"newton_tol", "max_newton", "schedule", "min_step", "max_halvings", "stagnation_window", "linear_tol",
      "gmres_restart", "gmres_max_iterations"}},
    {"drivers", {"precondition_tol", "psi"}},
    {"reference", {"u_star", "b_star"}},
    {"output", {"report", "records", "state", "cherrier_csv", "metric"}},
    {"run", {"threads", "seed", "cherrier_p"}},
};

std::vector<int> default_axes(int n)
{
    switch (n) {
    case 2: return {0, 3};
    case 3: return {0, 3, 4};
    default: return {0, 3, 4, 7};
    }
}

}  // namespace

RunConfig load_run_config(const Config& cfg)
{
    cfg.check_known(kKnownKeys);
    RunConfig rc;
    auto bad = [&](const std::string& section, const std::string& key, const std::string& msg) {
        throw ConfigError(cfg.source(), cfg.line_of(section, key), key.empty() ? section : section + "." + key, msg);
    };

    const std::string variant = cfg.get_string("problem", "variant", std::string("psi"));
    if (variant == "psi")
        rc.problem.variant = Variant::PSI;
    else if (variant == "phi")
        rc.problem.variant = Variant::PHI;
    else
        bad("problem", "variant", "expected psi or phi, got '" + variant + "'");

    const int n = cfg.get_int("problem", "dim", 3);
    if (n < 2 || n > kMaxDim)
        bad("problem", "dim", "must be 2, 3 or 4");
    const int points = cfg.get_int("problem", "points", n == 2 ? 32 : 16);
    const std::vector<int> axes = cfg.get_ints("problem", "active_axes", default_axes(n));
    const std::string diff = cfg.get_string("problem", "diff", std::string("spectral"));
    DiffMode mode = DiffMode::spectral;
    if (diff == "finite_difference")
        mode = DiffMode::finite_difference;
    else if (diff != "spectral")
        bad("problem", "diff", "expected spectral or finite_difference");
    for (int a : axes)
        if (a < 0 || a >= 2 * n)
            bad("problem", "active_axes", "axis index out of range");
    GridPtr grid;
    try {
        grid = TorusGrid::make(n, axes, points, mode);
    } catch (const std::invalid_argument& e) {
        bad("problem", "points", e.what());
    }

    auto metric = [&](const std::string& key) {
        const std::string ref = cfg.get_string("problem", key, std::string("@flat"));
        if (ref == "@flat")
            return MatrixField(grid, n, identity(n));
        return read_matrix(cfg.resolve(ref), grid);
    };
    auto scalar = [&](const std::string& section, const std::string& key) {
        const std::string ref = cfg.get_string(section, key, std::string("@zero"));
        if (ref == "@zero")
            return ScalarField(grid);
        return read_scalar(cfg.resolve(ref), grid);
    };
    rc.problem.omega = metric("omega");
    rc.problem.omega0 = metric("omega0");
    rc.problem.F = scalar("problem", "F");
    const std::string rhs = cfg.get_string("problem", "rhs_volume", std::string("omega_n"));
    if (rhs == "omega_n")
        rc.problem.rhs_volume = RhsVolume::OMEGA_N;
    else if (rhs == "omega_h_n")
        rc.problem.rhs_volume = RhsVolume::OMEGA_H_N;
    else
        bad("problem", "rhs_volume", "expected omega_n or omega_h_n");
    rc.dealias_e_term = cfg.get_bool("problem", "dealias", false);

    SolverConfig& s = rc.solver;
    s.newton_tol = cfg.get_double("solver", "newton_tol", s.newton_tol);
    s.max_newton = cfg.get_int("solver", "max_newton", s.max_newton);
    s.schedule = cfg.get_doubles("solver", "schedule", s.schedule);
    s.min_step = cfg.get_double("solver", "min_step", s.min_step);
    s.max_halvings = cfg.get_int("solver", "max_halvings", s.max_halvings);
    s.stagnation_window = cfg.get_int("solver", "stagnation_window", s.stagnation_window);
    s.linear_tol = cfg.get_double("solver", "linear_tol", s.linear_tol);
    s.gmres_restart = cfg.get_int("solver", "gmres_restart", s.gmres_restart);
    s.gmres_max_iterations = cfg.get_int("solver", "gmres_max_iterations", s.gmres_max_iterations);
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        bad("solver", "", e.what());
    }

    rc.precondition_tol = cfg.get_double("drivers", "precondition_tol", rc.precondition_tol);
    if (cfg.has("drivers", "psi"))
        rc.extra["psi"] = cfg.resolve(cfg.get_string("drivers", "psi"));
    if (cfg.has("reference", "u_star"))
        rc.reference.u_star = cfg.resolve(cfg.get_string("reference", "u_star"));
    if (cfg.has("reference", "b_star"))
        rc.reference.b_star = cfg.get_double("reference", "b_star");
    for (const char* key : {"report", "records", "state", "cherrier_csv", "metric"})
        if (cfg.has("output", key))
            rc.outputs[key] = cfg.resolve(cfg.get_string("output", key));
    if (cfg.has("run", "threads")) {
        const int t = cfg.get_int("run", "threads");
        if (t < 1)
            bad("run", "threads", "must be at least 1");
        rc.threads = t;
    }
    const int seed = cfg.get_int("run", "seed", 0);
    if (seed < 0)
        bad("run", "seed", "must be non-negative");
    rc.seed = static_cast<std::uint64_t>(seed);
    rc.cherrier_p = cfg.get_doubles("run", "cherrier_p", rc.cherrier_p);

    try {
        rc.problem.validate();
    } catch (const PositivityError& e) {
        throw ValidationError(std::string("problem: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    return rc;
}

// ---- JSON ---------------------------------------------------------------------------

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const IterationRecord& r)
{
    return json{{"t", r.t},
                {"iter", r.iter},
                {"residual_sup", r.residual_sup},
                {"b", r.b},
                {"positivity_margin", r.positivity_margin},
                {"damping", r.damping}};
}

json to_json(const SolveReport& r)
{
    json j;
    j["t"] = r.state.t;
    j["b"] = r.state.b;
    j["residual_sup"] = r.residual_history.empty() ? 0.0 : r.residual_history.back();
    j["positivity_margin"] = r.positivity_margin;
    j["newton_iterations"] = r.newton_iterations;
    j["linear_iterations"] = r.linear_iterations;
    j["quadratic_constant"] = r.quadratic_constant ? json(*r.quadratic_constant) : json(nullptr);
    j["residual_history"] = r.residual_history;
    j["b_history"] = r.b_history;
    return j;
}

json to_json(const MetricDefects& d)
{
    return json{{"gauduchon", d.gauduchon},
                {"astheno", d.astheno ? json(*d.astheno) : json("not applicable")},
                {"kahler", d.kahler}};
}

json to_json(const BBound& b)
{
    return json{{"abs_b", b.abs_b}, {"sup_F", b.sup_F}, {"c_meas", b.c_meas}, {"slack", b.slack}, {"ok", b.ok}};
}

json to_json(const C2Record& c) { return json{{"sup_trace", c.sup_trace}, {"K", c.K}, {"ratio", c.ratio}}; }

json to_json(const EtaBand& e)
{
    return json{{"violations", e.violations}, {"min_slack", e.min_slack}, {"dual_formula_gap", e.dual_formula_gap}};
}

json to_json(const std::vector<CherrierRow>& rows)
{
    json a = json::array();
    for (const auto& r : rows)
        a.push_back(json{{"p", r.p},
                         {"lhs", finite_or_null(r.lhs)},
                         {"rhs", finite_or_null(r.rhs)},
                         {"ratio", finite_or_null(r.ratio)},
                         {"saturated", r.saturated}});
    return a;
}

json to_json(const EstimateReport& r)
{
    json j;
    j["b_bound"] = to_json(r.b_bound);
    j["c2"] = to_json(r.c2);
    j["eta_band"] = to_json(r.eta);
    j["cherrier"] = to_json(r.cherrier);
    j["phi_closedness"] = r.phi_closedness ? json(*r.phi_closedness) : json(nullptr);
    return j;
}

}  // namespace hermma::io
