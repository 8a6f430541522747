#pragma once

// Field files (HMF1, see docs/hmf1.md), run configuration files, and JSON reports.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "hermma/diagnostics.hpp"
#include "hermma/errors.hpp"
#include "hermma/solver.hpp"

namespace hermma::io {

using json = nlohmann::ordered_json;

// ---- HMF1 ---------------------------------------------------------------------

struct FieldHeader {
    int n = 0;
    std::vector<int> sizes;
    std::vector<std::uint8_t> active;
    std::uint32_t components = 0;  // 1 for scalars, n*n for matrix fields
};

struct FieldData {
    FieldHeader header;
    std::vector<cplx> values;  // node-major, components row-major within a node
};

void write_hmf1(std::ostream& os, const ScalarField& f);
void write_hmf1(std::ostream& os, const MatrixField& f);
void write_hmf1(const std::string& path, const ScalarField& f);
void write_hmf1(const std::string& path, const MatrixField& f);

/// Throws ValidationError on a malformed or truncated file.
FieldData read_hmf1(std::istream& is, const std::string& name = "<stream>");
FieldData read_hmf1(const std::string& path);

/// Grid described by a header.
GridPtr grid_for(const FieldHeader& h, DiffMode mode = DiffMode::spectral);

/// Read a field and check it lives on `grid`.
ScalarField read_scalar(const std::string& path, const GridPtr& grid);
MatrixField read_matrix(const std::string& path, const GridPtr& grid);

// ---- configuration --------------------------------------------------------------

class ConfigError : public ValidationError {
public:
    ConfigError(const std::string& source, int line, const std::string& field, const std::string& msg);
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

/// Flat key = value text with [section] headers. '#' and ';' start comments.
class Config {
public:
    static Config parse(std::istream& is, const std::string& source = "<config>");
    static Config load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::optional<std::string>& fallback = std::nullopt) const;
    double get_double(const std::string& section, const std::string& key, std::optional<double> fallback = {}) const;
    int get_int(const std::string& section, const std::string& key, std::optional<int> fallback = {}) const;
    bool get_bool(const std::string& section, const std::string& key, std::optional<bool> fallback = {}) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                    const std::optional<std::vector<double>>& fallback = {}) const;
    std::vector<int> get_ints(const std::string& section, const std::string& key,
                              const std::optional<std::vector<int>>& fallback = {}) const;

    /// Rejects sections or keys outside `allowed`.
    void check_known(const std::map<std::string, std::set<std::string>>& allowed) const;

    /// Resolves a path relative to the directory of the config file.
    std::string resolve(const std::string& path) const;

    const std::string& source() const { return source_; }
    /// Line of a key, else of its section, else 0.
    int line_of(const std::string& section, const std::string& key) const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    const Entry* find(const std::string& section, const std::string& key) const;
    [[noreturn]] void fail(const std::string& section, const std::string& key, int line, const std::string& msg) const;

    std::string source_;
    std::string base_dir_;
    std::map<std::string, std::map<std::string, Entry>> entries_;
    std::map<std::string, int> section_lines_;
};

struct ReferenceSolution {
    std::optional<std::string> u_star;  // HMF1 path
    std::optional<double> b_star;
};

struct RunConfig {
    ProblemSpec problem;
    SolverConfig solver;
    bool dealias_e_term = false;
    double precondition_tol = 1e-8;
    std::optional<int> threads;
    std::uint64_t seed = 0;
    std::vector<double> cherrier_p{4, 8, 16, 32};
    ReferenceSolution reference;
    std::map<std::string, std::string> outputs;  // report, records, state, cherrier_csv, metric
    std::map<std::string, std::string> extra;    // pipeline-specific inputs, e.g. ricci psi
};

/// Builds the run from a parsed config, reading and validating every referenced field.
/// Field references are HMF1 paths or the keywords @flat (identity metric) and @zero.
RunConfig load_run_config(const Config& cfg);

// ---- JSON ---------------------------------------------------------------------------

json to_json(const IterationRecord& r);
json to_json(const SolveReport& r);
json to_json(const MetricDefects& d);
json to_json(const BBound& b);
json to_json(const C2Record& c);
json to_json(const EtaBand& e);
json to_json(const std::vector<CherrierRow>& rows);
json to_json(const EstimateReport& r);

}  // namespace hermma::io
