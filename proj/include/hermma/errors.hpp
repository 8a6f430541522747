#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace hermma {

/// Short scientific rendering for error messages.
inline std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

/// A pointwise Hermitian quantity that must be positive failed at the listed nodes.
class PositivityError : public std::domain_error {
public:
    PositivityError(const std::string& what, std::vector<std::size_t> nodes)
        : std::domain_error(what + " (" + std::to_string(nodes.size()) + " nodes)"), nodes_(std::move(nodes))
    {
    }
    const std::vector<std::size_t>& nodes() const noexcept { return nodes_; }

private:
    std::vector<std::size_t> nodes_;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double last_good_t)
        : std::runtime_error(what), last_good_t_(last_good_t)
    {
    }
    double last_good_t() const noexcept { return last_good_t_; }

private:
    double last_good_t_;
};

/// Input data violates a documented precondition (metric conditions, file contents, config).
class ValidationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Prescribed Ricci data is not in the Bott-Chern class of the background.
class CohomologyError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace hermma
