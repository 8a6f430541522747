#pragma once

// Node-loop execution. Every grid kernel in the library is a per-node map, so the
// parallel and serial paths run the same body and produce bit-identical output.
// The serial path is the reference the tests and benchmarks compare against.

#include <complex>
#include <cstddef>
#include <span>

namespace hermma::kernels {

enum class Exec { serial, parallel };

Exec default_exec();
void set_default_exec(Exec e);

int thread_count();
void set_thread_count(int n);

template <class Body>
void for_each_node(std::size_t count, Body&& body, Exec exec = default_exec())
{
    const auto n = static_cast<std::ptrdiff_t>(count);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            body(static_cast<std::size_t>(i));
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            body(static_cast<std::size_t>(i));
    }
}

/// Fixed-order pairwise summation; the result does not depend on the thread schedule.
double pairwise_sum(std::span<const double> x);
std::complex<double> pairwise_sum(std::span<const std::complex<double>> x);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace hermma::kernels
