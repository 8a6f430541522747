#include "hermma/kernels.hpp"

#include <atomic>
#include <vector>

#include <omp.h>

namespace hermma::kernels {

namespace {
std::atomic<Exec> g_exec{Exec::parallel};

template <class T>
T pairwise(const T* x, std::size_t n)
{
    if (n <= 16) {
        T s{};
        for (std::size_t i = 0; i < n; ++i)
            s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise(x, half) + pairwise(x + half, n - half);
}
}  // namespace

Exec default_exec() { return g_exec.load(); }
void set_default_exec(Exec e) { g_exec.store(e); }

int thread_count() { return omp_get_max_threads(); }
void set_thread_count(int n)
{
    if (n > 0)
        omp_set_num_threads(n);
}

double pairwise_sum(std::span<const double> x) { return pairwise(x.data(), x.size()); }

std::complex<double> pairwise_sum(std::span<const std::complex<double>> x)
{
    return pairwise(x.data(), x.size());
}

double dot(std::span<const double> a, std::span<const double> b)
{
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        prod[i] = a[i] * b[i];
    return pairwise_sum(prod);
}

}  // namespace hermma::kernels
