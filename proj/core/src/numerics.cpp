#include "fklab/numerics.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fklab {

namespace {

constexpr std::size_t kBlock = 4096;

double serial_sum(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

// Combine partial sums pairwise in a fixed order.
double pairwise_combine(std::vector<double>& parts) {
    std::size_t n = parts.size();
    while (n > 1) {
        std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i < n / 2; ++i) parts[i] = parts[2 * i] + parts[2 * i + 1];
        if (n % 2 == 1) parts[n / 2] = parts[n - 1];
        n = half;
    }
    return n == 1 ? parts[0] : 0.0;
}

int g_threads = -1;  // -1: not yet initialised from environment

}  // namespace

void set_thread_count(int n) {
    if (const char* env = std::getenv("FKLAB_THREADS")) {
        const int e = std::atoi(env);
        if (e > 0) n = e;  // the environment variable outranks explicit requests
    }
    g_threads = n < 0 ? 0 : n;
#ifdef _OPENMP
    if (g_threads > 0) omp_set_num_threads(g_threads);
#endif
}

int thread_count() {
    if (g_threads < 0) set_thread_count(0);
    return g_threads;
}

double det_sum(const double* x, std::size_t n) {
    if (n == 0) return 0.0;
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    std::vector<double> parts(blocks);
    (void)thread_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long b = 0; b < static_cast<long long>(blocks); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        parts[b] = serial_sum(x + lo, std::min(kBlock, n - lo));
    }
    return pairwise_combine(parts);
}

double det_sum(const std::vector<double>& x) { return det_sum(x.data(), x.size()); }

double det_dot(const double* a, const double* b, std::size_t n) {
    if (n == 0) return 0.0;
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    std::vector<double> parts(blocks);
    (void)thread_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long bi = 0; bi < static_cast<long long>(blocks); ++bi) {
        const std::size_t lo = static_cast<std::size_t>(bi) * kBlock;
        const std::size_t hi = std::min(lo + kBlock, n);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
        parts[bi] = s;
    }
    return pairwise_combine(parts);
}

double det_dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("det_dot: size mismatch");
    return det_dot(a.data(), b.data(), a.size());
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b,
               double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa, double b,
             double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, lm, flm);
    const double right = simpson(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = simpson(f, a, fa, b, fb, m, fm);
    return adapt(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

}  // namespace fklab
