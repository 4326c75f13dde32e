#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fklab {

// --- deterministic reductions -------------------------------------------------
//
// Every floating-point reduction that can reach an output file goes through a
// fixed-block pairwise tree: the array is cut into blocks of 4096, each block is
// summed serially in index order, and the block sums are combined pairwise in a
// fixed order.  The result does not depend on the number of threads, so runs
// with different --threads settings stay byte-identical.

double det_sum(const double* x, std::size_t n);
double det_sum(const std::vector<double>& x);
double det_dot(const double* a, const double* b, std::size_t n);
double det_dot(const std::vector<double>& a, const std::vector<double>& b);

// --- thread control -------------------------------------------------------------

// Number of worker threads used by parallel loops (OpenMP when available).
// 0 means "library default".  The FKLAB_THREADS environment variable, when set
// to a positive value, outranks any explicit set_thread_count request.
void set_thread_count(int n);
int thread_count();

// --- quadrature -----------------------------------------------------------------

// Adaptive Simpson quadrature on [a, b] to absolute tolerance tol.
// The integrand must be finite on (a, b); endpoint singularities should be
// substituted away by the caller.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 48);

}  // namespace fklab
