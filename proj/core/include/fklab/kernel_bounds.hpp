#pragma once

#include <vector>

#include "fklab/elliptic.hpp"

namespace fklab {

// Gaussian heat-kernel majorant c1 s^{-n/2} exp(-|x-y|^2 / (c2 s)).
struct KernelConstants {
    double c1 = 1.0;
    double c2 = 1.0;
    int n = 3;

    // The exact Laplacian kernel: c1 = (4 pi)^{-n/2}, c2 = 4.
    static KernelConstants exact_heat(int n);
};

// int_0^d c1 s^{-n/2} exp(-r^2/(c2 s)) ds, r > 0, d > 0.  Closed forms for
// n in {2, 3, 4}; incomplete-gamma quadrature otherwise.  Relative error 1e-8.
double time_integrated_gaussian(double r, double d, const KernelConstants& k);

// Dominating shape of the time-integrated kernel in terms of x = r^2/(c2 d):
//   n = 2:      (1 + max(0, -log x)) exp(-x)
//   n in {3,4}: r^{2-n} exp(-x)
//   n >= 5:     r^{2-n} q(x) exp(-x), q from gauss_bound_polynomial
double lemma_gauss_bound(double r, double d, const KernelConstants& k);

// Coefficients [q_0 .. q_k] (ascending degree) of the bound polynomial for
// n >= 5, k = ceil((n-4)/2), built from the integration-by-parts recursion
// int_a^inf y^k e^{-y} dy = a^k e^{-a} + k int_a^inf y^{k-1} e^{-y} dy.
std::vector<double> gauss_bound_polynomial(int n);

// int p_s(x, y) dy by radial quadrature; equals 1 for the exact kernel.
double heat_kernel_mass(const KernelConstants& k, double s);

// Empirical constant of the convolution estimate (n >= 3):
//   sup_x int f(y) (int_0^{d^2} p_s(x,y) ds) dy
//   ------------------------------------------------
//   sup over balls B with |B| <= d^n of ||f||_{L^{n/2,1}(B)}
// f >= 0 with compact support; candidate centers cover the support dilated by
// 2d at spacing d/8 (snapped to cell centers); exact A=I kernel constants.
double lemma_est_ratio(const ScalarField& f, double d, const KernelConstants& k);

// int_{|y| <= d} f(x-y) log(d^2/|y|^2) dy on a 2-D grid; the touching singular
// cell is integrated in closed form over its square.  Requires d >= 2h.
double log_kernel_convolution(const ScalarField& f, const Vec& x, double d);

// Empirical constant of the 2-D log-kernel domination:
//   sup_x int f(x-y) g(y) dy / sup_x log_kernel_convolution(f, x, d)
// with g(y) = (1 + log(d^2/|y|^2) 1_{|y| <= d}) exp(-|y|^2/d^2).
double lemma_final_ratio(const ScalarField& f, double d);

}  // namespace fklab
