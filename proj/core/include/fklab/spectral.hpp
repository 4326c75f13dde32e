#pragma once

#include <cstdint>
#include <memory>

#include "fklab/elliptic.hpp"

namespace fklab {

struct EigenOpts {
    double rel_tol = 1e-8;    // residual tolerance relative to |eigenvalue|
    double abs_floor = 0.0;   // absolute residual floor (used near eigenvalue 0)
    double cg_tol = 1e-12;
    int max_iters = 2000;
    const std::vector<double>* warm_start = nullptr;
};

struct EigenPair {
    double lambda = 0.0;     // eigenvalue of -(L+V); smallest
    ScalarField u;           // sup-normalized, positive at its max cell
    double residual = 0.0;   // ||(L+V)u + lambda u||_2 / ||u||_2
    int iterations = 0;
};

// Smallest eigenvalue of -L by inverse power iteration (fixed shift 0), with
// the Rayleigh quotient as the eigenvalue estimate.  Throws on non-convergence,
// reporting the last Rayleigh quotient.
EigenPair principal_eigenpair(const DiscreteOperator& op, const EigenOpts& opts = {});

// Smallest eigenvalue mu_1 of -(L+V).  V may be null (then this is
// principal_eigenpair).  Indefinite V is handled by shifting with max V before
// inverting, which keeps the inner solves positive definite.
EigenPair eigen_with_potential(const DiscreteOperator& op, const std::vector<double>* V,
                               const EigenOpts& opts = {});

struct Calibration {
    double s = 0.0;          // multiplier with mu_1(-(L + s V0)) ~ 0
    double mu = 0.0;         // achieved top eigenvalue
    double lambda1 = 0.0;    // principal eigenvalue of -L
    ScalarField u;           // ground state of L + s V0, sup-normalized
    int eigensolves = 0;
};

// Find s with mu_1(-(L + s V0)) = 0 by bisection on s; V0 >= 0, not identically
// zero.  Bracket [0, 2 lambda1 / min_{supp} V0], geometrically expanded when
// needed; stops at |mu_1| <= rel_tol * lambda1.
Calibration calibrate_potential(const DiscreteOperator& op, const ScalarField& V0,
                                double rel_tol = 1e-6, const EigenOpts& eig = {});

struct ArgmaxResult {
    std::int64_t cell = -1;
    Vec x{0, 0, 0};
    int sign = 1;
    double value = 0.0;  // |f| at the max
};

// Location of max |f|; ties broken by the lowest linear cell index.  Throws on
// an identically zero field.
ArgmaxResult argmax_abs(const ScalarField& f);

struct FixturePair {
    std::shared_ptr<const DomainMask> mask;
    ScalarField u;
    ScalarField V;
};

// Exact product eigenfunction on the unit square: u = sin(n pi x) sin(m pi y)
// with constant potential (m^2 + n^2) pi^2; h is snapped to 1/round(1/h) so the
// boundary faces land exactly on the square's sides.
FixturePair sine_fixture(int m, int n, double h);

// Radial pair on the unit disk with an epsilon-spike potential:
//   u(r) = 1/2 - log(eps) - r^2/(2 eps^2)   for r <= eps,
//   u(r) = -log r                            for eps <= r <= 1,
//   V = (2/eps^2) / u on r < eps, zero elsewhere; div(grad u) + V u = 0.
// Requires eps >= 4h so the spike is resolved.
FixturePair log_spike_fixture(double epsilon, double h);

// Closed-form radial diagnostics of the spike profile, evaluated by 1-D
// adaptive quadrature; these stay available for epsilon far below any feasible
// grid resolution.
double spike_l1_norm(double epsilon);                 // ||V_eps||_L1(disk)
double spike_abslog_convolution(double epsilon);      // int V_eps log(1/|y|) dy
double spike_log_kernel_at_center(double epsilon, double d);  // int_{|y|<d} V_eps log(d^2/|y|^2) dy

}  // namespace fklab
