#pragma once

#include <cstdint>
#include <vector>

#include "fklab/elliptic.hpp"

namespace fklab {

// Geometric time grid: t = 0, then 64 points per decade from h^2/4 up to
// t_max (last point clamped to t_max exactly).
std::vector<double> survival_time_grid(double h, double t_max, int per_decade = 64);

struct StepOpts {
    double theta = 0.5;     // theta-scheme weight; first interval runs two backward-Euler halves
    double cg_tol = 1e-10;
};

struct SurvivalCurve {
    Vec x{0, 0, 0};
    std::vector<double> t;  // increasing, starts at 0
    std::vector<double> p;  // starts at 1, nonincreasing, in [0,1]
};

// P_x(tau > t) for t on the geometric grid, via theta-scheme stepping of
// w_t = L w, w(0) = 1, absorbing boundary.
SurvivalCurve survival_curve(const DiscreteOperator& op, const Vec& x, double t_max,
                             const StepOpts& opts = {});

struct MedianExitTime {
    double value = 0.0;  // inverse-interpolated crossing of survival = 1 - eta
    double eta = 0.5;
    double t_lo = 0.0;   // bracketing grid interval
    double t_hi = 0.0;
};

// Crossing of the survival curve at level 1 - eta.  Throws when the curve
// never reaches the level (caller should extend t_max).
MedianExitTime median_exit_time(const SurvivalCurve& curve, double eta);

struct ExitTimeResult {
    SurvivalCurve curve;
    MedianExitTime T;
};

// Convenience driver: steps a survival curve until it crosses 1 - eta,
// extending the horizon geometrically when needed (initial guess from the
// distance to the boundary unless t_hint > 0 is given).
ExitTimeResult median_exit_time_at(const DiscreteOperator& op, const Vec& x, double eta,
                                   double t_hint = 0.0, const StepOpts& opts = {});

struct PathSample {
    double exit_time = 0.0;          // censored at the horizon when exited is false
    double potential_integral = 0.0; // int_0^{min(tau, horizon)} V(X_s) ds
    bool exited = false;
};

// Continuous-time Markov chain of the discrete generator: holding time
// Exp(-L_ii), jump probabilities w_ij / (-L_ii), absorption with probability
// absorb_i / (-L_ii).  Deterministic given (seed, path index); V may be null.
std::vector<PathSample> simulate_paths(const DiscreteOperator& op, const std::vector<double>* V,
                                       const Vec& x, double horizon, int n_paths,
                                       std::uint64_t seed);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int count = 0;
};

// Empirical P(tau > t) from path samples (t must not exceed the simulation horizon).
McEstimate mc_survival(const std::vector<PathSample>& paths, double t);
// Mean accumulated potential integral.
McEstimate mc_potential_integral(const std::vector<PathSample>& paths);
// E[1_{tau > horizon} exp(integral)] — killed exponential moment.
McEstimate mc_exp_moment_killed(const std::vector<PathSample>& paths);
// E[exp(integral up to min(tau, horizon))] — the cemetery convention keeps
// exited paths contributing exp of their frozen integral.
McEstimate mc_exp_moment_absorbed(const std::vector<PathSample>& paths);

// v(t, x) with v_t = L v + V v, v(0) = 1, absorbing boundary.  Aborts when the
// field exceeds 1e12 anywhere (potential supercritical for this horizon).
double feynman_kac_expectation(const DiscreteOperator& op, const ScalarField& V, const Vec& x,
                               double t, const StepOpts& opts = {});

struct ValueCurve {
    Vec x{0, 0, 0};
    std::vector<double> t;
    std::vector<double> v;
};

// The same expectation recorded along the whole time grid.
ValueCurve feynman_kac_curve(const DiscreteOperator& op, const ScalarField& V, const Vec& x,
                             double t_max, const StepOpts& opts = {});

// E_x[exp(int_0^{min(tau,t)} V ds)] including exited paths: the cemetery
// extension adds a unit source on the boundary-flux term, so the moment solves
// v_t = L v + V v + absorb, v(0) = 1.
double exp_moment_absorbed(const DiscreteOperator& op, const ScalarField& V, const Vec& x,
                           double t, const StepOpts& opts = {});

struct KhasminskiiResult {
    double alpha = 0.0;       // sup over cells of int_0^t (e^{sL} V)(x) ds
    Vec argmax_x{0, 0, 0};
    std::int64_t argmax_cell = -1;
    double boundary_deficit = 0.0;  // max survival deficit seen over supp V and the argmax
};

// Khasminskii accumulated-potential supremum on a free box (an operator whose
// mask should be padded well beyond the support of V; see padded_box).  Throws
// when mass leaking through the artificial boundary exceeds 1e-6.
KhasminskiiResult khasminskii_alpha(const DiscreteOperator& op_free, const ScalarField& V,
                                    double t, const StepOpts& opts = {});

// sup over cells of E_x[exp(int_0^t V(X_s) ds)] on the free box, stepping
// v_t = L v + V v from 1 and taking the max at time t.
double free_exp_moment_sup(const DiscreteOperator& op_free, const ScalarField& V, double t,
                           const StepOpts& opts = {});

// All-inside box mask enclosing the given mask with `pad` of margin on every
// side (rounded up to whole cells), same grid spacing and cell alignment.
std::shared_ptr<const DomainMask> padded_box(const DomainMask& inner, double pad);

// Same, but enclosing only the cell range [lo, hi] of the inner grid — used to
// pad the support of a potential rather than the whole domain.
std::shared_ptr<const DomainMask> padded_box(const DomainMask& inner, std::array<int, 3> lo,
                                             std::array<int, 3> hi, double pad);

// Copy a field on `inner` into a grid-aligned enclosing mask, zero elsewhere.
ScalarField embed_field(const ScalarField& inner, std::shared_ptr<const DomainMask> outer);

// Identity-tail extension of a coefficient field onto an enclosing mask.
CoefficientField extend_coefficients(const CoefficientField& inner,
                                     std::shared_ptr<const DomainMask> outer);

// Padding that keeps the 1e-6 boundary-mass guard comfortable: 8 sqrt(Lambda t),
// never below the 4 sqrt(Lambda t) minimum.
double khasminskii_padding(double Lambda, double t);

}  // namespace fklab
