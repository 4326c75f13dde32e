#pragma once

#include <string>
#include <vector>

#include "fklab/elliptic.hpp"
#include "fklab/geometry.hpp"
#include "fklab/spectral.hpp"
#include "fklab/stochastic.hpp"

namespace fklab {

// Declarative coefficient choices, mirrored by the experiment config.
struct CoefficientSpec {
    enum class Kind { identity, diagonal, checkerboard };
    Kind kind = Kind::identity;
    std::array<double, 3> entries{1.0, 1.0, 1.0};  // diagonal
    double a = 1.0, b = 2.0;                       // checkerboard phases
    int period_cells = 4;
};

CoefficientField make_coefficients(const CoefficientSpec& spec,
                                   std::shared_ptr<const DomainMask> mask);

// Declarative nonnegative potential templates.
struct PotentialSpec {
    enum class Kind { constant, half_indicator, ball_indicator, log_spike };
    Kind kind = Kind::constant;
    double value = 1.0;       // template amplitude
    BallSpec ball;            // ball_indicator support
    double epsilon = 0.05;    // log_spike parameter
};

// Sample the template on a mask (log_spike is rejected here; it enters the
// 2-D pipeline as a fixed fixture pair instead of a calibration template).
ScalarField make_potential_template(const PotentialSpec& spec,
                                    std::shared_ptr<const DomainMask> mask);

struct BestBall {
    BallSpec ball;
    double value = 0.0;
};

// Exhaustive scan over cell-center candidates within `radius` of the mask's
// grid: largest ||f||_{L^{p,1}} over the inside cells of B(center, radius).
BestBall best_ball_lorentz(const ScalarField& f, double radius, double p);
// Same scan maximizing the 2-D log-kernel convolution of f over B(center, radius).
BestBall best_ball_log_kernel(const ScalarField& f, double radius);

struct BaselineRecord {
    double lambda1 = 0.0;
    double volume = 0.0;
    double fk_classical_constant = 0.0;  // pi j_{n/2-1,1}^2 / Gamma(n/2+1)^{2/n}
    double fk_product = 0.0;             // lambda1 |Omega|^{2/n}  (>= classical constant)
    double lambda1_lower_bound = 0.0;    // classical constant * |Omega|^{-2/n}
    double vmax = 0.0;                   // ||V||_inf, Barta side
    double barta_gap = 0.0;              // ||V||_inf - lambda1
    double r_exponent = 0.0;
    double lr_norm = 0.0;                // ||V+||_{L^r(Omega)}
    double global_product = 0.0;         // |Omega|^{2/n - 1/r} ||V+||_r
    double global_rhs_scale = 0.0;       // |Omega|^{1/r - 2/n}: the decaying lower-bound scale
};

BaselineRecord global_baselines(const DiscreteOperator& op, const ScalarField& V, double lambda1,
                                double r_exponent);

struct ChainRecord {
    double T = 0.0;                  // horizon used (the median exit time)
    double survival_at_T = 0.0;      // P(tau > T) ~ 1 - eta
    double fk_value_at_T = 0.0;      // E[1_{tau>T} e^{int V+}] >= 1
    double fk_min_to_2T = 0.0;       // min of that expectation on the grid up to 2T
    double exp_moment_2v = 0.0;      // E[e^{int 2V+ to min(tau,T)}] >= 1/(1-eta)
    double khas_alpha_2v = 0.0;      // Khasminskii alpha of 2V+ on the free box >= eta
    double khas_deficit = 0.0;
    double khas_pad = 0.0;
};

struct Tolerances {
    double eig_rel_tol = 1e-8;
    double calib_rel_tol = 1e-6;
    double cg_tol = 1e-10;
    double theta = 0.5;
    double chain_slack = 0.02;
};

struct Certificate {
    int schema_version = 1;
    std::string key;        // "<kind>-<domain>-h<1/h rounded>"
    std::string kind;       // T1 | T2 | T3
    std::string domain_name;
    int dim = 0;
    double h = 0.0;
    std::string potential_source;  // "calibration" | "fixture" | "given"
    double calibration_scale = 0.0;
    double calibration_mu = 0.0;
    double lambda1 = 0.0;
    Vec x0{0, 0, 0};
    std::string sign_branch = "u";  // which of u/-u made the max positive
    double eta = 0.5;
    double median_exit_time = 0.0;
    double t_bracket_lo = 0.0;
    double t_bracket_hi = 0.0;
    std::string norm_kind;          // "lorentz(n/2,1)" | "log-kernel"
    BallSpec ball;                  // radius sqrt(T) (T1/T3) or sqrt(c T) (T2)
    double norm_value = 0.0;
    BallSpec ball_vol;              // volume-normalized variant |B| = T^{n/2}
    double norm_value_vol = 0.0;
    double radius_constant = 1.0;   // the c of radius sqrt(c T)
    double threshold = 0.0;
    // Theorem-3 dichotomy fields
    bool hypothesis_holds = false;
    double intersection_fraction = -1.0;
    double fraction_bound = -1.0;
    ChainRecord chain;
    BaselineRecord baselines;
    std::string lorentz_normalization = "distribution-function";
    std::string reduction_order = "pairwise-tree-4096";
    Tolerances tol;
    std::string verdict;  // PASS | FAIL | NOT-APPLICABLE
    std::vector<std::string> notes;
};

struct PipelineOpts {
    double eta = 0.5;
    // Empirical PASS thresholds, set at ~1/3 of the smallest value observed
    // across the stock domain families (calibrated values cluster near 3 for
    // the Lorentz norm and 13-15 for the log-kernel norm).
    double threshold_t1 = 1.0;
    double threshold_t2 = 6.283185307179586;  // 2 pi
    double t2_radius_constant = 4.0;  // the Gaussian width c2 of the exact kernel
    double t3_threshold = 0.0;    // hypothesis gate; 0 = use eta (constant 1)
    double r_exponent = 2.0;      // baseline L^r exponent, > n/2
    bool with_chain = true;
    Tolerances tol;
    StepOpts step;
};

// Full Theorem-1 style pipeline (n = 3): calibrate the template, find the
// ground-state argmax, measure the median exit time there, scan for the best
// ball of radius sqrt(T), and record the proof-chain quantities.
Certificate theorem1_certificate(const DomainSpec& domain, double h, const CoefficientSpec& A,
                                 const PotentialSpec& V0, const PipelineOpts& opts = {});

// The 2-D variant with the log-kernel norm and radius sqrt(c T); a log_spike
// potential spec switches the pair source from calibration to the fixture.
Certificate theorem2_certificate(const DomainSpec& domain, double h, const CoefficientSpec& A,
                                 const PotentialSpec& V0, const PipelineOpts& opts = {});

// Dichotomy check (n = 3): with V given (not calibrated), if the best-ball
// norm at radius sqrt(T_eta) stays below the threshold, the ball must overlap
// the domain in fraction >= (1-2 eta)/(1-eta).
Certificate theorem3_check(const DomainSpec& domain, double h, const CoefficientSpec& A,
                           const PotentialSpec& V, double eta, const PipelineOpts& opts = {});

// One summary row per certificate file; `malformed` set when parsing failed.
struct CertSummary {
    std::string file;
    std::string key, kind, domain, verdict;
    double h = 0.0, eta = 0.0, T = 0.0, norm_value = 0.0, threshold = 0.0;
    bool malformed = false;
};

}  // namespace fklab
