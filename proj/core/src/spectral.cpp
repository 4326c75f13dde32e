#include "fklab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fklab/numerics.hpp"

namespace fklab {

namespace {

double norm2(const std::vector<double>& x) { return std::sqrt(det_dot(x, x)); }

// y = -(L + V) x
void apply_neg(const DiscreteOperator& op, const std::vector<double>* V,
               const std::vector<double>& x, std::vector<double>& y) {
    op.apply(x, y);
    const std::size_t m = x.size();
    if (V)
        for (std::size_t i = 0; i < m; ++i) y[i] = -y[i] - (*V)[i] * x[i];
    else
        for (std::size_t i = 0; i < m; ++i) y[i] = -y[i];
}

ScalarField sup_normalized(std::shared_ptr<const DomainMask> mask, std::vector<double> v) {
    double best = 0.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::abs(v[i]) > best) {
            best = std::abs(v[i]);
            best_i = i;
        }
    if (best > 0) {
        const double scale = 1.0 / v[best_i];  // also flips the sign branch
        for (double& x : v) x *= scale;
    }
    ScalarField f;
    f.mask = std::move(mask);
    f.v = std::move(v);
    return f;
}

}  // namespace

EigenPair principal_eigenpair(const DiscreteOperator& op, const EigenOpts& opts) {
    return eigen_with_potential(op, nullptr, opts);
}

EigenPair eigen_with_potential(const DiscreteOperator& op, const std::vector<double>* V,
                               const EigenOpts& opts) {
    const std::size_t m = op.size();
    if (m == 0) throw std::invalid_argument("eigen: empty operator");
    if (V && V->size() != m) throw std::invalid_argument("eigen: potential size mismatch");

    // Shift so the inverted matrix M + cI = -(L + V) + cI is positive definite.
    double c = 0.0;
    if (V)
        for (double x : *V) c = std::max(c, x);

    std::vector<double> x;
    if (opts.warm_start && opts.warm_start->size() == m)
        x = *opts.warm_start;
    else
        x.assign(m, 1.0);
    {
        const double nx = norm2(x);
        if (!(nx > 0)) throw std::invalid_argument("eigen: zero start vector");
        for (double& e : x) e /= nx;
    }

    std::vector<double> y, res, tmp(m);
    double mu = 0.0, rel_res = std::numeric_limits<double>::infinity();
    double prev_res = rel_res;
    int it = 0, stalled = 0;
    bool converged = false;
    for (; it < opts.max_iters; ++it) {
        y = solve_shifted(op, c, V, x, opts.cg_tol);
        const double yy = det_dot(y, y);
        if (!(yy > 0)) throw std::runtime_error("eigen: inverse iteration produced zero vector");
        mu = det_dot(x, y) / yy - c;

        // True residual of the unshifted problem: r = M y - mu y with M = -(L+V).
        apply_neg(op, V, y, res);
        for (std::size_t i = 0; i < m; ++i) tmp[i] = res[i] - mu * y[i];
        const double ny = std::sqrt(yy);
        rel_res = norm2(tmp) / ny;
        const double target = opts.rel_tol * std::abs(mu) + opts.abs_floor;
        if (rel_res <= target) {
            converged = true;
            break;
        }
        // CG round-off can floor the attainable residual slightly above a very
        // tight target; accept a stalled iteration within 10x of it.
        stalled = rel_res >= 0.995 * prev_res ? stalled + 1 : 0;
        prev_res = rel_res;
        if (stalled >= 25) {
            if (rel_res <= 10.0 * target) {
                converged = true;
                break;
            }
            throw std::runtime_error("eigen: residual stalled at " + std::to_string(rel_res) +
                                     " (target " + std::to_string(target) +
                                     "), last Rayleigh quotient " + std::to_string(mu));
        }

        const double inv = 1.0 / ny;
        for (std::size_t i = 0; i < m; ++i) x[i] = y[i] * inv;
    }
    if (!converged)
        throw std::runtime_error("eigen: no convergence after " + std::to_string(it) +
                                 " iterations; last Rayleigh quotient " + std::to_string(mu) +
                                 ", residual " + std::to_string(rel_res));

    EigenPair pair;
    pair.lambda = mu;
    pair.residual = rel_res;
    pair.iterations = it + 1;
    pair.u = sup_normalized(op.mask, std::move(y));
    return pair;
}

Calibration calibrate_potential(const DiscreteOperator& op, const ScalarField& V0,
                                double rel_tol, const EigenOpts& eig) {
    const std::size_t m = op.size();
    if (V0.v.size() != m) throw std::invalid_argument("calibrate: field size mismatch");
    double v_min_supp = std::numeric_limits<double>::infinity();
    double v_max = 0.0;
    for (double x : V0.v) {
        if (x < 0) throw std::invalid_argument("calibrate: template potential must be >= 0");
        if (x > 0) v_min_supp = std::min(v_min_supp, x);
        v_max = std::max(v_max, x);
    }
    if (!(v_max > 0)) throw std::invalid_argument("calibrate: template potential is zero");

    Calibration cal;
    EigenOpts opts = eig;
    EigenPair base = principal_eigenpair(op, opts);
    cal.lambda1 = base.lambda;
    cal.eigensolves = 1;
    const double mu_tol = rel_tol * cal.lambda1;
    opts.abs_floor = 0.1 * mu_tol;  // keep eigenvalue error below the bisection target

    std::vector<double> warm = base.u.v;
    std::vector<double> sV(m);
    auto mu_at = [&](double s) {
        for (std::size_t i = 0; i < m; ++i) sV[i] = s * V0.v[i];
        opts.warm_start = &warm;
        EigenPair p = eigen_with_potential(op, &sV, opts);
        ++cal.eigensolves;
        warm = p.u.v;
        cal.u = std::move(p.u);
        return p.lambda;
    };

    // mu(s) = smallest eigenvalue of -(L + s V0): decreasing in s, mu(0) = lambda1 > 0.
    double lo = 0.0;
    double hi = 2.0 * cal.lambda1 / v_min_supp;
    double mu_hi = mu_at(hi);
    int expansions = 0;
    while (mu_hi > 0) {
        if (++expansions > 60)
            throw std::runtime_error("calibrate: bracket expansion failed (potential too weak?)");
        lo = hi;
        hi *= 2.0;
        mu_hi = mu_at(hi);
    }
    if (std::abs(mu_hi) <= mu_tol) {
        cal.s = hi;
        cal.mu = mu_hi;
        return cal;
    }

    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double mu = mu_at(mid);
        if (std::abs(mu) <= mu_tol) {
            cal.s = mid;
            cal.mu = mu;
            return cal;
        }
        if (mu > 0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * hi)
            throw std::runtime_error("calibrate: bracket collapsed at s = " + std::to_string(mid) +
                                     " with mu = " + std::to_string(mu));
    }
    throw std::runtime_error("calibrate: bisection did not reach tolerance");
}

ArgmaxResult argmax_abs(const ScalarField& f) {
    ArgmaxResult r;
    double best = 0.0;
    std::int32_t best_u = -1;
    for (std::size_t u = 0; u < f.v.size(); ++u)
        if (std::abs(f.v[u]) > best) {
            best = std::abs(f.v[u]);
            best_u = static_cast<std::int32_t>(u);
        }
    if (best_u < 0) throw std::invalid_argument("argmax_abs: field is identically zero");
    r.cell = f.mask->cells[static_cast<std::size_t>(best_u)];
    r.x = f.mask->center_of(r.cell);
    r.sign = f.v[static_cast<std::size_t>(best_u)] >= 0 ? 1 : -1;
    r.value = best;
    return r;
}

FixturePair sine_fixture(int m, int n, double h) {
    if (m < 1 || n < 1) throw std::invalid_argument("sine_fixture: mode numbers must be >= 1");
    const int cells = static_cast<int>(std::lround(1.0 / h));
    if (cells < 4) throw std::invalid_argument("sine_fixture: grid too coarse");
    const double hs = 1.0 / cells;
    DomainSpec spec = DomainSpec::make_box(2, {1.0, 1.0, 1.0});
    spec.name = "unit-square";
    FixturePair fix;
    fix.mask = build_domain(spec, hs);
    const double pi = std::acos(-1.0);
    std::vector<double> u(fix.mask->cell_count());
    for (std::size_t k = 0; k < fix.mask->cells.size(); ++k) {
        const Vec x = fix.mask->center_of(fix.mask->cells[k]);
        u[k] = std::sin(n * pi * x[0]) * std::sin(m * pi * x[1]);
    }
    fix.u.mask = fix.mask;
    fix.u.v = std::move(u);
    fix.V = constant_field(fix.mask, (m * m + n * n) * pi * pi, "1/length^2");
    return fix;
}

namespace {

double spike_u(double r, double eps) {
    if (r <= eps) return 0.5 - std::log(eps) - r * r / (2.0 * eps * eps);
    if (r <= 1.0) return -std::log(r);
    return 0.0;
}

double spike_v(double r, double eps) {
    if (r >= eps) return 0.0;
    return (2.0 / (eps * eps)) / spike_u(r, eps);
}

}  // namespace

FixturePair log_spike_fixture(double epsilon, double h) {
    if (!(epsilon > 0) || epsilon >= 1.0)
        throw std::invalid_argument("log_spike_fixture: epsilon must be in (0, 1)");
    if (epsilon < 4.0 * h)
        throw std::invalid_argument("log_spike_fixture: epsilon under-resolved, need eps >= 4h");
    DomainSpec spec = DomainSpec::make_ball(2, 1.0);
    spec.name = "unit-disk";
    FixturePair fix;
    fix.mask = build_domain(spec, h);
    const std::size_t m = fix.mask->cell_count();
    fix.u.mask = fix.mask;
    fix.u.v.resize(m);
    fix.V.mask = fix.mask;
    fix.V.v.resize(m);
    fix.V.unit = "1/length^2";
    for (std::size_t k = 0; k < m; ++k) {
        const Vec x = fix.mask->center_of(fix.mask->cells[k]);
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
        fix.u.v[k] = spike_u(r, epsilon);
        fix.V.v[k] = spike_v(r, epsilon);
    }
    return fix;
}

double spike_l1_norm(double epsilon) {
    if (!(epsilon > 0) || epsilon >= 1.0)
        throw std::invalid_argument("spike_l1_norm: epsilon must be in (0, 1)");
    const double pi = std::acos(-1.0);
    auto f = [&](double r) { return spike_v(r, epsilon) * r; };
    return 2.0 * pi * adaptive_simpson(f, 0.0, epsilon, 1e-12);
}

double spike_abslog_convolution(double epsilon) {
    if (!(epsilon > 0) || epsilon >= 1.0)
        throw std::invalid_argument("spike_abslog_convolution: epsilon must be in (0, 1)");
    const double pi = std::acos(-1.0);
    // substitute r = t^2 to keep r log(1/r) smooth at the origin
    auto f = [&](double t) {
        const double r = t * t;
        if (r <= 0) return 0.0;
        return spike_v(r, epsilon) * (-std::log(r)) * r * 2.0 * t;
    };
    return 2.0 * pi * adaptive_simpson(f, 0.0, std::sqrt(epsilon), 1e-12);
}

double spike_log_kernel_at_center(double epsilon, double d) {
    if (!(epsilon > 0) || epsilon >= 1.0)
        throw std::invalid_argument("spike_log_kernel_at_center: epsilon must be in (0, 1)");
    if (!(d > 0)) throw std::invalid_argument("spike_log_kernel_at_center: d must be positive");
    const double pi = std::acos(-1.0);
    const double rmax = std::min(epsilon, d);
    auto f = [&](double t) {
        const double r = t * t;
        if (r <= 0) return 0.0;
        return spike_v(r, epsilon) * 2.0 * std::log(d / r) * r * 2.0 * t;
    };
    return 2.0 * pi * adaptive_simpson(f, 0.0, std::sqrt(rmax), 1e-12);
}

}  // namespace fklab
