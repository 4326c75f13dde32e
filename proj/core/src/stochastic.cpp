#include "fklab/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "fklab/numerics.hpp"

namespace fklab {

std::vector<double> survival_time_grid(double h, double t_max, int per_decade) {
    if (!(h > 0) || !(t_max > 0)) throw std::invalid_argument("time grid: h, t_max must be > 0");
    if (per_decade < 1) throw std::invalid_argument("time grid: per_decade must be >= 1");
    std::vector<double> g{0.0};
    const double t0 = h * h / 4.0;
    if (t_max <= t0 * (1.0 + 1e-12)) {
        g.push_back(t_max);
        return g;
    }
    for (int k = 0;; ++k) {
        const double t = t0 * std::pow(10.0, static_cast<double>(k) / per_decade);
        if (t >= t_max * (1.0 - 1e-12)) break;
        g.push_back(t);
    }
    g.push_back(t_max);
    return g;
}

namespace {

std::int32_t locate_unknown(const DomainMask& mask, const Vec& x, const char* who) {
    const auto id = mask.locate(x);
    if (!id)
        throw std::invalid_argument(std::string(who) + ": start point off the grid");
    const std::int32_t u = mask.unknown[static_cast<std::size_t>(*id)];
    if (u < 0) throw std::invalid_argument(std::string(who) + ": start point not inside the domain");
    return u;
}

// Step `state` through the grid (grid[0] == 0), invoking on_point(k, t, state)
// at every grid point including t = 0.  The first interval is split into two
// backward-Euler halves to damp the theta-scheme's high-frequency transients;
// subsequent intervals take a single theta step each.
void run_chain(const DiscreteOperator& op, const std::vector<double>* V,
               const std::vector<double>* source, std::vector<double>& state,
               const std::vector<double>& grid, const StepOpts& opts,
               const std::function<bool(std::size_t, double, const std::vector<double>&)>& on_point) {
    if (grid.empty() || grid[0] != 0.0)
        throw std::invalid_argument("time chain: grid must start at 0");
    if (!on_point(0, 0.0, state)) return;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double dt = grid[k] - grid[k - 1];
        if (!(dt > 0)) throw std::invalid_argument("time chain: grid not increasing");
        if (k == 1) {
            state = step_parabolic(op, V, state, dt / 2.0, 1.0, source, opts.cg_tol);
            state = step_parabolic(op, V, state, dt / 2.0, 1.0, source, opts.cg_tol);
        } else {
            state = step_parabolic(op, V, state, dt, opts.theta, source, opts.cg_tol);
        }
        double mx = 0.0;
        for (double v : state) mx = std::max(mx, std::abs(v));
        if (mx > 1e12)
            throw std::runtime_error("time chain: field exceeded 1e12 (potential supercritical "
                                     "for this horizon) at t = " + std::to_string(grid[k]));
        if (!on_point(k, grid[k], state)) return;
    }
}

}  // namespace

SurvivalCurve survival_curve(const DiscreteOperator& op, const Vec& x, double t_max,
                             const StepOpts& opts) {
    const std::int32_t ux = locate_unknown(*op.mask, x, "survival_curve");
    SurvivalCurve curve;
    curve.x = x;
    const auto grid = survival_time_grid(op.h, t_max);
    std::vector<double> state(op.size(), 1.0);
    run_chain(op, nullptr, nullptr, state, grid, opts,
              [&](std::size_t, double t, const std::vector<double>& s) {
                  curve.t.push_back(t);
                  double p = s[static_cast<std::size_t>(ux)];
                  p = std::min(1.0, std::max(0.0, p));
                  if (!curve.p.empty()) p = std::min(p, curve.p.back());
                  curve.p.push_back(p);
                  return true;
              });
    return curve;
}

MedianExitTime median_exit_time(const SurvivalCurve& curve, double eta) {
    if (!(eta > 0) || !(eta < 1)) throw std::invalid_argument("median_exit_time: eta in (0,1)");
    const double level = 1.0 - eta;
    for (std::size_t k = 0; k < curve.p.size(); ++k) {
        if (curve.p[k] <= level) {
            if (k == 0)
                throw std::runtime_error("median_exit_time: curve starts at or below the level");
            MedianExitTime m;
            m.eta = eta;
            m.t_lo = curve.t[k - 1];
            m.t_hi = curve.t[k];
            const double p0 = curve.p[k - 1], p1 = curve.p[k];
            const double frac = p0 > p1 ? (p0 - level) / (p0 - p1) : 1.0;
            m.value = m.t_lo + frac * (m.t_hi - m.t_lo);
            return m;
        }
    }
    throw std::runtime_error("median_exit_time: survival never reached " + std::to_string(level) +
                             " within t_max = " +
                             std::to_string(curve.t.empty() ? 0.0 : curve.t.back()) +
                             "; extend the horizon");
}

ExitTimeResult median_exit_time_at(const DiscreteOperator& op, const Vec& x, double eta,
                                   double t_hint, const StepOpts& opts) {
    if (!(eta > 0) || !(eta < 1)) throw std::invalid_argument("median_exit_time_at: eta in (0,1)");
    double t_max;
    if (t_hint > 0) {
        t_max = 4.0 * t_hint;
    } else {
        const double d = distance_to_boundary(*op.mask, x);
        t_max = std::max(32.0 * op.h * op.h, 2.0 * d * d);
    }
    for (int attempt = 0; attempt < 9; ++attempt) {
        ExitTimeResult r;
        r.curve = survival_curve(op, x, t_max, opts);
        try {
            r.T = median_exit_time(r.curve, eta);
            return r;
        } catch (const std::runtime_error&) {
            t_max *= 4.0;
        }
    }
    throw std::runtime_error("median_exit_time_at: no crossing after repeated horizon extensions");
}

namespace {

// SplitMix64: counter-based, one independent stream per path.
struct CounterRng {
    std::uint64_t state;
    explicit CounterRng(std::uint64_t s) : state(s) {}
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    // uniform in [0, 1)
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::vector<PathSample> simulate_paths(const DiscreteOperator& op, const std::vector<double>* V,
                                       const Vec& x, double horizon, int n_paths,
                                       std::uint64_t seed) {
    if (n_paths < 1) throw std::invalid_argument("simulate_paths: need n_paths >= 1");
    if (!(horizon > 0)) throw std::invalid_argument("simulate_paths: horizon must be > 0");
    if (V && V->size() != op.size())
        throw std::invalid_argument("simulate_paths: potential size mismatch");
    const std::int32_t u0 = locate_unknown(*op.mask, x, "simulate_paths");
    std::vector<PathSample> out(static_cast<std::size_t>(n_paths));
    (void)thread_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long i = 0; i < n_paths; ++i) {
        CounterRng rng(mix64(seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(i + 1))));
        PathSample s;
        std::int32_t u = u0;
        double t = 0.0;
        while (true) {
            const std::size_t uc = static_cast<std::size_t>(u);
            const double rate = -op.diagv[uc];
            const double tau = -std::log(1.0 - rng.unit()) / rate;
            const double vu = V ? (*V)[uc] : 0.0;
            if (t + tau >= horizon) {
                s.potential_integral += vu * (horizon - t);
                s.exit_time = horizon;
                s.exited = false;
                break;
            }
            t += tau;
            s.potential_integral += vu * tau;
            const double target = rng.unit() * rate;
            double acc = 0.0;
            std::int32_t moved = -1;
            for (int dir = 0; dir < 2 * op.n; ++dir) {
                const std::int32_t v = op.nbr[uc][dir];
                if (v < 0) continue;
                acc += op.w[uc][dir];
                if (target < acc) {
                    moved = v;
                    break;
                }
            }
            if (moved < 0) {
                if (op.absorb[uc] > 0.0) {
                    s.exit_time = t;
                    s.exited = true;
                    break;
                }
                // interior cell: rounding pushed the draw past the last face
                for (int dir = 2 * op.n - 1; dir >= 0; --dir)
                    if (op.nbr[uc][dir] >= 0) {
                        moved = op.nbr[uc][dir];
                        break;
                    }
            }
            u = moved;
        }
        out[static_cast<std::size_t>(i)] = s;
    }
    return out;
}

namespace {

McEstimate reduce_mean(const std::vector<double>& w) {
    McEstimate e;
    const std::size_t n = w.size();
    e.count = static_cast<int>(n);
    if (n == 0) return e;
    const double sum = det_sum(w);
    e.mean = sum / static_cast<double>(n);
    if (n > 1) {
        std::vector<double> sq(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = w[i] - e.mean;
            sq[i] = d * d;
        }
        const double var = det_sum(sq) / static_cast<double>(n - 1);
        e.std_error = std::sqrt(var / static_cast<double>(n));
    }
    return e;
}

}  // namespace

McEstimate mc_survival(const std::vector<PathSample>& paths, double t) {
    std::vector<double> w(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i)
        w[i] = (!paths[i].exited || paths[i].exit_time > t) ? 1.0 : 0.0;
    return reduce_mean(w);
}

McEstimate mc_potential_integral(const std::vector<PathSample>& paths) {
    std::vector<double> w(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) w[i] = paths[i].potential_integral;
    return reduce_mean(w);
}

McEstimate mc_exp_moment_killed(const std::vector<PathSample>& paths) {
    std::vector<double> w(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i)
        w[i] = paths[i].exited ? 0.0 : std::exp(std::min(paths[i].potential_integral, 700.0));
    return reduce_mean(w);
}

McEstimate mc_exp_moment_absorbed(const std::vector<PathSample>& paths) {
    std::vector<double> w(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i)
        w[i] = std::exp(std::min(paths[i].potential_integral, 700.0));
    return reduce_mean(w);
}

namespace {

double chain_value_at(const DiscreteOperator& op, const std::vector<double>* V,
                      const std::vector<double>* source, const Vec& x, double t,
                      const StepOpts& opts, const char* who) {
    const std::int32_t ux = locate_unknown(*op.mask, x, who);
    if (!(t > 0)) throw std::invalid_argument(std::string(who) + ": t must be > 0");
    const auto grid = survival_time_grid(op.h, t);
    std::vector<double> state(op.size(), 1.0);
    double value = 1.0;
    run_chain(op, V, source, state, grid, opts,
              [&](std::size_t, double, const std::vector<double>& s) {
                  value = s[static_cast<std::size_t>(ux)];
                  return true;
              });
    return value;
}

}  // namespace

double feynman_kac_expectation(const DiscreteOperator& op, const ScalarField& V, const Vec& x,
                               double t, const StepOpts& opts) {
    if (V.v.size() != op.size()) throw std::invalid_argument("feynman_kac: field size mismatch");
    return chain_value_at(op, &V.v, nullptr, x, t, opts, "feynman_kac");
}

ValueCurve feynman_kac_curve(const DiscreteOperator& op, const ScalarField& V, const Vec& x,
                             double t_max, const StepOpts& opts) {
    if (V.v.size() != op.size()) throw std::invalid_argument("feynman_kac: field size mismatch");
    const std::int32_t ux = locate_unknown(*op.mask, x, "feynman_kac_curve");
    ValueCurve c;
    c.x = x;
    const auto grid = survival_time_grid(op.h, t_max);
    std::vector<double> state(op.size(), 1.0);
    run_chain(op, &V.v, nullptr, state, grid, opts,
              [&](std::size_t, double t, const std::vector<double>& s) {
                  c.t.push_back(t);
                  c.v.push_back(s[static_cast<std::size_t>(ux)]);
                  return true;
              });
    return c;
}

double exp_moment_absorbed(const DiscreteOperator& op, const ScalarField& V, const Vec& x,
                           double t, const StepOpts& opts) {
    if (V.v.size() != op.size())
        throw std::invalid_argument("exp_moment_absorbed: field size mismatch");
    return chain_value_at(op, &V.v, &op.absorb, x, t, opts, "exp_moment_absorbed");
}

KhasminskiiResult khasminskii_alpha(const DiscreteOperator& op_free, const ScalarField& V,
                                    double t, const StepOpts& opts) {
    const std::size_t m = op_free.size();
    if (V.v.size() != m) throw std::invalid_argument("khasminskii: field size mismatch");
    if (!(t > 0)) throw std::invalid_argument("khasminskii: t must be > 0");
    for (double v : V.v)
        if (v < 0) throw std::invalid_argument("khasminskii: potential must be >= 0");

    const auto grid = survival_time_grid(op_free.h, t);
    std::vector<double> alpha(m, 0.0), prev;

    // g(s) = e^{sL} V, accumulated by the trapezoid rule on the geometric grid.
    {
        std::vector<double> g = V.v;
        double t_prev = 0.0;
        run_chain(op_free, nullptr, nullptr, g, grid, opts,
                  [&](std::size_t k, double tk, const std::vector<double>& s) {
                      if (k > 0) {
                          const double half = 0.5 * (tk - t_prev);
                          for (std::size_t i = 0; i < m; ++i)
                              alpha[i] += half * (prev[i] + s[i]);
                      }
                      prev = s;
                      t_prev = tk;
                      return true;
                  });
    }

    KhasminskiiResult r;
    std::size_t best = 0;
    for (std::size_t i = 0; i < m; ++i)
        if (alpha[i] > alpha[best]) best = i;
    r.alpha = alpha[best];
    r.argmax_cell = op_free.mask->cells[best];
    r.argmax_x = op_free.mask->center_of(r.argmax_cell);

    // Guard: survival of the free box must be ~1 on supp V and at the argmax,
    // else the box truncation has bitten into the supremum.
    {
        std::vector<double> w(m, 1.0);
        run_chain(op_free, nullptr, nullptr, w, grid, opts,
                  [&](std::size_t, double, const std::vector<double>&) { return true; });
        double deficit = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (V.v[i] > 0 || i == best) deficit = std::max(deficit, 1.0 - w[i]);
        r.boundary_deficit = deficit;
        if (deficit > 1e-6)
            throw std::runtime_error(
                "khasminskii: boundary mass " + std::to_string(deficit) +
                " exceeds 1e-6; enlarge the padded box");
    }
    return r;
}

double free_exp_moment_sup(const DiscreteOperator& op_free, const ScalarField& V, double t,
                           const StepOpts& opts) {
    const std::size_t m = op_free.size();
    if (V.v.size() != m) throw std::invalid_argument("free_exp_moment_sup: field size mismatch");
    const auto grid = survival_time_grid(op_free.h, t);
    std::vector<double> state(m, 1.0);
    run_chain(op_free, &V.v, nullptr, state, grid, opts,
              [&](std::size_t, double, const std::vector<double>&) { return true; });
    double best = 0.0;
    for (double v : state) best = std::max(best, v);
    return best;
}

std::shared_ptr<const DomainMask> padded_box(const DomainMask& inner, double pad) {
    return padded_box(inner, {0, 0, 0},
                      {inner.dims[0] - 1, inner.dims[1] - 1, inner.dims[2] - 1}, pad);
}

std::shared_ptr<const DomainMask> padded_box(const DomainMask& inner, std::array<int, 3> lo,
                                             std::array<int, 3> hi, double pad) {
    if (!(pad >= 0)) throw std::invalid_argument("padded_box: pad must be >= 0");
    const int pc = static_cast<int>(std::ceil(pad / inner.h - 1e-9));
    auto out = std::make_shared<DomainMask>();
    out->n = inner.n;
    out->h = inner.h;
    for (int d = 0; d < 3; ++d) {
        const bool active = d < inner.n;
        if (hi[d] < lo[d]) throw std::invalid_argument("padded_box: empty cell range");
        out->dims[d] = active ? hi[d] - lo[d] + 1 + 2 * pc : 1;
        out->origin[d] = inner.origin[d] + (active ? (lo[d] - pc) * inner.h : 0.0);
    }
    const std::int64_t total = static_cast<std::int64_t>(out->dims[0]) * out->dims[1] * out->dims[2];
    out->inside.assign(static_cast<std::size_t>(total), 1);
    out->cells.resize(static_cast<std::size_t>(total));
    out->unknown.resize(static_cast<std::size_t>(total));
    for (std::int64_t i = 0; i < total; ++i) {
        out->cells[static_cast<std::size_t>(i)] = i;
        out->unknown[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
    }
    return out;
}

ScalarField embed_field(const ScalarField& inner, std::shared_ptr<const DomainMask> outer) {
    const DomainMask& in = *inner.mask;
    const DomainMask& out = *outer;
    if (in.n != out.n || in.h != out.h)
        throw std::invalid_argument("embed_field: grids incompatible");
    std::array<int, 3> off{0, 0, 0};
    for (int d = 0; d < 3; ++d) {
        const double shift = (in.origin[d] - out.origin[d]) / in.h;
        off[d] = static_cast<int>(std::lround(shift));
        if (std::abs(shift - off[d]) > 1e-6)
            throw std::invalid_argument("embed_field: grids not cell-aligned");
    }
    ScalarField f;
    f.mask = std::move(outer);
    f.unit = inner.unit;
    f.v.assign(out.cell_count(), 0.0);
    for (std::size_t u = 0; u < in.cells.size(); ++u) {
        if (inner.v[u] == 0.0) continue;  // implicit zeros may fall off the outer grid
        const auto c = in.coords(in.cells[u]);
        const int i = c[0] + off[0], j = c[1] + off[1], k = c[2] + off[2];
        if (!out.in_grid(i, j, k))
            throw std::invalid_argument("embed_field: nonzero cell outside the outer mask");
        const std::int32_t w = out.unknown[static_cast<std::size_t>(out.index(i, j, k))];
        if (w < 0) throw std::invalid_argument("embed_field: target cell not inside outer mask");
        f.v[static_cast<std::size_t>(w)] = inner.v[u];
    }
    return f;
}

CoefficientField extend_coefficients(const CoefficientField& inner,
                                     std::shared_ptr<const DomainMask> outer) {
    const DomainMask& in = *inner.mask;
    const DomainMask& out = *outer;
    if (in.n != out.n || in.h != out.h)
        throw std::invalid_argument("extend_coefficients: grids incompatible");
    std::array<int, 3> off{0, 0, 0};
    for (int d = 0; d < 3; ++d) {
        const double shift = (in.origin[d] - out.origin[d]) / in.h;
        off[d] = static_cast<int>(std::lround(shift));
        if (std::abs(shift - off[d]) > 1e-6)
            throw std::invalid_argument("extend_coefficients: grids not cell-aligned");
    }
    CoefficientField A;
    A.mask = std::move(outer);
    A.diag.assign(out.cell_count(), {1.0, 1.0, 1.0});
    A.lambda = std::min(inner.lambda, 1.0);
    A.Lambda = std::max(inner.Lambda, 1.0);
    for (std::size_t u = 0; u < in.cells.size(); ++u) {
        const auto c = in.coords(in.cells[u]);
        const int i = c[0] + off[0], j = c[1] + off[1], k = c[2] + off[2];
        if (!out.in_grid(i, j, k)) continue;  // outer box may cover only part of the inner mask
        const std::int32_t w = out.unknown[static_cast<std::size_t>(out.index(i, j, k))];
        if (w < 0) continue;
        A.diag[static_cast<std::size_t>(w)] = inner.diag[u];
    }
    return A;
}

double khasminskii_padding(double Lambda, double t) {
    const double s = std::sqrt(std::max(Lambda, 0.0) * std::max(t, 0.0));
    return std::max(8.0 * s, 4.0 * s);
}

}  // namespace fklab
