#include "fklab/verify.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fklab/kernel_bounds.hpp"
#include "fklab/lorentz.hpp"
#include "fklab/numerics.hpp"

namespace fklab {

CoefficientField make_coefficients(const CoefficientSpec& spec,
                                   std::shared_ptr<const DomainMask> mask) {
    switch (spec.kind) {
        case CoefficientSpec::Kind::identity:
            return identity_coefficients(std::move(mask));
        case CoefficientSpec::Kind::diagonal:
            return diagonal_coefficients(std::move(mask), spec.entries);
        case CoefficientSpec::Kind::checkerboard:
            return checkerboard_coefficients(std::move(mask), spec.a, spec.b, spec.period_cells);
    }
    throw std::invalid_argument("make_coefficients: unknown kind");
}

ScalarField make_potential_template(const PotentialSpec& spec,
                                    std::shared_ptr<const DomainMask> mask) {
    if (!(spec.value >= 0))
        throw std::invalid_argument("potential template: amplitude must be >= 0");
    const DomainMask& m = *mask;
    ScalarField f;
    f.unit = "1/length^2";
    switch (spec.kind) {
        case PotentialSpec::Kind::constant:
            f = constant_field(std::move(mask), spec.value, "1/length^2");
            return f;
        case PotentialSpec::Kind::half_indicator: {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (std::size_t u = 0; u < m.cells.size(); ++u) {
                const double x = m.center_of(m.cells[u])[0];
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            const double mid = 0.5 * (lo + hi);
            f.mask = std::move(mask);
            f.v.resize(m.cell_count());
            for (std::size_t u = 0; u < m.cells.size(); ++u)
                f.v[u] = m.center_of(m.cells[u])[0] >= mid ? spec.value : 0.0;
            return f;
        }
        case PotentialSpec::Kind::ball_indicator: {
            const double r2 = spec.ball.radius * spec.ball.radius;
            f.mask = std::move(mask);
            f.v.resize(m.cell_count());
            for (std::size_t u = 0; u < m.cells.size(); ++u)
                f.v[u] = dist2(m.center_of(m.cells[u]), spec.ball.center) <= r2 ? spec.value : 0.0;
            return f;
        }
        case PotentialSpec::Kind::log_spike:
            throw std::invalid_argument(
                "potential template: the log-spike pair is a fixture, not a calibration template");
    }
    throw std::invalid_argument("potential template: unknown kind");
}

namespace {

template <typename F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::string slug(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else if (!out.empty() && out.back() != '-')
            out.push_back('-');
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out.empty() ? "domain" : out;
}

std::string make_key(const std::string& kind, const std::string& name, double h) {
    std::ostringstream os;
    os << kind << "-" << slug(name) << "-h" << static_cast<long long>(std::lround(1.0 / h));
    return os.str();
}

double curve_value_at(const std::vector<double>& t, const std::vector<double>& v, double tq) {
    if (t.empty()) throw std::invalid_argument("curve interpolation: empty curve");
    if (tq <= t.front()) return v.front();
    for (std::size_t k = 1; k < t.size(); ++k)
        if (t[k] >= tq) {
            const double w = (tq - t[k - 1]) / (t[k] - t[k - 1]);
            return v[k - 1] + w * (v[k] - v[k - 1]);
        }
    return v.back();
}

struct SupportBox {
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{0, 0, 0};
};

SupportBox support_box(const ScalarField& f) {
    const DomainMask& m = *f.mask;
    SupportBox b;
    bool any = false;
    for (std::size_t u = 0; u < f.v.size(); ++u) {
        if (f.v[u] == 0.0) continue;
        const auto c = m.coords(m.cells[u]);
        if (!any) {
            b.lo = c;
            b.hi = c;
            any = true;
        } else {
            for (int d = 0; d < 3; ++d) {
                b.lo[d] = std::min(b.lo[d], c[d]);
                b.hi[d] = std::max(b.hi[d], c[d]);
            }
        }
    }
    if (!any) throw std::invalid_argument("support_box: field is identically zero");
    return b;
}

ScalarField scaled_field(const ScalarField& f, double c) {
    ScalarField g = f;
    for (double& x : g.v) x *= c;
    return g;
}

// Shared chain computation: fundamental expectation, absorbed double-potential
// moment, and the free-box Khasminskii alpha of 2 V+.
ChainRecord proof_chain(const DiscreteOperator& op, const CoefficientField& A,
                        const ScalarField& V, const Vec& x0, const SurvivalCurve& surv,
                        double T, const PipelineOpts& opts) {
    ChainRecord chain;
    chain.T = T;
    chain.survival_at_T = curve_value_at(surv.t, surv.p, T);
    chain.fk_value_at_T = feynman_kac_expectation(op, V, x0, T, opts.step);
    const ValueCurve fk = feynman_kac_curve(op, V, x0, 2.0 * T, opts.step);
    chain.fk_min_to_2T = *std::min_element(fk.v.begin(), fk.v.end());

    const ScalarField V2 = scaled_field(V, 2.0);
    chain.exp_moment_2v = exp_moment_absorbed(op, V2, x0, T, opts.step);

    const SupportBox sb = support_box(V2);
    const double pad = khasminskii_padding(A.Lambda, T);
    chain.khas_pad = pad;
    auto box = padded_box(*op.mask, sb.lo, sb.hi, pad);
    const CoefficientField A_box = extend_coefficients(A, box);
    const DiscreteOperator op_box = assemble_operator(A_box);
    const ScalarField V2_box = embed_field(V2, box);
    const KhasminskiiResult kr = khasminskii_alpha(op_box, V2_box, T, opts.step);
    chain.khas_alpha_2v = kr.alpha;
    chain.khas_deficit = kr.boundary_deficit;
    return chain;
}

BestBall scan_centers(const DomainMask& mask, double radius,
                      const std::function<double(const Vec&)>& value_at) {
    const double h = mask.h;
    const int pr = static_cast<int>(std::ceil(radius / h));
    const int klo = mask.n == 3 ? -pr : 0;
    const int khi = mask.n == 3 ? mask.dims[2] + pr : 1;
    std::vector<std::array<int, 3>> cands;
    for (int k = klo; k < khi; ++k)
        for (int j = -pr; j < mask.dims[1] + pr; ++j)
            for (int i = -pr; i < mask.dims[0] + pr; ++i) cands.push_back({i, j, k});
    std::vector<double> vals(cands.size(), 0.0);
    const long long nc = static_cast<long long>(cands.size());
    (void)thread_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long ci = 0; ci < nc; ++ci) {
        const auto& c = cands[static_cast<std::size_t>(ci)];
        const Vec x{mask.origin[0] + c[0] * h, mask.origin[1] + c[1] * h,
                    mask.n == 3 ? mask.origin[2] + c[2] * h : 0.0};
        vals[static_cast<std::size_t>(ci)] = value_at(x);
    }
    BestBall best;
    best.ball.radius = radius;
    std::size_t bi = 0;
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (vals[i] > vals[bi]) bi = i;
    best.value = vals.empty() ? 0.0 : vals[bi];
    if (!vals.empty()) {
        const auto& c = cands[bi];
        best.ball.center = {mask.origin[0] + c[0] * h, mask.origin[1] + c[1] * h,
                            mask.n == 3 ? mask.origin[2] + c[2] * h : 0.0};
    }
    return best;
}

}  // namespace

BestBall best_ball_lorentz(const ScalarField& f, double radius, double p) {
    const DomainMask& mask = *f.mask;
    if (!(radius > 0)) throw std::invalid_argument("best_ball_lorentz: radius must be > 0");
    // Gather the nonzero cells once; the scan intersects them with each ball.
    std::vector<Vec> pos;
    std::vector<double> val;
    for (std::size_t u = 0; u < f.v.size(); ++u)
        if (f.v[u] != 0.0) {
            pos.push_back(mask.center_of(mask.cells[u]));
            val.push_back(std::abs(f.v[u]));
        }
    const double atom = mask.cell_volume();
    const double r2 = radius * radius;
    return scan_centers(mask, radius, [&](const Vec& x) {
        std::vector<double> inside;
        for (std::size_t q = 0; q < pos.size(); ++q)
            if (dist2(pos[q], x) <= r2) inside.push_back(val[q]);
        if (inside.empty()) return 0.0;
        return lorentz_norm(std::move(inside), atom, p, 1.0);
    });
}

BestBall best_ball_log_kernel(const ScalarField& f, double radius) {
    const DomainMask& mask = *f.mask;
    if (mask.n != 2) throw std::invalid_argument("best_ball_log_kernel: needs dimension 2");
    const double h = mask.h;
    if (!(radius >= 2.0 * h))
        throw std::invalid_argument("best_ball_log_kernel: need radius >= 2h");
    // Candidates are cell-aligned, so the kernel only sees integer offsets;
    // precompute it up to the ball's reach to keep the scan read-only.
    const double d2 = radius * radius;
    const std::size_t mmax = static_cast<std::size_t>(std::floor(d2 / (h * h))) + 1;
    std::vector<double> kern(mmax + 1, 0.0);
    {
        const double a = 0.5 * h;
        const double pi = std::acos(-1.0);
        const double log_abs = 2.0 * a * a * (std::log(2.0 * a * a) - 3.0 + 0.5 * pi);
        kern[0] = 2.0 * h * h * std::log(radius) - 2.0 * log_abs;
        for (std::size_t m = 1; m <= mmax; ++m) {
            const double rr = static_cast<double>(m) * h * h;
            kern[m] = rr <= d2 ? std::log(d2 / rr) * h * h : 0.0;
        }
    }
    std::vector<std::array<int, 3>> pos;
    std::vector<double> val;
    for (std::size_t u = 0; u < f.v.size(); ++u)
        if (f.v[u] != 0.0) {
            pos.push_back(mask.coords(mask.cells[u]));
            val.push_back(f.v[u]);
        }
    return scan_centers(mask, radius, [&](const Vec& x) {
        // x is cell-aligned by construction of the scan
        const long long ci = static_cast<long long>(std::lround((x[0] - mask.origin[0]) / h));
        const long long cj = static_cast<long long>(std::lround((x[1] - mask.origin[1]) / h));
        double acc = 0.0;
        for (std::size_t q = 0; q < pos.size(); ++q) {
            const long long di = ci - pos[q][0];
            const long long dj = cj - pos[q][1];
            const std::size_t m = static_cast<std::size_t>(di * di + dj * dj);
            if (m <= mmax) acc += val[q] * kern[m];
        }
        return acc;
    });
}

BaselineRecord global_baselines(const DiscreteOperator& op, const ScalarField& V, double lambda1,
                                double r_exponent) {
    const int n = op.n;
    if (!(r_exponent > 0.5 * n))
        throw std::invalid_argument("global_baselines: need r > n/2");
    BaselineRecord b;
    b.lambda1 = lambda1;
    b.volume = op.mask->volume();
    const double pi = std::acos(-1.0);
    const double j_first = n == 2 ? 2.404825557695773 : pi;  // j_{0,1}, j_{1/2,1}
    if (n != 2 && n != 3)
        throw std::invalid_argument("global_baselines: dimension must be 2 or 3");
    b.fk_classical_constant =
        pi * j_first * j_first / std::pow(std::tgamma(0.5 * n + 1.0), 2.0 / n);
    b.fk_product = lambda1 * std::pow(b.volume, 2.0 / n);
    b.lambda1_lower_bound = b.fk_classical_constant * std::pow(b.volume, -2.0 / n);
    double vmax = 0.0;
    for (double x : V.v) vmax = std::max(vmax, std::abs(x));
    b.vmax = vmax;
    b.barta_gap = vmax - lambda1;
    b.r_exponent = r_exponent;
    std::vector<double> terms(V.v.size());
    const double atom = op.mask->cell_volume();
    for (std::size_t i = 0; i < V.v.size(); ++i)
        terms[i] = std::pow(std::max(V.v[i], 0.0), r_exponent) * atom;
    b.lr_norm = std::pow(det_sum(terms), 1.0 / r_exponent);
    b.global_product = std::pow(b.volume, 2.0 / n - 1.0 / r_exponent) * b.lr_norm;
    b.global_rhs_scale = std::pow(b.volume, 1.0 / r_exponent - 2.0 / n);
    return b;
}

namespace {

Certificate theorem12_common(const std::string& kind, const DomainSpec& domain, double h,
                             const CoefficientSpec& Aspec, const PotentialSpec& V0spec,
                             const PipelineOpts& opts) {
    Certificate cert;
    cert.kind = kind;
    cert.domain_name = domain.name;
    cert.dim = domain.dim;
    cert.h = h;
    cert.eta = opts.eta;
    cert.tol = opts.tol;
    cert.key = make_key(kind, domain.name, h);
    if (!(opts.eta > 0) || !(opts.eta < 1))
        throw StageError("config", "eta must be in (0, 1)");

    auto mask = stage("geometry", [&] { return build_domain(domain, h); });

    ScalarField V;
    ScalarField u_ground;
    const bool fixture = V0spec.kind == PotentialSpec::Kind::log_spike;
    if (fixture) {
        if (kind != "T2") throw StageError("calibration", "log-spike fixture is 2-D only");
        if (Aspec.kind != CoefficientSpec::Kind::identity)
            throw StageError("calibration", "log-spike fixture requires identity coefficients");
        if (domain.kind != DomainSpec::Kind::ball || domain.dim != 2 ||
            domain.radius != 1.0)
            throw StageError("calibration", "log-spike fixture lives on the unit disk");
        FixturePair fix = stage("calibration", [&] {
            return log_spike_fixture(V0spec.epsilon, h);
        });
        mask = fix.mask;  // same unit disk, but keep the pair's own grid object
        V = std::move(fix.V);
        u_ground = std::move(fix.u);
    }

    const CoefficientField A = stage("coefficients", [&] {
        auto a = make_coefficients(Aspec, mask);
        validate_ellipticity(a);
        return a;
    });
    const DiscreteOperator op = assemble_operator(A);

    EigenOpts eig;
    eig.rel_tol = opts.tol.eig_rel_tol;
    eig.cg_tol = std::min(opts.tol.cg_tol, 1e-12);

    if (fixture) {
        cert.potential_source = "fixture";
        cert.calibration_scale = 1.0;
        cert.calibration_mu = 0.0;
        cert.notes.push_back("pair from the radial spike profile; eigenvalue not re-certified");
        const EigenPair base = stage("calibration", [&] { return principal_eigenpair(op, eig); });
        cert.lambda1 = base.lambda;
    } else {
        const ScalarField V0 = stage("coefficients", [&] {
            return make_potential_template(V0spec, mask);
        });
        const Calibration cal = stage("calibration", [&] {
            return calibrate_potential(op, V0, opts.tol.calib_rel_tol, eig);
        });
        V = scaled_field(V0, cal.s);
        V.unit = "1/length^2";
        u_ground = cal.u;
        cert.potential_source = "calibration";
        cert.calibration_scale = cal.s;
        cert.calibration_mu = cal.mu;
        cert.lambda1 = cal.lambda1;
    }

    const ArgmaxResult am = stage("argmax", [&] { return argmax_abs(u_ground); });
    cert.x0 = am.x;
    cert.sign_branch = am.sign >= 0 ? "u" : "-u";

    const ExitTimeResult exit = stage("exit-time", [&] {
        return median_exit_time_at(op, am.x, opts.eta, 0.0, opts.step);
    });
    cert.median_exit_time = exit.T.value;
    cert.t_bracket_lo = exit.T.t_lo;
    cert.t_bracket_hi = exit.T.t_hi;
    const double T = exit.T.value;

    const double vn = unit_ball_volume(cert.dim);
    if (kind == "T1") {
        cert.norm_kind = "lorentz(n/2,1)";
        cert.radius_constant = 1.0;
        const double r = std::sqrt(T);
        const double r_vol = std::sqrt(T) * std::pow(vn, -1.0 / cert.dim);
        const BestBall bb = stage("scan", [&] {
            return best_ball_lorentz(V, r, cert.dim / 2.0);
        });
        const BestBall bv = stage("scan", [&] {
            return best_ball_lorentz(V, r_vol, cert.dim / 2.0);
        });
        cert.ball = bb.ball;
        cert.norm_value = bb.value;
        cert.ball_vol = bv.ball;
        cert.norm_value_vol = bv.value;
        cert.threshold = opts.threshold_t1;
    } else {
        cert.norm_kind = "log-kernel";
        cert.radius_constant = opts.t2_radius_constant;
        const double r = std::sqrt(opts.t2_radius_constant * T);
        const double r_vol = std::sqrt(T) * std::pow(vn, -1.0 / cert.dim);
        const BestBall bb = stage("scan", [&] { return best_ball_log_kernel(V, r); });
        cert.ball = bb.ball;
        cert.norm_value = bb.value;
        const BestBall bv = stage("scan", [&] {
            return best_ball_log_kernel(V, std::max(r_vol, 2.0 * op.h));
        });
        cert.ball_vol = bv.ball;
        cert.norm_value_vol = bv.value;
        cert.threshold = opts.threshold_t2;
    }

    if (opts.with_chain)
        cert.chain = stage("chain", [&] {
            return proof_chain(op, A, V, am.x, exit.curve, T, opts);
        });

    cert.baselines = stage("baselines", [&] {
        return global_baselines(op, V, cert.lambda1, opts.r_exponent);
    });

    cert.verdict = cert.norm_value >= cert.threshold ? "PASS" : "FAIL";
    return cert;
}

}  // namespace

Certificate theorem1_certificate(const DomainSpec& domain, double h, const CoefficientSpec& A,
                                 const PotentialSpec& V0, const PipelineOpts& opts) {
    if (domain.dim != 3)
        throw StageError("geometry", "the Lorentz-ball certificate needs a 3-D domain");
    return theorem12_common("T1", domain, h, A, V0, opts);
}

Certificate theorem2_certificate(const DomainSpec& domain, double h, const CoefficientSpec& A,
                                 const PotentialSpec& V0, const PipelineOpts& opts) {
    if (domain.dim != 2)
        throw StageError("geometry", "the log-kernel certificate needs a 2-D domain");
    return theorem12_common("T2", domain, h, A, V0, opts);
}

Certificate theorem3_check(const DomainSpec& domain, double h, const CoefficientSpec& Aspec,
                           const PotentialSpec& Vspec, double eta, const PipelineOpts& opts) {
    if (domain.dim != 3)
        throw StageError("geometry", "the intersection dichotomy needs a 3-D domain");
    if (!(eta > 0) || !(eta < 1))
        throw StageError("config", "eta must be in (0, 1)");
    Certificate cert;
    cert.kind = "T3";
    cert.domain_name = domain.name;
    cert.dim = domain.dim;
    cert.h = h;
    cert.eta = eta;
    cert.tol = opts.tol;
    cert.key = make_key("T3", domain.name, h);
    cert.potential_source = "given";
    cert.calibration_scale = 1.0;

    auto mask = stage("geometry", [&] { return build_domain(domain, h); });
    const CoefficientField A = stage("coefficients", [&] {
        auto a = make_coefficients(Aspec, mask);
        validate_ellipticity(a);
        return a;
    });
    const DiscreteOperator op = assemble_operator(A);
    const ScalarField V = stage("coefficients", [&] {
        return make_potential_template(Vspec, mask);
    });

    EigenOpts eig;
    eig.rel_tol = opts.tol.eig_rel_tol;
    eig.cg_tol = std::min(opts.tol.cg_tol, 1e-12);
    const EigenPair ground = stage("argmax", [&] {
        return eigen_with_potential(op, &V.v, eig);
    });
    cert.lambda1 = stage("baselines", [&] { return principal_eigenpair(op, eig).lambda; });
    cert.calibration_mu = ground.lambda;
    const ArgmaxResult am = stage("argmax", [&] { return argmax_abs(ground.u); });
    cert.x0 = am.x;
    cert.sign_branch = am.sign >= 0 ? "u" : "-u";

    const ExitTimeResult exit = stage("exit-time", [&] {
        return median_exit_time_at(op, am.x, eta, 0.0, opts.step);
    });
    cert.median_exit_time = exit.T.value;
    cert.t_bracket_lo = exit.T.t_lo;
    cert.t_bracket_hi = exit.T.t_hi;
    const double T = exit.T.value;
    const double r = std::sqrt(T);

    cert.norm_kind = "lorentz(n/2,1)";
    const BestBall bb = stage("scan", [&] { return best_ball_lorentz(V, r, 1.5); });
    cert.norm_value = bb.value;
    cert.ball = {am.x, r};  // the dichotomy ball is centered at x0 itself
    cert.ball_vol = bb.ball;
    cert.norm_value_vol = bb.value;
    cert.threshold = opts.t3_threshold > 0 ? opts.t3_threshold : eta;

    cert.hypothesis_holds = cert.norm_value < cert.threshold;
    cert.fraction_bound = eta < 0.5 ? (1.0 - 2.0 * eta) / (1.0 - eta) : 0.0;
    cert.intersection_fraction = stage("scan", [&] {
        return ball_intersection_fraction(*mask, BallSpec{am.x, r});
    });
    cert.baselines = stage("baselines", [&] {
        return global_baselines(op, V, cert.lambda1, opts.r_exponent);
    });

    if (!cert.hypothesis_holds) {
        cert.verdict = "NOT-APPLICABLE";
        cert.notes.push_back("best-ball norm exceeds the smallness gate; dichotomy not triggered");
    } else if (cert.intersection_fraction >= cert.fraction_bound * (1.0 - 1e-9)) {
        cert.verdict = "PASS";
    } else {
        cert.verdict = "FAIL";
    }
    return cert;
}

}  // namespace fklab
