#include "fklab/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "fklab/numerics.hpp"

namespace fklab {

ScalarField constant_field(std::shared_ptr<const DomainMask> mask, double value,
                           std::string unit) {
    ScalarField f;
    f.mask = std::move(mask);
    f.v.assign(f.mask->cell_count(), value);
    f.unit = std::move(unit);
    return f;
}

CoefficientField identity_coefficients(std::shared_ptr<const DomainMask> mask) {
    return diagonal_coefficients(std::move(mask), {1.0, 1.0, 1.0});
}

CoefficientField diagonal_coefficients(std::shared_ptr<const DomainMask> mask,
                                       std::array<double, 3> entries) {
    CoefficientField A;
    A.mask = std::move(mask);
    A.diag.assign(A.mask->cell_count(), entries);
    double lo = entries[0], hi = entries[0];
    for (int d = 0; d < A.mask->n; ++d) {
        lo = std::min(lo, entries[d]);
        hi = std::max(hi, entries[d]);
    }
    A.lambda = lo;
    A.Lambda = hi;
    return A;
}

CoefficientField checkerboard_coefficients(std::shared_ptr<const DomainMask> mask,
                                           double a, double b, int period_cells) {
    if (period_cells < 1) throw std::invalid_argument("checkerboard period must be >= 1 cell");
    CoefficientField A;
    A.mask = std::move(mask);
    A.diag.resize(A.mask->cell_count());
    for (std::size_t u = 0; u < A.mask->cells.size(); ++u) {
        const auto c = A.mask->coords(A.mask->cells[u]);
        const int parity = (c[0] / period_cells + c[1] / period_cells + c[2] / period_cells) % 2;
        const double val = parity == 0 ? a : b;
        A.diag[u] = {val, val, val};
    }
    A.lambda = std::min(a, b);
    A.Lambda = std::max(a, b);
    return A;
}

void validate_ellipticity(const CoefficientField& A) {
    for (std::size_t u = 0; u < A.diag.size(); ++u)
        for (int d = 0; d < A.mask->n; ++d) {
            const double e = A.diag[u][d];
            if (!(e >= A.lambda) || !(e <= A.Lambda))
                throw std::invalid_argument(
                    "coefficient eigenvalue " + std::to_string(e) + " at cell " +
                    std::to_string(A.mask->cells[u]) + " leaves [lambda, Lambda]");
        }
}

DiscreteOperator assemble_operator(const CoefficientField& A) {
    validate_ellipticity(A);
    const auto& mask = *A.mask;
    DiscreteOperator op;
    op.mask = A.mask;
    op.h = mask.h;
    op.n = mask.n;
    const std::size_t m = mask.cell_count();
    op.nbr.assign(m, {-1, -1, -1, -1, -1, -1});
    op.w.assign(m, {0, 0, 0, 0, 0, 0});
    op.diagv.assign(m, 0.0);
    op.absorb.assign(m, 0.0);

    const double inv_h2 = 1.0 / (mask.h * mask.h);
    const int off[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (std::size_t u = 0; u < m; ++u) {
        const auto c = mask.coords(mask.cells[u]);
        double diag = 0.0, absorb = 0.0;
        for (int axis = 0; axis < mask.n; ++axis)
            for (int s = -1; s <= 1; s += 2) {
                const int dir = 2 * axis + (s > 0 ? 1 : 0);
                const int ni = c[0] + s * off[axis][0];
                const int nj = c[1] + s * off[axis][1];
                const int nk = c[2] + s * off[axis][2];
                const double ai = A.diag[u][axis];
                if (mask.is_inside(ni, nj, nk)) {
                    const std::int32_t v =
                        mask.unknown[static_cast<std::size_t>(mask.index(ni, nj, nk))];
                    const double aj = A.diag[static_cast<std::size_t>(v)][axis];
                    const double wf = 2.0 * ai * aj / (ai + aj) * inv_h2;
                    op.nbr[u][dir] = v;
                    op.w[u][dir] = wf;
                    diag -= wf;
                } else {
                    // Dirichlet face at distance h/2: flux 2 a_i (0 - u_i) / h^2.
                    const double wf = 2.0 * ai * inv_h2;
                    diag -= wf;
                    absorb += wf;
                }
            }
        op.diagv[u] = diag;
        op.absorb[u] = absorb;
    }
    return op;
}

void DiscreteOperator::apply(const std::vector<double>& x, std::vector<double>& y) const {
    const long long m = static_cast<long long>(size());
    if (x.size() != size()) throw std::invalid_argument("operator apply: size mismatch");
    y.resize(size());
    (void)thread_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long i = 0; i < m; ++i) {
        const std::size_t u = static_cast<std::size_t>(i);
        double acc = diagv[u] * x[u];
        for (int dir = 0; dir < 2 * n; ++dir) {
            const std::int32_t v = nbr[u][dir];
            if (v >= 0) acc += w[u][dir] * x[static_cast<std::size_t>(v)];
        }
        y[u] = acc;
    }
}

double DiscreteOperator::gersh_bound() const {
    double best = 0.0;
    for (std::size_t u = 0; u < size(); ++u) {
        double row = -diagv[u];
        for (int dir = 0; dir < 2 * n; ++dir)
            if (nbr[u][dir] >= 0) row += w[u][dir];
        best = std::max(best, row);
    }
    return best;
}

double inner(const DiscreteOperator& op, const std::vector<double>& u,
             const std::vector<double>& v) {
    return det_dot(u, v) * op.mask->cell_volume();
}

double energy(const DiscreteOperator& op, const std::vector<double>& u) {
    std::vector<double> lu;
    op.apply(u, lu);
    return det_dot(lu, u) * op.mask->cell_volume();
}

namespace {

// Conjugate gradients with deterministic dot products.  `apply` must realise a
// symmetric positive definite matrix.
std::vector<double> cg_solve(const std::function<void(const std::vector<double>&,
                                                      std::vector<double>&)>& apply,
                             const std::vector<double>& b, double tol, long long max_iter,
                             SolveInfo* info) {
    const std::size_t m = b.size();
    std::vector<double> x(m, 0.0), r = b, p = b, ap(m);
    const double bnorm2 = det_dot(b, b);
    if (bnorm2 == 0.0) {
        if (info) *info = {0, 0.0};
        return x;
    }
    double rr = bnorm2;
    int it = 0;
    for (; it < max_iter; ++it) {
        if (rr <= tol * tol * bnorm2) break;
        apply(p, ap);
        const double pap = det_dot(p, ap);
        if (!(pap > 0))
            throw std::runtime_error("cg: system not positive definite (p^T A p = " +
                                     std::to_string(pap) + ")");
        const double alpha = rr / pap;
        for (std::size_t i = 0; i < m; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < m; ++i) r[i] -= alpha * ap[i];
        const double rr_new = det_dot(r, r);
        const double beta = rr_new / rr;
        for (std::size_t i = 0; i < m; ++i) p[i] = r[i] + beta * p[i];
        rr = rr_new;
    }
    const double rel = std::sqrt(rr / bnorm2);
    if (rel > tol)
        throw std::runtime_error("cg: no convergence after " + std::to_string(it) +
                                 " iterations, relative residual " + std::to_string(rel));
    if (info) *info = {it, rel};
    return x;
}

long long iter_cap(std::size_t cells) {
    return 50 + static_cast<long long>(50.0 * std::sqrt(static_cast<double>(cells)));
}

}  // namespace

std::vector<double> solve_shifted(const DiscreteOperator& op, double sigma,
                                  const std::vector<double>& rhs, double tol, SolveInfo* info) {
    if (sigma < 0) throw std::invalid_argument("solve_shifted: sigma must be >= 0");
    return solve_shifted(op, sigma, nullptr, rhs, tol, info);
}

std::vector<double> solve_shifted(const DiscreteOperator& op, double sigma,
                                  const std::vector<double>* V, const std::vector<double>& rhs,
                                  double tol, SolveInfo* info) {
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        op.apply(x, y);
        const std::size_t m = x.size();
        if (V)
            for (std::size_t i = 0; i < m; ++i) y[i] = sigma * x[i] - y[i] - (*V)[i] * x[i];
        else
            for (std::size_t i = 0; i < m; ++i) y[i] = sigma * x[i] - y[i];
    };
    return cg_solve(apply, rhs, tol, iter_cap(op.size()), info);
}

std::vector<double> step_parabolic(const DiscreteOperator& op, const std::vector<double>* V,
                                   const std::vector<double>& state, double dt, double theta,
                                   const std::vector<double>* source, double cg_tol) {
    if (!(dt > 0)) throw std::invalid_argument("step_parabolic: dt must be positive");
    if (theta < 0.5 || theta > 1.0)
        throw std::invalid_argument("step_parabolic: theta must be in [1/2, 1]");
    if (V) {
        double vmax = 0.0;
        for (double x : *V) vmax = std::max(vmax, x);
        if (theta * dt * vmax >= 1.0)
            throw std::invalid_argument("step_parabolic: dt too large, implicit system loses "
                                        "positive definiteness (theta dt max V >= 1)");
    }
    const std::size_t m = state.size();
    std::vector<double> rhs(m), tmp(m);
    op.apply(state, tmp);
    const double expl = (1.0 - theta) * dt;
    for (std::size_t i = 0; i < m; ++i) {
        double a = state[i] + expl * tmp[i];
        if (V) a += expl * (*V)[i] * state[i];
        if (source) a += dt * (*source)[i];
        rhs[i] = a;
    }
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        op.apply(x, y);
        for (std::size_t i = 0; i < m; ++i) {
            double a = x[i] - theta * dt * y[i];
            if (V) a -= theta * dt * (*V)[i] * x[i];
            y[i] = a;
        }
    };
    return cg_solve(apply, rhs, cg_tol, iter_cap(op.size()), nullptr);
}

}  // namespace fklab
