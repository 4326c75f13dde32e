#include "fklab/kernel_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fklab/lorentz.hpp"
#include "fklab/numerics.hpp"

namespace fklab {

KernelConstants KernelConstants::exact_heat(int n) {
    if (n < 2) throw std::invalid_argument("exact_heat: n >= 2");
    KernelConstants k;
    const double pi = std::acos(-1.0);
    k.c1 = std::pow(4.0 * pi, -0.5 * n);
    k.c2 = 4.0;
    k.n = n;
    return k;
}

namespace {

// Upper incomplete gamma Gamma(s, x) = int_x^inf y^{s-1} e^{-y} dy, evaluated
// as e^{-x} int_0^U (x+u)^{s-1} e^{-u} du with a tail cut far below target
// accuracy.
double upper_gamma(double s, double x) {
    const double cut = 120.0;
    auto f = [&](double u) { return std::pow(x + u, s - 1.0) * std::exp(-u); };
    const double scale = std::pow(std::max(x, 1.0), s - 1.0) + 1.0;
    const double integral = adaptive_simpson(f, 0.0, cut, 1e-11 * scale);
    return std::exp(-x) * integral;
}

}  // namespace

double time_integrated_gaussian(double r, double d, const KernelConstants& k) {
    if (!(r > 0)) throw std::invalid_argument("time_integrated_gaussian: r must be > 0");
    if (!(d > 0)) throw std::invalid_argument("time_integrated_gaussian: d must be > 0");
    if (k.n < 2) throw std::invalid_argument("time_integrated_gaussian: n >= 2");
    const double a = r * r / k.c2;  // integral = c1 a^{1-n/2} Gamma(n/2-1, a/d)
    const double x = a / d;
    if (x > 740.0) return 0.0;
    const double pi = std::acos(-1.0);
    switch (k.n) {
        case 2:
            // Gamma(0, x) = E1(x) = -Ei(-x)
            return k.c1 * (-std::expint(-x));
        case 3:
            return k.c1 * std::sqrt(pi * k.c2) / r * std::erfc(std::sqrt(x));
        case 4:
            return k.c1 * k.c2 / (r * r) * std::exp(-x);
        default:
            return k.c1 * std::pow(a, 1.0 - 0.5 * k.n) * upper_gamma(0.5 * k.n - 1.0, x);
    }
}

std::vector<double> gauss_bound_polynomial(int n) {
    if (n < 5) throw std::invalid_argument("gauss_bound_polynomial: defined for n >= 5");
    const int k = (n - 4 + 1) / 2;  // ceil((n-4)/2)
    // Unrolling int_x^inf y^k e^{-y} dy = (x^k + k x^{k-1} + ... + k!) e^{-x}:
    //   q(x) = sum_{j=0..k} (k!/j!) x^j.
    double kfact = 1.0;
    for (int j = 2; j <= k; ++j) kfact *= j;
    std::vector<double> q(static_cast<std::size_t>(k) + 1, 0.0);
    double jfact = 1.0;
    for (int j = 0; j <= k; ++j) {
        if (j >= 2) jfact *= j;
        q[static_cast<std::size_t>(j)] = kfact / jfact;
    }
    return q;
}

double lemma_gauss_bound(double r, double d, const KernelConstants& k) {
    if (!(r > 0)) throw std::invalid_argument("lemma_gauss_bound: r must be > 0");
    if (!(d > 0)) throw std::invalid_argument("lemma_gauss_bound: d must be > 0");
    const double x = r * r / (k.c2 * d);
    const double damp = std::exp(-x);
    if (k.n == 2) return (1.0 + std::max(0.0, -std::log(x))) * damp;
    if (k.n == 3 || k.n == 4) return std::pow(r, 2.0 - k.n) * damp;
    const auto q = gauss_bound_polynomial(k.n);
    double poly = 0.0;
    for (std::size_t j = q.size(); j-- > 0;) poly = poly * x + q[j];
    return std::pow(r, 2.0 - k.n) * poly * damp;
}

double heat_kernel_mass(const KernelConstants& k, double s) {
    if (!(s > 0)) throw std::invalid_argument("heat_kernel_mass: s must be > 0");
    const double pi = std::acos(-1.0);
    const double vn = unit_ball_volume(k.n);
    const double amp = k.c1 * std::pow(s, -0.5 * k.n);
    auto f = [&](double r) {
        return amp * std::exp(-r * r / (k.c2 * s)) * k.n * vn * std::pow(r, k.n - 1.0);
    };
    // All the mass sits within a few sigma = sqrt(c2 s); one adaptive pass over
    // a wide interval can sample straight past the bump and "converge" to zero,
    // so integrate sigma-wide panels and sum (the tail beyond 12 sigma is
    // ~exp(-144), far below the quadrature tolerance).
    const double sigma = std::sqrt(k.c2 * s);
    const double scale = k.c1 * std::pow(pi * k.c2, 0.5 * k.n);
    double total = 0.0;
    for (int j = 0; j < 12; ++j)
        total += adaptive_simpson(f, j * sigma, (j + 1) * sigma, 1e-11 * scale);
    return total;
}

namespace {

struct SupportList {
    std::vector<std::array<int, 3>> cells;
    std::vector<double> vals;
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{0, 0, 0};
};

SupportList support_of(const ScalarField& f, const char* who) {
    const DomainMask& mask = *f.mask;
    SupportList s;
    s.lo = {std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
            std::numeric_limits<int>::max()};
    s.hi = {std::numeric_limits<int>::min(), std::numeric_limits<int>::min(),
            std::numeric_limits<int>::min()};
    for (std::size_t u = 0; u < f.v.size(); ++u) {
        if (f.v[u] == 0.0) continue;
        if (f.v[u] < 0.0)
            throw std::invalid_argument(std::string(who) + ": field must be >= 0");
        const auto c = mask.coords(mask.cells[u]);
        s.cells.push_back(c);
        s.vals.push_back(f.v[u]);
        for (int d = 0; d < 3; ++d) {
            s.lo[d] = std::min(s.lo[d], c[d]);
            s.hi[d] = std::max(s.hi[d], c[d]);
        }
    }
    if (s.cells.empty())
        throw std::invalid_argument(std::string(who) + ": field is identically zero");
    return s;
}

// Candidate sup centers: cell-center-aligned points covering the support's
// bounding box dilated by `dilate` cells, at `step` cells of spacing.  The
// integer coordinates may leave the mask's grid; they still name valid points
// origin + i*h.
std::vector<std::array<int, 3>> candidate_coords(const SupportList& s, int n, int dilate,
                                                 int step) {
    std::vector<std::array<int, 3>> out;
    const int klo = n == 3 ? s.lo[2] - dilate : 0;
    const int khi = n == 3 ? s.hi[2] + dilate : 0;
    for (int k = klo; k <= khi; k += step)
        for (int j = s.lo[1] - dilate; j <= s.hi[1] + dilate; j += step)
            for (int i = s.lo[0] - dilate; i <= s.hi[0] + dilate; i += step)
                out.push_back({i, j, k});
    return out;
}

// Memoized kernel tabulated by squared integer cell offset.
class OffsetTable {
  public:
    explicit OffsetTable(std::size_t max_m) : table_(max_m + 1, uninitialized()) {}

    template <typename F>
    double get(std::size_t m, F&& eval) {
        double& slot = table_[m];
        if (slot == uninitialized()) slot = eval();
        return slot;
    }

  private:
    static constexpr double uninitialized() { return -std::numeric_limits<double>::infinity(); }
    std::vector<double> table_;
};

std::size_t max_offset2(const SupportList& s, int n, int dilate) {
    std::size_t m = 0;
    for (int d = 0; d < n; ++d) {
        const std::size_t range =
            static_cast<std::size_t>(s.hi[d] - s.lo[d]) + static_cast<std::size_t>(dilate);
        m += range * range;
    }
    return m + 1;
}

}  // namespace

double lemma_est_ratio(const ScalarField& f, double d, const KernelConstants& k) {
    const DomainMask& mask = *f.mask;
    const int n = mask.n;
    if (n < 3) throw std::invalid_argument("lemma_est_ratio: needs dimension >= 3");
    if (k.n != n) throw std::invalid_argument("lemma_est_ratio: kernel dimension mismatch");
    if (!(d > 0)) throw std::invalid_argument("lemma_est_ratio: d must be > 0");
    const double h = mask.h;
    const SupportList supp = support_of(f, "lemma_est_ratio");
    const int dilate = static_cast<int>(std::ceil(2.0 * d / h));
    const int step = std::max(1, static_cast<int>(std::lround(d / 8.0 / h)));
    const auto cands = candidate_coords(supp, n, dilate, step);
    const double cellv = mask.cell_volume();
    const double budget = d * d;  // time horizon of the kernel integral

    // Self-cell: integrate the kernel over the equivalent ball of the cell.
    const double vn = unit_ball_volume(n);
    const double rho = h * std::pow(vn, -1.0 / n);
    auto self_integrand = [&](double r) {
        if (r <= 0) return 0.0;
        return time_integrated_gaussian(r, budget, k) * n * vn * std::pow(r, n - 1.0);
    };
    const double self_value =
        adaptive_simpson(self_integrand, 0.0, rho, 1e-10 * time_integrated_gaussian(rho, budget, k) * cellv);

    OffsetTable table(max_offset2(supp, n, dilate));
    auto kernel_at = [&](std::size_t m) {
        if (m == 0) return self_value;
        return table.get(m, [&] {
            return time_integrated_gaussian(h * std::sqrt(static_cast<double>(m)), budget, k) *
                   cellv;
        });
    };

    // Numerator: sup over candidates of the kernel-smoothed mass.
    const long long nc = static_cast<long long>(cands.size());
    std::vector<double> num(cands.size(), 0.0);
    for (long long ci = 0; ci < nc; ++ci) {
        const auto& c = cands[static_cast<std::size_t>(ci)];
        double acc = 0.0;
        for (std::size_t q = 0; q < supp.cells.size(); ++q) {
            const auto& y = supp.cells[q];
            std::size_t m = 0;
            for (int dd = 0; dd < n; ++dd) {
                const long long diff = c[dd] - y[dd];
                m += static_cast<std::size_t>(diff * diff);
            }
            acc += supp.vals[q] * kernel_at(m);
        }
        num[static_cast<std::size_t>(ci)] = acc;
    }
    double sup_num = 0.0;
    for (double v : num) sup_num = std::max(sup_num, v);

    // Denominator: sup over balls of volume <= d^n of the L^{n/2,1} norm.
    const double rb = d * std::pow(vn, -1.0 / n);
    const double rb2_cells = rb * rb / (h * h);
    double sup_den = 0.0;
    std::vector<double> den(cands.size(), 0.0);
    (void)thread_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long ci = 0; ci < nc; ++ci) {
        const auto& c = cands[static_cast<std::size_t>(ci)];
        std::vector<double> vals;
        for (std::size_t q = 0; q < supp.cells.size(); ++q) {
            const auto& y = supp.cells[q];
            double m = 0;
            for (int dd = 0; dd < n; ++dd) {
                const double diff = static_cast<double>(c[dd] - y[dd]);
                m += diff * diff;
            }
            if (m <= rb2_cells) vals.push_back(supp.vals[q]);
        }
        if (!vals.empty())
            den[static_cast<std::size_t>(ci)] = lorentz_norm(std::move(vals), cellv, n / 2.0, 1.0);
    }
    for (double v : den) sup_den = std::max(sup_den, v);
    if (!(sup_den > 0)) throw std::runtime_error("lemma_est_ratio: denominator vanished");
    return sup_num / sup_den;
}

namespace {

// int over the cell square [-h/2, h/2]^2 of log(d^2/|z|^2) dz, closed form.
double log_cell_integral(double h, double d) {
    const double a = 0.5 * h;
    const double pi = std::acos(-1.0);
    // int_{[-a,a]^2} log|z| dz = 2 a^2 (log(2 a^2) - 3 + pi/2)
    const double log_abs = 2.0 * a * a * (std::log(2.0 * a * a) - 3.0 + 0.5 * pi);
    return 2.0 * h * h * std::log(d) - 2.0 * log_abs;
}

}  // namespace

double log_kernel_convolution(const ScalarField& f, const Vec& x, double d) {
    const DomainMask& mask = *f.mask;
    if (mask.n != 2) throw std::invalid_argument("log_kernel_convolution: needs dimension 2");
    const double h = mask.h;
    if (!(d >= 2.0 * h))
        throw std::invalid_argument("log_kernel_convolution: need d >= 2h to resolve the kernel");
    const double d2 = d * d;
    const double near2 = 0.25 * h * h;
    double acc = 0.0;
    for (std::size_t u = 0; u < f.v.size(); ++u) {
        const double fv = f.v[u];
        if (fv == 0.0) continue;
        const Vec y = mask.center_of(mask.cells[u]);
        const double r2 = dist2(x, y);
        if (r2 > d2) continue;
        if (r2 < near2)
            acc += fv * log_cell_integral(h, d);
        else
            acc += fv * std::log(d2 / r2) * h * h;
    }
    return acc;
}

double lemma_final_ratio(const ScalarField& f, double d) {
    const DomainMask& mask = *f.mask;
    if (mask.n != 2) throw std::invalid_argument("lemma_final_ratio: needs dimension 2");
    if (!(d > 0)) throw std::invalid_argument("lemma_final_ratio: d must be > 0");
    const double h = mask.h;
    const SupportList supp = support_of(f, "lemma_final_ratio");
    const int dilate = static_cast<int>(std::ceil(2.0 * d / h));
    const int step = std::max(1, static_cast<int>(std::lround(d / 8.0 / h)));
    const auto cands = candidate_coords(supp, 2, dilate, step);
    const double d2 = d * d;
    const double cellv = h * h;

    // g(y) = (1 + log(d^2/|y|^2) 1_{|y|<=d}) e^{-|y|^2/d^2}; self cell closed form.
    const double self_value = cellv + log_cell_integral(h, d);
    OffsetTable table(max_offset2(supp, 2, dilate));
    auto g_at = [&](std::size_t m) {
        if (m == 0) return self_value;
        return table.get(m, [&] {
            const double r2 = m * h * h;
            double val = 1.0;
            if (r2 <= d2) val += std::log(d2 / r2);
            return val * std::exp(-r2 / d2) * cellv;
        });
    };

    double sup_num = 0.0, sup_den = 0.0;
    for (const auto& c : cands) {
        double acc = 0.0;
        for (std::size_t q = 0; q < supp.cells.size(); ++q) {
            const auto& y = supp.cells[q];
            const long long di = c[0] - y[0];
            const long long dj = c[1] - y[1];
            acc += supp.vals[q] * g_at(static_cast<std::size_t>(di * di + dj * dj));
        }
        sup_num = std::max(sup_num, acc);
        const Vec xc{mask.origin[0] + c[0] * h, mask.origin[1] + c[1] * h, 0.0};
        sup_den = std::max(sup_den, log_kernel_convolution(f, xc, d));
    }
    if (!(sup_den > 0)) throw std::runtime_error("lemma_final_ratio: denominator vanished");
    return sup_num / sup_den;
}

}  // namespace fklab
