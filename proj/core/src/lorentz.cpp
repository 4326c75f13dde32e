#include "fklab/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fklab/numerics.hpp"

namespace fklab {

std::vector<double> region_values(const ScalarField& f, const Region& region) {
    if (!region.mask) throw std::invalid_argument("region_values: empty region mask");
    if (f.mask != region.mask)
        throw std::invalid_argument("region_values: field and region use different masks");
    const DomainMask& mask = *region.mask;
    std::vector<double> out;
    out.reserve(f.v.size());
    if (!region.ball) {
        for (double x : f.v) out.push_back(std::abs(x));
        return out;
    }
    const double r2 = region.ball->radius * region.ball->radius;
    for (std::size_t u = 0; u < mask.cells.size(); ++u) {
        const Vec c = mask.center_of(mask.cells[u]);
        if (dist2(c, region.ball->center) <= r2) out.push_back(std::abs(f.v[u]));
    }
    return out;
}

double DistributionFunction::eval(double s) const {
    if (s < 0) throw std::invalid_argument("distribution function: s must be >= 0");
    // measure of {|f| > s} = cumulative atoms of all values strictly above s
    double out = 0.0;
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (value[i] > s)
            out = measure[i];
        else
            break;
    }
    return out;
}

DistributionFunction distribution_function(std::vector<double> abs_values, double atom) {
    if (!(atom > 0)) throw std::invalid_argument("distribution_function: atom must be > 0");
    for (double& x : abs_values) x = std::abs(x);
    std::sort(abs_values.begin(), abs_values.end(), std::greater<double>());
    DistributionFunction df;
    df.atom = atom;
    std::size_t count = 0;
    for (double x : abs_values) {
        ++count;
        if (x <= 0) break;
        if (!df.value.empty() && df.value.back() == x) {
            df.measure.back() = static_cast<double>(count) * atom;
        } else {
            df.value.push_back(x);
            df.measure.push_back(static_cast<double>(count) * atom);
        }
    }
    return df;
}

double lorentz_norm(std::vector<double> abs_values, double atom, double p, double q) {
    if (!(p > 0)) throw std::invalid_argument("lorentz_norm: p must be > 0");
    if (!(atom > 0)) throw std::invalid_argument("lorentz_norm: atom must be > 0");
    for (double& x : abs_values) x = std::abs(x);
    std::sort(abs_values.begin(), abs_values.end(), std::greater<double>());
    while (!abs_values.empty() && abs_values.back() <= 0.0) abs_values.pop_back();
    if (abs_values.empty()) return 0.0;
    const std::size_t N = abs_values.size();

    if (q == p) {
        std::vector<double> terms(N);
        for (std::size_t i = 0; i < N; ++i) terms[i] = std::pow(abs_values[i], p) * atom;
        return std::pow(det_sum(terms), 1.0 / p);
    }
    if (q == 1.0) {
        // int_0^inf mu{|f|>s}^{1/p} ds over the layers s in (v_{k+1}, v_k]
        std::vector<double> terms(N);
        for (std::size_t k = 1; k <= N; ++k) {
            const double vk = abs_values[k - 1];
            const double vnext = k < N ? abs_values[k] : 0.0;
            terms[k - 1] = std::pow(static_cast<double>(k) * atom, 1.0 / p) * (vk - vnext);
        }
        return det_sum(terms);
    }
    if (std::isinf(q)) {
        double best = 0.0;
        for (std::size_t k = 1; k <= N; ++k)
            best = std::max(best,
                            abs_values[k - 1] * std::pow(static_cast<double>(k) * atom, 1.0 / p));
        return best;
    }
    throw std::invalid_argument("lorentz_norm: q must be 1, p, or infinity");
}

double lorentz_norm(const ScalarField& f, const Region& region, double p, double q) {
    return lorentz_norm(region_values(f, region), region.mask->cell_volume(), p, q);
}

double oneil_ratio(const ScalarField& f, const ScalarField& g) {
    if (f.mask != g.mask) throw std::invalid_argument("oneil_ratio: fields on different masks");
    const int n = f.mask->n;
    if (n < 3) throw std::invalid_argument("oneil_ratio: needs dimension >= 3");
    const double atom = f.mask->cell_volume();
    const std::size_t m = f.v.size();
    std::vector<double> prod(m);
    for (std::size_t i = 0; i < m; ++i) prod[i] = std::abs(f.v[i] * g.v[i]) * atom;
    const double l1 = det_sum(prod);
    const double nf = lorentz_norm(f.v, atom, n / 2.0, 1.0);
    const double ng = lorentz_norm(g.v, atom, static_cast<double>(n) / (n - 2),
                                   std::numeric_limits<double>::infinity());
    if (!(nf > 0) || !(ng > 0))
        throw std::runtime_error("oneil_ratio: denominator norm is zero");
    return l1 / (nf * ng);
}

}  // namespace fklab
