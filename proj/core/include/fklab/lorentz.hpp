#pragma once

#include <optional>
#include <vector>

#include "fklab/elliptic.hpp"

namespace fklab {

// Measurement region: all inside cells of a mask, optionally intersected with
// a closed ball (cells whose centers lie in the ball, matching the geometry
// module's counting convention).
struct Region {
    std::shared_ptr<const DomainMask> mask;
    std::optional<BallSpec> ball;
};

// |f| sampled over the region's cells; every cell is a measure atom of h^n.
std::vector<double> region_values(const ScalarField& f, const Region& region);

// Exact distribution function of a finite atomic measure: mu(s) = measure of
// {|f| > s}, a right-continuous step function.
struct DistributionFunction {
    std::vector<double> value;    // distinct positive values, descending
    std::vector<double> measure;  // measure[i] = mu{|f| >= value[i]}
    double atom = 0.0;

    double eval(double s) const;  // mu{|f| > s} for s >= 0
};

DistributionFunction distribution_function(std::vector<double> abs_values, double atom);

// Lorentz norm on atoms of size `atom`; q in {1, p, infinity}.
//   q = 1:   int_0^inf mu{|f| > s}^{1/p} ds      (exact finite sum)
//   q = inf: sup_s s * mu{|f| > s}^{1/p}          (attained at a field value)
//   q = p:   plain L^p norm of the samples
double lorentz_norm(std::vector<double> abs_values, double atom, double p, double q);
double lorentz_norm(const ScalarField& f, const Region& region, double p, double q);

// ||f g||_1 / (||f||_{n/2,1} * ||g||_{n/(n-2),inf}) over the shared mask; the
// refined Holder ratio.  Requires n >= 3 and nonzero norms.
double oneil_ratio(const ScalarField& f, const ScalarField& g);

}  // namespace fklab
