#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fklab/geometry.hpp"

namespace fklab {

// Piecewise-constant scalar data over the inside cells of a mask.  Outside
// cells carry an implicit exact zero.  `unit` is a free-form tag ("1" for
// dimensionless, "1/length^2" for potentials).
struct ScalarField {
    std::shared_ptr<const DomainMask> mask;
    std::vector<double> v;  // one value per inside cell, in mask->cells order
    std::string unit = "1";

    double at_cell(std::int64_t cell) const {
        const std::int32_t u = mask->unknown[static_cast<std::size_t>(cell)];
        return u >= 0 ? v[static_cast<std::size_t>(u)] : 0.0;
    }
};

ScalarField constant_field(std::shared_ptr<const DomainMask> mask, double value,
                           std::string unit = "1");

// Per-cell diagonal coefficient matrix A(x) together with its ellipticity
// window.  Off-diagonal anisotropy is not representable: the two-point flux
// stencil below is only consistent for axis-aligned A.
struct CoefficientField {
    std::shared_ptr<const DomainMask> mask;
    std::vector<std::array<double, 3>> diag;  // one entry set per inside cell
    double lambda = 1.0;   // lower ellipticity bound
    double Lambda = 1.0;   // upper ellipticity bound
};

CoefficientField identity_coefficients(std::shared_ptr<const DomainMask> mask);
CoefficientField diagonal_coefficients(std::shared_ptr<const DomainMask> mask,
                                       std::array<double, 3> entries);
// Two-phase checkerboard: entry a where the cell parity (sum of cell indices at
// the given period, in cells) is even, b where odd.
CoefficientField checkerboard_coefficients(std::shared_ptr<const DomainMask> mask,
                                           double a, double b, int period_cells);

// Throws naming the first offending cell when an eigenvalue of A leaves
// [lambda, Lambda].
void validate_ellipticity(const CoefficientField& A);

// Finite-volume discretization of L = div(A grad .) with homogeneous Dirichlet
// data on the boundary faces.  Face weights use the harmonic mean of the
// adjacent diagonal entries; a face shared with an outside cell puts u = 0 on
// the face itself (half-cell distance, weight 2 a_i / h^2).  For A = I the
// interior stencil is the standard (2n+1)-point h^-2 Laplacian.  Symmetric
// negative definite by construction.
struct DiscreteOperator {
    std::shared_ptr<const DomainMask> mask;
    double h = 0.0;
    int n = 2;
    std::vector<std::array<std::int32_t, 6>> nbr;  // unknown index per direction, -1 if none
    std::vector<std::array<double, 6>> w;          // face weight toward that neighbor
    std::vector<double> diagv;                     // L_ii (negative)
    std::vector<double> absorb;                    // sum of boundary-face weights per cell

    std::size_t size() const { return diagv.size(); }
    // y = L x
    void apply(const std::vector<double>& x, std::vector<double>& y) const;
    // Gershgorin bound for the spectral radius of -L.
    double gersh_bound() const;
};

DiscreteOperator assemble_operator(const CoefficientField& A);

// <u, v> with the h^n cell measure.
double inner(const DiscreteOperator& op, const std::vector<double>& u,
             const std::vector<double>& v);
// <L u, u>; always <= 0.
double energy(const DiscreteOperator& op, const std::vector<double>& u);

struct SolveInfo {
    int iterations = 0;
    double rel_residual = 0.0;
};

// Solve (sigma I - L) x = rhs by conjugate gradients.  sigma >= 0 keeps the
// system positive definite (the Dirichlet operator itself is negative
// definite).  Throws on iteration-cap breach, reporting the residual.
std::vector<double> solve_shifted(const DiscreteOperator& op, double sigma,
                                  const std::vector<double>& rhs, double tol = 1e-10,
                                  SolveInfo* info = nullptr);

// Solve (sigma I - L - V) x = rhs.  The caller must pick sigma >= max V; this
// keeps the shifted system positive definite.  V may be null.
std::vector<double> solve_shifted(const DiscreteOperator& op, double sigma,
                                  const std::vector<double>* V, const std::vector<double>& rhs,
                                  double tol = 1e-10, SolveInfo* info = nullptr);

// One theta-scheme step of u_t = L u + V u + source, i.e. solve
//   (I - theta dt (L+V)) u1 = (I + (1-theta) dt (L+V)) u0 + dt * source.
// V and source may be null.  theta in [1/2, 1]; the implicit system must stay
// positive definite, which is checked via theta*dt*max(V) < 1.
std::vector<double> step_parabolic(const DiscreteOperator& op, const std::vector<double>* V,
                                   const std::vector<double>& state, double dt, double theta,
                                   const std::vector<double>* source = nullptr,
                                   double cg_tol = 1e-10);

}  // namespace fklab
