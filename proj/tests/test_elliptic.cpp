#include <doctest.h>

#include <cmath>
#include <random>

#include "fklab/elliptic.hpp"
#include "fklab/numerics.hpp"

using namespace fklab;

namespace {

DiscreteOperator square_op(double h) {
    auto mask = build_domain(DomainSpec::make_box(2, {1, 1, 1}), h);
    return assemble_operator(identity_coefficients(mask));
}

std::vector<double> random_vec(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

}  // namespace

TEST_CASE("operator rows sum to minus the absorption") {
    // L 1 = -absorb: interior face weights cancel pairwise, boundary faces stay
    for (double h : {0.125, 1.0 / 32}) {
        const auto op = square_op(h);
        std::vector<double> ones(op.size(), 1.0), y(op.size());
        op.apply(ones, y);
        double worst = 0.0;
        for (std::size_t i = 0; i < op.size(); ++i)
            worst = std::max(worst, std::abs(y[i] + op.absorb[i]));
        CHECK(worst <= 1e-9 / (h * h));
    }
}

TEST_CASE("operator is symmetric and negative definite") {
    const auto op = square_op(1.0 / 16);
    const auto u = random_vec(op.size(), 1);
    const auto v = random_vec(op.size(), 2);
    std::vector<double> Lu(op.size()), Lv(op.size());
    op.apply(u, Lu);
    op.apply(v, Lv);
    const double a = inner(op, Lu, v);
    const double b = inner(op, u, Lv);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
    CHECK(energy(op, u) < 0.0);
}

TEST_CASE("sampled sine is an exact discrete eigenvector") {
    const double h = 1.0 / 32;
    const auto op = square_op(h);
    const auto& mask = *op.mask;
    std::vector<double> u(op.size()), Lu(op.size());
    const double pi = std::acos(-1.0);
    for (std::size_t i = 0; i < mask.cells.size(); ++i) {
        const Vec x = mask.center_of(mask.cells[i]);
        u[i] = std::sin(pi * x[0]) * std::sin(2 * pi * x[1]);
    }
    const double lam = (4.0 / (h * h)) *
                       (std::pow(std::sin(pi * h / 2), 2) + std::pow(std::sin(pi * h), 2));
    op.apply(u, Lu);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(Lu[i] + lam * u[i]));
    CHECK(worst <= 1e-8 * lam);
}

TEST_CASE("anisotropic diagonal coefficients rescale the axis eigenvalues") {
    const double h = 1.0 / 32;
    auto mask = build_domain(DomainSpec::make_box(2, {1, 1, 1}), h);
    const auto op = assemble_operator(diagonal_coefficients(mask, {2.0, 0.5, 1.0}));
    const auto& m = *op.mask;
    std::vector<double> u(op.size()), Lu(op.size());
    const double pi = std::acos(-1.0);
    for (std::size_t i = 0; i < m.cells.size(); ++i) {
        const Vec x = m.center_of(m.cells[i]);
        u[i] = std::sin(pi * x[0]) * std::sin(pi * x[1]);
    }
    const double lam = (4.0 / (h * h)) * (2.0 + 0.5) * std::pow(std::sin(pi * h / 2), 2);
    op.apply(u, Lu);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(Lu[i] + lam * u[i]));
    CHECK(worst <= 1e-8 * lam);
}

TEST_CASE("ellipticity validation") {
    auto mask = build_domain(DomainSpec::make_box(2, {1, 1, 1}), 0.25);
    auto A = identity_coefficients(mask);
    CHECK_NOTHROW(validate_ellipticity(A));
    A.diag[3][1] = -1.0;
    CHECK_THROWS(validate_ellipticity(A));

    const auto cb = checkerboard_coefficients(mask, 1.0, 3.0, 1);
    CHECK(cb.lambda == doctest::Approx(1.0));
    CHECK(cb.Lambda == doctest::Approx(3.0));
    CHECK_NOTHROW(validate_ellipticity(cb));
}

TEST_CASE("shifted solves reach the requested residual") {
    const auto op = square_op(1.0 / 32);
    const auto rhs = random_vec(op.size(), 3);
    SolveInfo info;
    const auto x = solve_shifted(op, 1.0, rhs, 1e-11, &info);
    std::vector<double> Lx(op.size());
    op.apply(x, Lx);
    std::vector<double> res(op.size());
    for (std::size_t i = 0; i < x.size(); ++i) res[i] = x[i] - Lx[i] - rhs[i];
    CHECK(std::sqrt(det_dot(res, res)) <= 1e-10 * std::sqrt(det_dot(rhs, rhs)));
    CHECK(info.iterations > 0);
}

TEST_CASE("potential-aware solve matches the plain one for V = 0") {
    const auto op = square_op(1.0 / 16);
    const auto rhs = random_vec(op.size(), 4);
    std::vector<double> zero(op.size(), 0.0);
    const auto a = solve_shifted(op, 2.0, rhs, 1e-12);
    const auto b = solve_shifted(op, 2.0, &zero, rhs, 1e-12);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10));
}

TEST_CASE("parabolic step keeps survival in [0,1] and decays") {
    const auto op = square_op(1.0 / 16);
    std::vector<double> u(op.size(), 1.0);
    double prev = 1.0;
    for (int s = 0; s < 5; ++s) {
        u = step_parabolic(op, nullptr, u, 1e-4, 1.0);  // backward Euler
        double mx = 0.0;
        for (double x : u) {
            CHECK(x >= -1e-12);
            mx = std::max(mx, x);
        }
        CHECK(mx <= prev + 1e-12);
        prev = mx;
    }
}

TEST_CASE("parabolic step rejects an implicit system that is not definite") {
    const auto op = square_op(1.0 / 16);
    std::vector<double> u(op.size(), 1.0);
    std::vector<double> V(op.size(), 50.0);
    // theta dt max(V) = 0.5 * 0.1 * 50 = 2.5 >= 1
    CHECK_THROWS(step_parabolic(op, &V, u, 0.1, 0.5));
}
