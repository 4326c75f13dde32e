#include <doctest.h>

#include <cmath>

#include "fklab/numerics.hpp"
#include "fklab/spectral.hpp"

using namespace fklab;

namespace {

const double kPi = std::acos(-1.0);

DiscreteOperator make_op(const DomainSpec& spec, double h) {
    auto mask = build_domain(spec, h);
    return assemble_operator(identity_coefficients(mask));
}

// per-axis discrete Dirichlet eigenvalue on a box side of length len
double axis_eig(double h, double len, int k) {
    return (4.0 / (h * h)) * std::pow(std::sin(k * kPi * h / (2.0 * len)), 2);
}

}  // namespace

TEST_CASE("square principal eigenvalue matches the discrete closed form") {
    const double h = 1.0 / 32;
    const auto op = make_op(DomainSpec::make_box(2, {1, 1, 1}), h);
    const auto p = principal_eigenpair(op);
    const double target = 2.0 * axis_eig(h, 1.0, 1);
    CHECK(p.lambda == doctest::Approx(target).epsilon(1e-8));
    CHECK(p.residual <= 1e-8 * p.lambda * 1.0001);
    // sup normalization with a positive max
    double mx = 0.0;
    for (double x : p.u.v) mx = std::max(mx, x);
    CHECK(mx == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("1x2 rectangle eigenvalue") {
    const double h = 1.0 / 32;
    const auto op = make_op(DomainSpec::make_box(2, {1, 2, 1}), h);
    const auto p = principal_eigenpair(op);
    const double target = axis_eig(h, 1.0, 1) + axis_eig(h, 2.0, 1);
    CHECK(p.lambda == doctest::Approx(target).epsilon(1e-8));
    // continuum value pi^2 (1 + 1/4) = 12.337 within O(h^2)
    CHECK(p.lambda == doctest::Approx(kPi * kPi * 1.25).epsilon(0.01));
}

TEST_CASE("cube principal eigenvalue") {
    const double h = 1.0 / 12;
    const auto op = make_op(DomainSpec::make_box(3, {1, 1, 1}), h);
    const auto p = principal_eigenpair(op);
    CHECK(p.lambda == doctest::Approx(3.0 * axis_eig(h, 1.0, 1)).epsilon(1e-8));
}

TEST_CASE("disk principal eigenvalue approaches the Bessel zero") {
    const auto op = make_op(DomainSpec::make_ball(2, 1.0), 1.0 / 48);
    const auto p = principal_eigenpair(op);
    CHECK(p.lambda == doctest::Approx(5.783185962946783).epsilon(0.02));
}

TEST_CASE("constant potential shifts the eigenvalue exactly") {
    const double h = 1.0 / 24;
    const auto op = make_op(DomainSpec::make_box(2, {1, 1, 1}), h);
    const auto base = principal_eigenpair(op);
    std::vector<double> V(op.size(), 3.25);
    const auto shifted = eigen_with_potential(op, &V);
    CHECK(shifted.lambda == doctest::Approx(base.lambda - 3.25).epsilon(1e-7));
}

TEST_CASE("calibration drives the top eigenvalue to zero") {
    const double h = 1.0 / 16;
    const auto op = make_op(DomainSpec::make_box(2, {1, 1, 1}), h);

    SUBCASE("constant template calibrates to lambda1") {
        const auto V0 = constant_field(op.mask, 1.0, "1/length^2");
        const auto cal = calibrate_potential(op, V0, 1e-6);
        CHECK(cal.s == doctest::Approx(cal.lambda1).epsilon(1e-5));
        CHECK(std::abs(cal.mu) <= 1e-6 * cal.lambda1 * 1.01);
        CHECK(cal.eigensolves > 0);
    }

    SUBCASE("half-domain template needs a larger multiplier") {
        ScalarField V0;
        V0.mask = op.mask;
        V0.unit = "1/length^2";
        V0.v.resize(op.size());
        const auto& m = *op.mask;
        for (std::size_t i = 0; i < m.cells.size(); ++i)
            V0.v[i] = m.center_of(m.cells[i])[0] >= 0.5 ? 1.0 : 0.0;
        const auto cal = calibrate_potential(op, V0, 1e-6);
        CHECK(cal.s > cal.lambda1);
        CHECK(std::abs(cal.mu) <= 1e-6 * cal.lambda1 * 1.01);
    }

    SUBCASE("zero template is rejected") {
        const auto V0 = constant_field(op.mask, 0.0, "1/length^2");
        CHECK_THROWS(calibrate_potential(op, V0));
    }
}

TEST_CASE("argmax_abs semantics") {
    auto mask = build_domain(DomainSpec::make_box(2, {1, 1, 1}), 0.25);
    ScalarField f;
    f.mask = mask;
    f.v.assign(mask->cell_count(), 0.5);
    f.v[5] = -2.0;
    f.v[9] = 2.0;  // tie in |.|: the lower cell index wins
    const auto am = argmax_abs(f);
    CHECK(am.cell == mask->cells[5]);
    CHECK(am.sign == -1);
    CHECK(am.value == doctest::Approx(2.0));

    ScalarField z;
    z.mask = mask;
    z.v.assign(mask->cell_count(), 0.0);
    CHECK_THROWS(argmax_abs(z));
}

TEST_CASE("sine fixture residual shrinks at second order") {
    double prev = 0.0;
    for (int k = 0; k < 2; ++k) {
        const double h = k == 0 ? 1.0 / 16 : 1.0 / 32;
        const auto fix = sine_fixture(1, 1, h);
        const auto op = assemble_operator(identity_coefficients(fix.mask));
        std::vector<double> Lu(op.size());
        op.apply(fix.u.v, Lu);
        double worst = 0.0;
        for (std::size_t i = 0; i < Lu.size(); ++i)
            worst = std::max(worst, std::abs(Lu[i] + fix.V.v[i] * fix.u.v[i]));
        // (V - lambda_h) ||u||_inf = 2 pi^2 (pi h)^2/12 + O(h^4)
        const double predict = 2.0 * kPi * kPi * std::pow(kPi * h, 2) / 12.0;
        CHECK(worst == doctest::Approx(predict).epsilon(0.02));
        if (k == 1) CHECK(worst < 0.3 * prev);  // ~4x drop per halving
        prev = worst;
    }
}

TEST_CASE("log spike fixture is a near-kernel pair of the discrete operator") {
    const double eps = 0.125;
    const double h = 1.0 / 64;
    const auto fix = log_spike_fixture(eps, h);
    const auto op = assemble_operator(identity_coefficients(fix.mask));

    // (L + V) u should be small relative to the operator's scale on u
    std::vector<double> Lu(op.size());
    op.apply(fix.u.v, Lu);
    std::vector<double> resid(op.size());
    for (std::size_t i = 0; i < Lu.size(); ++i) resid[i] = Lu[i] + fix.V.v[i] * fix.u.v[i];
    const double rn = std::sqrt(det_dot(resid, resid) / det_dot(fix.u.v, fix.u.v));
    // the dominant defect is the O(h) boundary staircase of the disk
    CHECK(rn <= 20.0);

    // The discrete ground state of L+V sits near eigenvalue 0.  The deviation
    // is the circle's rasterization error: O(h) with an oscillating constant
    // (measured shifts relative to lambda1: 1.3% at h=1/48, 5.5% at 1/64,
    // 1.4% at 1/96, 1.5% at 1/128), so assert the measured 8% envelope at two
    // resolutions rather than a monotone-in-h bound.
    EigenOpts eig;
    eig.abs_floor = 1e-6;
    const auto pair = eigen_with_potential(op, &fix.V.v, eig);
    const auto base = principal_eigenpair(op);
    CHECK(std::abs(pair.lambda) <= 0.08 * base.lambda);
    {
        const auto fix96 = log_spike_fixture(eps, 1.0 / 96);
        const auto op96 = assemble_operator(identity_coefficients(fix96.mask));
        const auto pair96 = eigen_with_potential(op96, &fix96.V.v, eig);
        const auto base96 = principal_eigenpair(op96);
        CHECK(std::abs(pair96.lambda) <= 0.08 * base96.lambda);
    }

    CHECK_THROWS(log_spike_fixture(0.125, 0.05));  // eps < 4h unresolved
}

TEST_CASE("spike radial diagnostics match closed forms") {
    for (int k : {2, 4, 6}) {
        const double eps = std::exp(-static_cast<double>(k));
        const double L = static_cast<double>(k);
        const double closed = 4.0 * kPi * std::log(1.0 + 1.0 / (2.0 * L));
        CHECK(spike_l1_norm(eps) == doctest::Approx(closed).epsilon(1e-9));
    }
    // independent quadrature oracles
    CHECK(spike_abslog_convolution(std::exp(-2.0)) ==
          doctest::Approx(6.933984953639436).epsilon(1e-8));
    CHECK(spike_abslog_convolution(std::exp(-5.0)) ==
          doctest::Approx(6.573248670519469).epsilon(1e-8));
    // full log kernel = log(d^2) * L1 + 2 * abs-log convolution
    const double eps = std::exp(-3.0);
    const double d = 2.0;
    const double expect =
        std::log(d * d) * spike_l1_norm(eps) + 2.0 * spike_abslog_convolution(eps);
    CHECK(spike_log_kernel_at_center(eps, d) == doctest::Approx(expect).epsilon(1e-9));
}
