#include <doctest.h>

#include <cmath>
#include <random>

#include "fklab/lorentz.hpp"

using namespace fklab;

TEST_CASE("two-atom hand computation, p = 3/2") {
    // values {2, 1}, unit atoms; decreasing rearrangement f* = 2 on [0,1), 1 on [1,2)
    const std::vector<double> vals{2.0, 1.0};
    const double p = 1.5;

    // q = 1: sum over s-layers: mu>=2 on s in (1,2] has mass 1, mu>=1 has mass 2
    //   integral = 1 * (2 - 1) * 1^{2/3} ... careful: int mu{>s}^{2/3} ds
    //   s in [0,1): mu = 2 -> 2^{2/3}; s in [1,2): mu = 1 -> 1. Total 2^{2/3} + 1.
    CHECK(lorentz_norm(vals, 1.0, p, 1.0) ==
          doctest::Approx(std::pow(2.0, 2.0 / 3.0) + 1.0).epsilon(1e-14));

    // q = inf: max over s of s * mu^{2/3}: at s -> 1^- gives 1 * 2^{2/3} = 1.587,
    // at s -> 2^- gives 2 * 1 = 2.  sup = 2.
    CHECK(lorentz_norm(vals, 1.0, p, std::numeric_limits<double>::infinity()) ==
          doctest::Approx(2.0).epsilon(1e-14));

    // q = p: plain L^{3/2}: (2^{3/2} + 1)^{2/3}
    CHECK(lorentz_norm(vals, 1.0, p, p) ==
          doctest::Approx(std::pow(std::pow(2.0, 1.5) + 1.0, 2.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("homogeneity in value and in atom size") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uni(0.0, 3.0);
    std::vector<double> vals(200);
    for (double& v : vals) v = uni(rng);

    for (double q : {1.0, 1.5, std::numeric_limits<double>::infinity()}) {
        const double base = lorentz_norm(vals, 0.01, 1.5, q);
        std::vector<double> scaled = vals;
        for (double& v : scaled) v *= 7.0;
        CHECK(lorentz_norm(scaled, 0.01, 1.5, q) ==
              doctest::Approx(7.0 * base).epsilon(1e-12));
        // atom s -> norm scales by s^{1/p} = s^{2/3}
        CHECK(lorentz_norm(vals, 0.04, 1.5, q) ==
              doctest::Approx(std::pow(4.0, 2.0 / 3.0) * base).epsilon(1e-12));
    }
}

TEST_CASE("distribution function of a small sample") {
    const auto df = distribution_function({3.0, 1.0, 3.0, 0.0, 2.0}, 0.5);
    REQUIRE(df.value.size() == 3);
    CHECK(df.value[0] == 3.0);
    CHECK(df.measure[0] == doctest::Approx(1.0));   // two atoms of 0.5 at value 3
    CHECK(df.value[2] == 1.0);
    CHECK(df.measure[2] == doctest::Approx(2.0));   // all four positive atoms
    CHECK(df.eval(0.0) == doctest::Approx(2.0));
    CHECK(df.eval(2.5) == doctest::Approx(1.0));
    CHECK(df.eval(3.0) == 0.0);  // strict inequality at the top value
}

TEST_CASE("region restriction counts ball cells") {
    auto mask = build_domain(DomainSpec::make_box(2, {1, 1, 1}), 0.25);
    ScalarField f = constant_field(mask, 2.0, "1/length^2");

    Region whole{mask, std::nullopt};
    CHECK(region_values(f, whole).size() == mask->cell_count());

    Region corner{mask, BallSpec{{0.125, 0.125, 0.0}, 0.01}};
    const auto one = region_values(f, corner);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == 2.0);

    // norm over a single cell: v * atom^{1/p}
    const double atom = 0.25 * 0.25;
    CHECK(lorentz_norm(f, corner, 1.5, 1.0) ==
          doctest::Approx(2.0 * std::pow(atom, 2.0 / 3.0)).epsilon(1e-13));
}

TEST_CASE("refined Holder ratio") {
    auto mask = build_domain(DomainSpec::make_box(3, {1, 1, 1}), 1.0 / 8);

    SUBCASE("matched indicators saturate to exactly one") {
        ScalarField f;
        f.mask = mask;
        f.unit = "1/length^2";
        f.v.resize(mask->cell_count());
        for (std::size_t i = 0; i < f.v.size(); ++i)
            f.v[i] = mask->center_of(mask->cells[i])[2] < 0.5 ? 1.0 : 0.0;
        CHECK(oneil_ratio(f, f) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("random fields stay below the pairing constant") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int trial = 0; trial < 10; ++trial) {
            ScalarField f, g;
            f.mask = g.mask = mask;
            f.unit = g.unit = "1/length^2";
            f.v.resize(mask->cell_count());
            g.v.resize(mask->cell_count());
            for (std::size_t i = 0; i < f.v.size(); ++i) {
                f.v[i] = uni(rng);
                g.v[i] = std::pow(uni(rng), 3.0);
            }
            const double r = oneil_ratio(f, g);
            CHECK(r > 0.0);
            CHECK(r <= 1.5);  // p * ||f||_{p,1} ||g||_{p',inf} with p = 3/2
        }
    }

    SUBCASE("zero field is rejected") {
        ScalarField f = constant_field(mask, 1.0, "1/length^2");
        ScalarField z = constant_field(mask, 0.0, "1/length^2");
        CHECK_THROWS(oneil_ratio(f, z));
    }

    SUBCASE("two dimensions are rejected") {
        auto m2 = build_domain(DomainSpec::make_box(2, {1, 1, 1}), 0.25);
        ScalarField f = constant_field(m2, 1.0, "1/length^2");
        CHECK_THROWS(oneil_ratio(f, f));
    }
}

TEST_CASE("degenerate norms") {
    CHECK(lorentz_norm(std::vector<double>{}, 1.0, 1.5, 1.0) == 0.0);
    CHECK(lorentz_norm({0.0, 0.0}, 1.0, 1.5, 1.0) == 0.0);
    CHECK_THROWS(lorentz_norm({1.0}, 0.0, 1.5, 1.0));   // empty atoms
    CHECK_THROWS(lorentz_norm({1.0}, 1.0, 0.0, 1.0));   // p must be positive
    CHECK_THROWS(lorentz_norm({1.0}, 1.0, 1.5, 2.0));   // q outside {1, p, inf}
}
