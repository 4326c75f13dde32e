#include <doctest.h>

#include <cmath>

#include "fklab/geometry.hpp"

using namespace fklab;

TEST_CASE("unit square mask") {
    auto spec = DomainSpec::make_box(2, {1, 1, 1});
    auto mask = build_domain(spec, 0.125);
    CHECK(mask->n == 2);
    CHECK(mask->cell_count() == 64);
    CHECK(mask->volume() == doctest::Approx(1.0));
    CHECK(boundary_faces(*mask).size() == 32);

    // locate/center round trip
    for (std::int64_t id : {mask->cells.front(), mask->cells.back()}) {
        const auto x = mask->center_of(id);
        auto found = mask->locate(x);
        REQUIRE(found.has_value());
        CHECK(*found == id);
    }
}

TEST_CASE("disk mask volume converges to pi") {
    auto mask = build_domain(DomainSpec::make_ball(2, 1.0), 1.0 / 64);
    CHECK(mask->volume() == doctest::Approx(std::acos(-1.0)).epsilon(0.01));
}

TEST_CASE("3-D ball mask volume") {
    auto mask = build_domain(DomainSpec::make_ball(3, 1.0), 1.0 / 24);
    CHECK(mask->volume() == doctest::Approx(4.0 * std::acos(-1.0) / 3.0).epsilon(0.02));
}

TEST_CASE("lshape removes one quadrant") {
    auto mask = build_domain(DomainSpec::make_lshape(1.0), 1.0 / 32);
    CHECK(mask->volume() == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("snake tube has the promised inradius") {
    auto spec = DomainSpec::make_snake(6.0, 1.0);
    auto mask = build_domain(spec, 1.0 / 16);
    CHECK(mask->volume() > 5.0);  // roughly length * width
    CHECK(inradius(*mask) == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("union and difference composites") {
    auto a = DomainSpec::make_box(2, {1, 1, 1});
    auto b = DomainSpec::make_box(2, {1, 1, 1}, {2, 0, 0});  // disjoint
    DomainSpec u;
    u.kind = DomainSpec::Kind::union_;
    u.dim = 2;
    u.name = "two-squares";
    u.children = {a, b};
    auto mask = build_domain(u, 0.125);
    CHECK(mask->volume() == doctest::Approx(2.0));

    DomainSpec d;
    d.kind = DomainSpec::Kind::difference;
    d.dim = 2;
    d.name = "square-minus-disk";
    d.children = {DomainSpec::make_box(2, {1, 1, 1}),
                  DomainSpec::make_ball(2, 0.25, {0.5, 0.5, 0.0})};
    auto md = build_domain(d, 1.0 / 64);
    const double pi = std::acos(-1.0);
    CHECK(md->volume() == doctest::Approx(1.0 - pi * 0.0625).epsilon(0.01));
}

TEST_CASE("distance to boundary and inradius on the square") {
    auto mask = build_domain(DomainSpec::make_box(2, {1, 1, 1}), 1.0 / 32);
    const Vec center{0.5, 0.5, 0.0};
    CHECK(distance_to_boundary(*mask, center) == doctest::Approx(0.5).epsilon(0.04));
    CHECK(inradius(*mask) == doctest::Approx(0.5).epsilon(0.04));
    CHECK_THROWS(distance_to_boundary(*mask, Vec{5.0, 5.0, 0.0}));
}

TEST_CASE("ball intersection fraction") {
    auto mask = build_domain(DomainSpec::make_box(2, {1, 1, 1}), 1.0 / 32);
    // fully inside: exactly one
    CHECK(ball_intersection_fraction(*mask, BallSpec{{0.5, 0.5, 0.0}, 0.25}) == 1.0);
    // centered on a straight edge: half, up to the O(h) staircase
    CHECK(ball_intersection_fraction(*mask, BallSpec{{0.0, 0.5, 0.0}, 0.25}) ==
          doctest::Approx(0.5).epsilon(0.07));
    // tiny ball, a couple of cells wide, fully inside: still exactly one
    CHECK(ball_intersection_fraction(*mask, BallSpec{{0.5, 0.5, 0.0}, 0.05}) == 1.0);
}

TEST_CASE("degenerate domains are rejected") {
    CHECK_THROWS(build_domain(DomainSpec::make_box(2, {1, 1, 1}), 0.0));
    CHECK_THROWS(build_domain(DomainSpec::make_ball(2, 0.01), 0.25));  // no inside cells
}
