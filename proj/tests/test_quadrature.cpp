#include "censadd/errors.hpp"
#include "censadd/quadrature.hpp"
#include "censadd/types.hpp"

#include <doctest.h>

#include <cmath>

using namespace censadd;

TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 exactly") {
    for (int n : {1, 2, 5, 16, 64}) {
        const Rule1D rule = gauss_legendre(n, -0.3, 1.7);
        const int degree = 2 * n - 1;
        const double exact = (std::pow(1.7, degree + 1) - std::pow(-0.3, degree + 1)) / (degree + 1);
        const double got = rule.integrate([&](double u) { return std::pow(u, degree); });
        CHECK(got == doctest::Approx(exact).epsilon(1e-12));
        CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
    }
}

TEST_CASE("midpoint and trapezoid rules") {
    const Rule1D mid = midpoint_rule(4, 0.0, 1.0);
    CHECK(mid.nodes[0] == doctest::Approx(0.125));
    CHECK(mid.weights.sum() == doctest::Approx(1.0));
    const Rule1D trap = trapezoid_rule(3, 0.0, 1.0);
    CHECK(trap.nodes[2] == doctest::Approx(1.0));
    CHECK(trap.weights[0] == doctest::Approx(0.25));
    CHECK(trap.integrate([](double u) { return u; }) == doctest::Approx(0.5));
    CHECK(parse_rule_kind(to_string(RuleKind::trapezoid)) == RuleKind::trapezoid);
    CHECK_THROWS_AS(parse_rule_kind("simpson"), InputError);
}

TEST_CASE("tensor grid orders the last axis fastest and multiplies weights") {
    const TensorGrid g = tensor_grid({midpoint_rule(2, 0.0, 1.0), midpoint_rule(3, 0.0, 3.0)});
    REQUIRE(g.size() == 6);
    CHECK(g.points(0, 0) == doctest::Approx(0.25));
    CHECK(g.points(1, 1) == doctest::Approx(1.5));
    CHECK(g.points(3, 0) == doctest::Approx(0.75));
    CHECK(g.weights.sum() == doctest::Approx(3.0));

    const TensorGrid empty = tensor_grid(std::vector<Rule1D>{});
    CHECK(empty.size() == 1);
    CHECK(empty.weights[0] == 1.0);
}

TEST_CASE("box helpers") {
    const Box outer = Box::cube(2, 0.0, 1.0);
    const Box inner = Box::cube(2, 0.25, 0.75);
    CHECK(inner.strictly_inside(outer));
    CHECK_FALSE(outer.strictly_inside(outer));
    CHECK(inner.volume() == doctest::Approx(0.25));
    CHECK(outer.without_axis(0).dim() == 1);
    Vector p(2);
    p << 0.5, 1.0;
    CHECK(outer.contains(p));
    CHECK_FALSE(inner.contains(p));
    CHECK_THROWS_AS(Box::cube(1, 1.0, 0.0), InputError);
    CHECK(relative_change(0.0, 0.0) == 0.0);
    CHECK(relative_change(1.0, 2.0) == doctest::Approx(0.5));
}
