#include <doctest.h>

#include <cmath>
#include <numbers>

#include "superres/quadrature.hpp"

using namespace superres;

TEST_CASE("gauss-hermite integrates gaussian moments exactly") {
    const auto rule = QuadratureRule::gauss_hermite(40);
    const double sqrt2pi = std::sqrt(2.0 * std::numbers::pi);

    CHECK(rule.integrate([](double x) { return std::exp(-0.5 * x * x); }) ==
          doctest::Approx(sqrt2pi).epsilon(1e-13));
    CHECK(rule.integrate([](double x) { return x * x * std::exp(-0.5 * x * x); }) ==
          doctest::Approx(sqrt2pi).epsilon(1e-13));
    CHECK(rule.integrate([](double x) { return x * std::exp(-0.5 * x * x); }) ==
          doctest::Approx(0.0).epsilon(1e-14));
    // degree 8 moment: <x^8> = 7!! = 105
    CHECK(rule.integrate([](double x) { return std::pow(x, 8) * std::exp(-0.5 * x * x); }) ==
          doctest::Approx(105.0 * sqrt2pi).epsilon(1e-12));
}

TEST_CASE("gauss-hermite handles center and scale") {
    const auto rule = QuadratureRule::gauss_hermite(60, 2.0, 0.5);
    const double val = rule.integrate(
        [](double x) { return std::exp(-0.5 * (x - 2.0) * (x - 2.0) / 0.25) * x; });
    // mean of the envelope times its mass
    CHECK(val == doctest::Approx(2.0 * std::sqrt(2.0 * std::numbers::pi) * 0.5).epsilon(1e-12));
}

TEST_CASE("large gauss-hermite rules stay finite") {
    const auto rule = QuadratureRule::gauss_hermite(400);
    for (double w : rule.weights()) CHECK(std::isfinite(w));
    const double mass = rule.integrate([](double x) { return std::exp(-0.5 * x * x); });
    CHECK(mass == doctest::Approx(std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("composite legendre on a finite interval") {
    const auto rule = QuadratureRule::composite_legendre(-1.0, 1.0, 8);
    CHECK(rule.integrate([](double x) { return x * x; }) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(rule.integrate([](double x) { return std::cos(x); }) ==
          doctest::Approx(2.0 * std::sin(1.0)).epsilon(1e-14));
}

TEST_CASE("refined rule doubles the resolution and agrees") {
    const auto rule = QuadratureRule::gauss_hermite(200);
    const auto fine = rule.refined();
    CHECK(fine.size() == 2 * rule.size());
    auto f = [](double x) { return std::exp(-0.25 * x * x) * std::exp(-0.25 * (x - 1.0) * (x - 1.0)); };
    CHECK(rule.integrate(f) == doctest::Approx(fine.integrate(f)).epsilon(1e-12));
}
