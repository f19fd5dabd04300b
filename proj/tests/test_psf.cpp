#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <vector>

#include "superres/errors.hpp"
#include "superres/psf.hpp"

using namespace superres;

namespace {

// Independent oracle: normalize exp(-x^2/4) by quadrature.
double peak_amplitude_oracle() {
    const auto rule = QuadratureRule::gauss_hermite(200);
    const double norm2 = rule.integrate([](double x) { return std::exp(-0.5 * x * x); });
    return 1.0 / std::sqrt(norm2);
}

// Richardson-extrapolated second difference of the order-0 values.
double second_derivative_oracle(const PsfModel& psf, double x) {
    auto d2 = [&](double h) { return (psf(x + h) - 2.0 * psf(x) + psf(x - h)) / (h * h); };
    const double h = 1e-4;
    return (4.0 * d2(0.5 * h) - d2(h)) / 3.0;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
    return out;
}

}  // namespace

TEST_CASE("gaussian psf evaluation and derivatives") {
    const auto psf = PsfModel::gaussian();

    CHECK(psf(0.0) == doctest::Approx(peak_amplitude_oracle()).epsilon(1e-12));
    CHECK(psf(0.0) == doctest::Approx(std::pow(2.0 * std::numbers::pi, -0.25)).epsilon(1e-14));
    CHECK(psf.derivative(1, 0.0) == 0.0);
    CHECK(psf.derivative(2, 0.0) ==
          doctest::Approx(-0.5 * std::pow(2.0 * std::numbers::pi, -0.25)).epsilon(1e-12));
    CHECK(psf.derivative(2, 0.7) == doctest::Approx(second_derivative_oracle(psf, 0.7)).epsilon(1e-7));

    std::vector<double> all(8);
    psf.derivatives_up_to(7, 0.37, all);
    for (int n = 0; n < 8; ++n) CHECK(all[n] == doctest::Approx(psf.derivative(n, 0.37)).epsilon(1e-14));

    CHECK_THROWS_AS((void)psf.derivative(200, 0.0), CapabilityError);
    CHECK_THROWS_AS((void)psf.derivative(0, std::nan("")), DomainError);
}

TEST_CASE("inner products with accuracy check") {
    const auto psf = PsfModel::gaussian();
    auto f0 = [&](double x) { return psf(x); };
    auto f1 = [&](double x) { return psf.derivative(1, x); };

    CHECK(psf.inner_product(f0, f0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(psf.inner_product(f0, f1) == doctest::Approx(0.0).epsilon(1e-13));
    auto shifted = [&](double x) { return psf(x - 1.0); };
    // analytic gaussian-overlap oracle exp(-s^2/8)
    CHECK(psf.inner_product(f0, shifted) == doctest::Approx(std::exp(-0.125)).epsilon(1e-12));
}

TEST_CASE("gaussian moments") {
    const auto psf = PsfModel::gaussian();

    SUBCASE("momentum moments") {
        const auto m = psf.moments(0.5);
        CHECK(m.p_squared == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(m.fourth_moment == doctest::Approx(0.1875).epsilon(1e-12));
        CHECK(m.var_p2() == doctest::Approx(0.125).epsilon(1e-10));
    }
    SUBCASE("zero separation") {
        const auto m = psf.moments(0.0);
        CHECK(m.w == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(m.p_imag == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(m.one_minus_w == 0.0);
    }
    SUBCASE("overlap closed forms") {
        const auto m = psf.moments(1.0);
        CHECK(m.w == doctest::Approx(std::exp(-0.125)).epsilon(1e-12));
        CHECK(m.p_imag == doctest::Approx(0.25 * std::exp(-0.125)).epsilon(1e-12));
        CHECK(m.one_minus_w == doctest::Approx(1.0 - std::exp(-0.125)).epsilon(1e-13));
    }
    SUBCASE("parity in s") {
        for (double s : {0.05, 0.4, 1.3}) {
            const auto plus = psf.moments(s);
            const auto minus = psf.moments(-s);
            CHECK(plus.w == doctest::Approx(minus.w).epsilon(1e-9));
            CHECK(plus.p_imag == doctest::Approx(-minus.p_imag).epsilon(1e-9));
        }
    }
    SUBCASE("cauchy-schwarz") {
        const auto m = psf.moments(0.2);
        CHECK(m.fourth_moment >= m.p_squared * m.p_squared);
    }
    SUBCASE("scaled width") {
        const auto wide = PsfModel::gaussian(2.0);
        const auto m = wide.moments(0.3);
        CHECK(m.p_squared == doctest::Approx(0.25 / 4.0).epsilon(1e-12));
        CHECK(m.w == doctest::Approx(std::exp(-0.09 / 32.0)).epsilon(1e-12));
    }
}

TEST_CASE("quadrature self-consistency under node doubling") {
    const auto psf = PsfModel::gaussian();
    const auto& coarse = psf.rule();
    const auto fine = coarse.refined();
    for (double s : {0.1, 1.0}) {
        auto f = [&](double x) { return psf(x) * psf(x - s); };
        const double a = coarse.integrate(f), b = fine.integrate(f);
        CHECK(std::abs(a - b) <= 1e-9 * std::abs(b) + 1e-15);
    }
}

TEST_CASE("tabulated psf matches the gaussian it samples") {
    const auto grid = linspace(-12.0, 12.0, 4801);
    std::vector<double> values(grid.size());
    const double norm = std::pow(2.0 * std::numbers::pi, -0.25);
    // deliberately unnormalized input; load must normalize
    for (std::size_t i = 0; i < grid.size(); ++i)
        values[i] = 3.0 * norm * std::exp(-grid[i] * grid[i] / 4.0);
    const auto psf = PsfModel::tabulated(grid, values);
    const auto exact = PsfModel::gaussian();

    CHECK(psf.kind() == PsfKind::tabulated);
    CHECK(psf.sigma() == doctest::Approx(1.0).epsilon(1e-6));

    SUBCASE("normalization applied on load") {
        auto f0 = [&](double x) { return psf(x); };
        CHECK(psf.inner_product(f0, f0) == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("pointwise values and low derivatives") {
        for (double x : {-1.7, -0.3, 0.0, 0.9, 2.4}) {
            CHECK(psf(x) == doctest::Approx(exact(x)).epsilon(1e-10));
            CHECK(psf.derivative(1, x) == doctest::Approx(exact.derivative(1, x)).epsilon(1e-8));
            CHECK(psf.derivative(2, x) == doctest::Approx(exact.derivative(2, x)).epsilon(1e-6));
            CHECK(psf.derivative(3, x) - exact.derivative(3, x) == doctest::Approx(0.0).epsilon(1e-5));
        }
    }
    SUBCASE("moments approximate the closed forms") {
        const auto m = psf.moments(0.5);
        CHECK(m.p_squared == doctest::Approx(0.25).epsilon(1e-7));
        CHECK(m.w == doctest::Approx(std::exp(-0.25 / 8.0)).epsilon(1e-8));
        CHECK(m.p_imag == doctest::Approx(0.125 * std::exp(-0.25 / 8.0)).epsilon(1e-6));
    }
    SUBCASE("capability bound") {
        CHECK(psf.max_derivative_order() == 8);
        CHECK_THROWS_AS((void)psf.derivative(9, 0.0), CapabilityError);
    }
}

TEST_CASE("tabulated psf input validation") {
    CHECK_THROWS_AS(PsfModel::tabulated({0.0, 1.0}, {1.0, 1.0}), DomainError);
    const auto grid = linspace(-1.0, 1.0, 32);
    auto bad = grid;
    bad[10] = bad[9];  // not strictly increasing
    std::vector<double> v(grid.size(), 1.0);
    CHECK_THROWS_AS(PsfModel::tabulated(bad, v), DomainError);
}

TEST_CASE("tabulated psf file loading") {
    const std::string path = "psf_table_test.txt";
    {
        std::ofstream out(path);
        out << "# test table\n";
        for (double x = -10.0; x <= 10.0; x += 0.01)
            out << x << " " << std::exp(-x * x / 4.0) << "\n";
    }
    const auto psf = PsfModel::tabulated_from_file(path);
    CHECK(psf(0.0) == doctest::Approx(std::pow(2.0 * std::numbers::pi, -0.25)).epsilon(1e-8));
    std::remove(path.c_str());
}
