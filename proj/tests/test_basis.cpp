#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "superres/basis.hpp"
#include "superres/errors.hpp"
#include "superres/serialize.hpp"

using namespace superres;

namespace {

// Hermite-Gauss mode of the sigma = 1 gaussian PSF, centered at x0:
// HG_n(x) = (2 pi)^(-1/4) 2^(-n/2) (n!)^(-1/2) H_n((x-x0)/sqrt(2)) e^(-(x-x0)^2/4).
// Positive-diagonal Gram-Schmidt fixes the gauge to (-1)^n HG_n because the
// n-th derivative function has leading coefficient of sign (-1)^n.
double hermite_gauss(int n, double x, double x0) {
    const double u = (x - x0) / std::sqrt(2.0);
    double hm1 = 0.0, h = 1.0;
    for (int k = 0; k < n; ++k) {
        const double hp1 = 2.0 * u * h - 2.0 * k * hm1;
        hm1 = h;
        h = hp1;
    }
    double log_norm = -0.25 * std::log(2.0 * std::numbers::pi) - 0.5 * n * std::log(2.0);
    for (int k = 2; k <= n; ++k) log_norm -= 0.5 * std::log(static_cast<double>(k));
    return std::exp(log_norm) * h * std::exp(-0.25 * (x - x0) * (x - x0));
}

// Closed-form overlap matrix entries for the gaussian in this gauge:
// G_km = (-1)^((m-k)/2) 2^(-m-(m-k)/2) m! / (((m-k)/2)! sqrt(k!)) for k <= m,
// k = m mod 2; zero otherwise.
double gaussian_overlap_entry(int k, int m) {
    if (k > m || (m - k) % 2 != 0) return 0.0;
    const int j = (m - k) / 2;
    double val = std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - 0.5 * std::lgamma(k + 1.0) -
                 (m + j) * std::log(2.0);
    return (j % 2 == 0 ? 1.0 : -1.0) * std::exp(val);
}

}  // namespace

TEST_CASE("gaussian basis reproduces displaced hermite-gauss modes") {
    const auto psf = PsfModel::gaussian();
    const double x0 = 0.4;
    const auto basis = OrthonormalBasis::build(psf, x0, 8);

    for (int n = 0; n < 6; ++n) {
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        for (double x : {-2.0, -0.5, 0.4, 1.1, 3.0}) {
            CHECK(basis.mode(n, x) ==
                  doctest::Approx(sign * hermite_gauss(n, x, x0)).epsilon(1e-8));
        }
    }
}

TEST_CASE("overlap matrix structure and closed-form values") {
    const auto psf = PsfModel::gaussian();
    const auto basis = OrthonormalBasis::build(psf, 0.0, 10);
    const auto& g = basis.overlap_matrix();

    CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g(0, 1) == 0.0);
    CHECK(g(1, 1) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(g(2, 2) == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-10));
    CHECK(g(0, 2) == doctest::Approx(-0.25).epsilon(1e-10));
    CHECK(g(1, 3) == doctest::Approx(-0.375).epsilon(1e-10));
    CHECK(g(0, 4) == doctest::Approx(0.1875).epsilon(1e-10));

    SUBCASE("upper triangular with positive diagonal") {
        for (int n = 0; n < basis.dim(); ++n) {
            CHECK(g(n, n) > 0.0);
            for (int m = 0; m < n; ++m) CHECK(g(n, m) == 0.0);
        }
    }
    SUBCASE("odd-even entries vanish for real psfs") {
        for (int n = 0; n < basis.dim(); ++n)
            for (int m = n; m < basis.dim(); ++m)
                if ((n + m) % 2 == 1) CHECK(std::abs(g(n, m)) < 1e-9);
    }
    SUBCASE("full closed form") {
        for (int n = 0; n < basis.dim(); ++n)
            for (int m = n; m < basis.dim(); ++m)
                CHECK(g(n, m) == doctest::Approx(gaussian_overlap_entry(n, m)).epsilon(1e-8));
    }
}

TEST_CASE("modes are orthonormal under an independent quadrature") {
    const auto psf = PsfModel::gaussian();
    const auto basis = OrthonormalBasis::build(psf, 0.0, 7);
    // trapezoid rule on a wide grid, nothing shared with the build path
    const int n_grid = 8001;
    const double lo = -16.0, hi = 16.0, h = (hi - lo) / (n_grid - 1);
    for (int a = 0; a < basis.dim(); ++a)
        for (int b = a; b < basis.dim(); ++b) {
            double acc = 0.0;
            for (int i = 0; i < n_grid; ++i) {
                const double x = lo + i * h;
                acc += basis.mode(a, x) * basis.mode(b, x);
            }
            acc *= h;
            CHECK(acc == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-9));
        }
}

TEST_CASE("gram-schmidt idempotence") {
    const auto psf = PsfModel::gaussian();
    const auto basis = OrthonormalBasis::build(psf, 0.0, 6);
    // Orthonormalizing the modes themselves must reproduce them: the change
    // of basis is the identity within 1e-9.
    const auto& rule = psf.rule();
    const int dim = basis.dim();
    std::vector<std::vector<double>> vecs(dim, std::vector<double>(rule.size()));
    for (int n = 0; n < dim; ++n)
        for (std::size_t i = 0; i < rule.size(); ++i)
            vecs[n][i] = basis.mode(n, rule.nodes()[i]);
    auto dot = [&](const std::vector<double>& f, const std::vector<double>& g) {
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) acc += rule.weights()[i] * f[i] * g[i];
        return acc;
    };
    for (int n = 0; n < dim; ++n) {
        for (int k = 0; k < n; ++k) {
            const double r = dot(vecs[k], vecs[n]);
            CHECK(std::abs(r) < 1e-9);
            for (std::size_t i = 0; i < rule.size(); ++i) vecs[n][i] -= r * vecs[k][i];
        }
        CHECK(dot(vecs[n], vecs[n]) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("displaced state coefficients") {
    const auto psf = PsfModel::gaussian();
    const auto basis = OrthonormalBasis::build(psf, 0.0, 30);
    const auto& g = basis.overlap_matrix();

    SUBCASE("zero displacement is the fundamental mode") {
        const auto st = basis.displaced_state(0.0);
        CHECK(st.c(0) == doctest::Approx(1.0).epsilon(1e-13));
        for (int n = 1; n < basis.dim(); ++n) CHECK(st.c(n) == 0.0);
        CHECK(st.residual == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("fundamental coefficient against quadrature oracle") {
        const double a = 0.1;
        const auto st = basis.displaced_state(a);
        CHECK(st.c(0) == doctest::Approx(std::exp(-a * a / 8.0)).epsilon(1e-12));
        // independent trapezoid overlap
        double acc = 0.0;
        const int n_grid = 4001;
        const double lo = -14.0, hi = 14.0, h = (hi - lo) / (n_grid - 1);
        for (int i = 0; i < n_grid; ++i) {
            const double x = lo + i * h;
            acc += basis.mode(0, x) * psf(x - a);
        }
        CHECK(st.c(0) == doctest::Approx(acc * h).epsilon(1e-10));
    }
    SUBCASE("leading series term") {
        const double a = 1e-3;
        const auto st = basis.displaced_state(a);
        CHECK(st.c(1) == doctest::Approx(-a * g(1, 1)).epsilon(1e-5));
    }
    SUBCASE("parity in the displacement") {
        const auto plus = basis.displaced_state(0.35);
        const auto minus = basis.displaced_state(-0.35);
        for (int n = 0; n < basis.dim(); ++n) {
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            CHECK(plus.c(n) == doctest::Approx(sign * minus.c(n)).epsilon(1e-9));
        }
    }
    SUBCASE("completeness at moderate displacement") {
        const auto st = basis.displaced_state(0.5);
        CHECK(st.residual < 1e-10);
        CHECK(st.c.squaredNorm() <= 1.0 + 1e-12);
    }
    SUBCASE("truncation error advises a larger basis") {
        const auto small = OrthonormalBasis::build(psf, 0.0, 4);
        CHECK_THROWS_AS((void)small.displaced_state(1.5), TruncationError);
    }
}

TEST_CASE("displaced state derivative") {
    const auto psf = PsfModel::gaussian();
    const auto basis = OrthonormalBasis::build(psf, 0.0, 12);
    const auto& g = basis.overlap_matrix();

    SUBCASE("values at zero displacement") {
        const auto dc = basis.displaced_state_derivative(0.0);
        CHECK(dc(0) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(dc(1) == doctest::Approx(-g(1, 1)).epsilon(1e-12));
    }
    SUBCASE("matches finite differences") {
        const double a = 0.05, h = 1e-5;
        const auto dc = basis.displaced_state_derivative(a);
        const auto up = basis.displaced_state(a + h).c;
        const auto down = basis.displaced_state(a - h).c;
        for (int n = 0; n < basis.dim(); ++n)
            CHECK(dc(n) == doctest::Approx((up(n) - down(n)) / (2.0 * h)).epsilon(1e-7));
    }
}

TEST_CASE("displaced basis keeps translation covariance") {
    const auto psf = PsfModel::gaussian();
    const auto centered = OrthonormalBasis::build(psf, 0.0, 8);
    const auto shifted = OrthonormalBasis::build(psf, 0.7, 8);
    CHECK(shifted.x0() == 0.7);
    for (int n = 0; n < 8; ++n)
        CHECK(shifted.mode(n, 1.2) == doctest::Approx(centered.mode(n, 0.5)).epsilon(1e-10));
    const auto a = centered.displaced_state(0.2);
    const auto b = shifted.displaced_state(0.2);
    for (int n = 0; n < 8; ++n) CHECK(a.c(n) == doctest::Approx(b.c(n)).epsilon(1e-12));
}

TEST_CASE("build preconditions") {
    const auto psf = PsfModel::gaussian();
    CHECK_THROWS_AS(OrthonormalBasis::build(psf, 0.0, 3), DomainError);
    // tabulated psf caps the derivative order, hence the dimension
    std::vector<double> grid, vals;
    for (double x = -10.0; x <= 10.0; x += 0.01) {
        grid.push_back(x);
        vals.push_back(std::exp(-x * x / 4.0));
    }
    const auto tab = PsfModel::tabulated(grid, vals);
    CHECK_THROWS_AS(OrthonormalBasis::build(tab, 0.0, 12), CapabilityError);
}

TEST_CASE("rank deficiency is detected and names the order") {
    const auto psf = PsfModel::gaussian();
    try {
        const auto basis = OrthonormalBasis::build(psf, 0.0, 64);
        FAIL("expected rank deficiency for a 64-dimensional gaussian basis");
    } catch (const RankDeficiencyError& err) {
        CHECK(err.offending_order > 40);
    }
}

TEST_CASE("tabulated basis works at low dimension") {
    std::vector<double> grid, vals;
    for (double x = -12.0; x <= 12.0; x += 0.005) {
        grid.push_back(x);
        vals.push_back(std::exp(-x * x / 4.0));
    }
    const auto tab = PsfModel::tabulated(grid, vals);
    const auto basis = OrthonormalBasis::build(tab, 0.0, 4);
    const auto& g = basis.overlap_matrix();
    CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(g(1, 1) == doctest::Approx(0.5).epsilon(1e-5));
    const auto st = basis.displaced_state(0.05);
    CHECK(st.c(0) == doctest::Approx(std::exp(-0.05 * 0.05 / 8.0)).epsilon(1e-7));
}

TEST_CASE("basis serialization round trip validates the cache") {
    const auto psf = PsfModel::gaussian(1.0, 64);
    const auto basis = OrthonormalBasis::build(psf, 0.25, 6);
    const Json doc = to_json(basis);
    const auto restored = basis_from_json(doc);
    CHECK(restored.dim() == basis.dim());
    CHECK(restored.x0() == basis.x0());
    CHECK((restored.overlap_matrix() - basis.overlap_matrix()).norm() < 1e-12);

    Json corrupted = doc;
    corrupted["overlap_matrix"][1][1] = 0.75;
    CHECK_THROWS_AS((void)basis_from_json(corrupted), AccuracyError);
}
