#include "superres/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace superres {

namespace {

// Golub-Welsch for the physicists' Hermite weight exp(-t^2). Total weights
// w_i * exp(t_i^2) are assembled in log space: for large n the raw weight
// underflows while exp(t_i^2) overflows, but their product is O(1/sqrt(n)).
void hermite_nodes_total_weights(int n, std::vector<double>& t, std::vector<double>& w) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = std::sqrt(0.5 * k);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    const double log_mu0 = 0.5 * std::log(std::numbers::pi);
    t.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        t[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        w[i] = std::exp(log_mu0 + 2.0 * std::log(std::abs(v0)) + t[i] * t[i]);
    }
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void legendre_nodes_weights(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

}  // namespace

QuadratureRule QuadratureRule::gauss_hermite(int n, double center, double scale) {
    std::vector<double> t, w;
    hermite_nodes_total_weights(n, t, w);
    QuadratureRule rule;
    rule.family_ = Family::gauss_hermite;
    rule.center_ = center;
    rule.scale_ = scale;
    rule.n_ = n;
    rule.nodes_.resize(n);
    rule.weights_.resize(n);
    const double stretch = std::sqrt(2.0) * scale;
    for (int i = 0; i < n; ++i) {
        rule.nodes_[i] = center + stretch * t[i];
        rule.weights_[i] = stretch * w[i];
    }
    return rule;
}

QuadratureRule QuadratureRule::composite_legendre(double lo, double hi, int panels, int points) {
    std::vector<double> x, w;
    legendre_nodes_weights(points, x, w);
    QuadratureRule rule;
    rule.family_ = Family::composite_legendre;
    rule.lo_ = lo;
    rule.hi_ = hi;
    rule.panels_ = panels;
    rule.points_ = points;
    rule.nodes_.reserve(static_cast<std::size_t>(panels) * points);
    rule.weights_.reserve(static_cast<std::size_t>(panels) * points);
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * h;
        const double mid = a + 0.5 * h;
        for (int i = 0; i < points; ++i) {
            rule.nodes_.push_back(mid + 0.5 * h * x[i]);
            rule.weights_.push_back(0.5 * h * w[i]);
        }
    }
    return rule;
}

QuadratureRule QuadratureRule::refined() const {
    if (family_ == Family::gauss_hermite) return gauss_hermite(2 * n_, center_, scale_);
    return composite_legendre(lo_, hi_, 2 * panels_, points_);
}

}  // namespace superres
