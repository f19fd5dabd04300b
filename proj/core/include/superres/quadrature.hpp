#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace superres {

/// Fixed quadrature rule on the real line: sum_i w_i f(x_i) ~ int f(x) dx.
///
/// Two families are provided. A Gauss-Hermite rule (transformed to absorb the
/// weight into the nodes) for integrands that decay like a Gaussian envelope,
/// and a composite Gauss-Legendre rule for integrands supported on a finite
/// interval. Rules are immutable; refined() returns the next resolution step
/// of the same family for accuracy checks.
class QuadratureRule {
public:
    /// Empty rule; integrate() of anything is zero. Assign a factory-built
    /// rule before use.
    QuadratureRule() = default;

    /// n-node Gauss-Hermite rule matched to the envelope
    /// exp(-(x-center)^2 / (2 scale^2)). Integrates poly * envelope of
    /// polynomial degree <= 2n-1 exactly and entire * envelope integrands
    /// with spectral accuracy.
    static QuadratureRule gauss_hermite(int n, double center = 0.0, double scale = 1.0);

    /// Composite Gauss-Legendre rule: `panels` equal panels on [lo, hi],
    /// `points` nodes per panel.
    static QuadratureRule composite_legendre(double lo, double hi, int panels, int points = 16);

    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }
    std::size_t size() const { return nodes_.size(); }

    template <class F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) acc += weights_[i] * f(nodes_[i]);
        return acc;
    }

    /// Same family at doubled resolution (nodes or panels).
    QuadratureRule refined() const;

private:
    enum class Family { gauss_hermite, composite_legendre };
    Family family_ = Family::gauss_hermite;
    double center_ = 0.0, scale_ = 1.0;  // gauss_hermite parameters
    double lo_ = 0.0, hi_ = 0.0;         // composite parameters
    int n_ = 0, panels_ = 0, points_ = 0;
    std::vector<double> nodes_, weights_;
};

}  // namespace superres
