#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "superres/quadrature.hpp"

namespace superres {

enum class PsfKind { gaussian, tabulated };

/// Scalar overlap moments of a PSF at a given source separation. These drive
/// every closed-form information expression in the library.
struct PsfMoments {
    double p_squared = 0.0;      ///< <P^2> = int Psi'(x)^2 dx        [1/length^2]
    double w = 0.0;              ///< int Psi(x) Psi(x-s) dx          [dimensionless]
    double one_minus_w = 0.0;    ///< 1 - w, evaluated cancellation-free
    double p_imag = 0.0;         ///< Im <Psi| e^{isP} P |Psi>        [1/length]
    double fourth_moment = 0.0;  ///< <P^4> = int Psi''(x)^2 dx       [1/length^4]

    double var_p2() const { return fourth_moment - p_squared * p_squared; }
    /// 1 - w^2 = (1-w)(1+w), keeps full relative accuracy at small separation.
    double one_minus_w_sq() const { return one_minus_w * (2.0 - one_minus_w); }
};

/// Real-amplitude point-spread function with its derivatives and the
/// quadrature context used for all overlap integrals.
///
/// Immutable after construction; all member calls are const and safe to use
/// concurrently. Lengths are measured in units of the PSF width, sigma = 1
/// by default.
class PsfModel {
public:
    /// Normalized Gaussian amplitude PSF, Psi(x) = (2 pi sigma^2)^(-1/4)
    /// exp(-x^2 / (4 sigma^2)). Derivatives are closed-form Hermite
    /// expressions; the quadrature rule is Gauss-Hermite with `quad_nodes`
    /// nodes matched to the Gaussian envelope.
    static PsfModel gaussian(double sigma = 1.0, int quad_nodes = 200);

    /// Tabulated amplitude PSF from samples (x strictly increasing). The
    /// amplitude is normalized to unit L2 norm on load. Evaluation uses local
    /// polynomial interpolation; derivatives use stabilized Richardson central
    /// differences, available up to `max_derivative_order`.
    static PsfModel tabulated(std::vector<double> x, std::vector<double> amplitude,
                              int max_derivative_order = 8);

    /// Load a tabulated PSF from a two-column whitespace-separated text file.
    static PsfModel tabulated_from_file(const std::string& path, int max_derivative_order = 8);

    PsfKind kind() const;
    double sigma() const;
    int max_derivative_order() const;

    /// Psi(x).
    double operator()(double x) const { return derivative(0, x); }

    /// d^order Psi / dx^order at x. Throws CapabilityError beyond the
    /// supported maximum order.
    double derivative(int order, double x) const;

    /// All derivatives 0..max_order at x in one pass (out.size() must be
    /// max_order + 1). Cheaper than repeated derivative() calls.
    void derivatives_up_to(int max_order, double x, std::span<double> out) const;

    /// Normalized table (tabulated kind only; UsageError otherwise).
    std::span<const double> table_x() const;
    std::span<const double> table_amplitude() const;

    /// The main quadrature rule of this model.
    const QuadratureRule& rule() const;

    /// The doubled-resolution rule used for accuracy checks.
    const QuadratureRule& fine_rule() const;

    /// int f(x) g(x) dx with an automatic accuracy check against the doubled
    /// rule; throws AccuracyError if the two resolutions disagree by more
    /// than 1e-10 relative (plus a tiny absolute floor).
    double inner_product(const std::function<double(double)>& f,
                         const std::function<double(double)>& g) const;

    /// Overlap moments at separation s. Accepts any finite s; w is even and
    /// p_imag odd in s for symmetric PSFs.
    PsfMoments moments(double s) const;

private:
    struct Impl;
    explicit PsfModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

}  // namespace superres
