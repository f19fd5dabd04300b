#pragma once

#include <Eigen/Dense>
#include <memory>

#include "superres/psf.hpp"

namespace superres {

/// Exact expansion coefficients of a displaced PSF in an orthonormal basis.
struct StateCoefficients {
    double displacement = 0.0;  ///< a, so the state is Psi(x - x0 - a)
    Eigen::VectorXd c;          ///< c_n = <Phi_n | Psi(. - x0 - a)>
    double residual = 0.0;      ///< 1 - sum_n c_n^2 (weight outside the basis)
};

/// Orthonormal mode basis {Phi_n} built from the spatial derivatives of the
/// amplitude PSF by modified Gram-Schmidt, displaced to x0.
///
/// The overlap matrix G_nm = <Phi_n | Psi_m>, with Psi_m the m-th derivative
/// function, is upper triangular with positive diagonal by construction; for
/// real PSFs entries with odd n+m vanish. Immutable after build; all methods
/// are const and thread-safe.
class OrthonormalBasis {
public:
    /// Orthonormalizes {Psi_0 .. Psi_{dim-1}} with one reorthogonalization
    /// pass; derivative functions are pre-scaled by their norms first, which
    /// keeps the process stable to dim ~ 50 for the Gaussian.
    ///
    /// Throws RankDeficiencyError (naming the offending order) if a derivative
    /// is numerically dependent on the lower orders, and CapabilityError if
    /// the PSF cannot supply derivatives up to dim-1.
    static OrthonormalBasis build(const PsfModel& psf, double x0, int dim);

    int dim() const;
    double x0() const;
    const PsfModel& psf() const;

    /// Overlap matrix G (dim x dim).
    const Eigen::MatrixXd& overlap_matrix() const;

    /// Phi_n(x).
    double mode(int n, double x) const;

    /// Exact overlaps of the displaced signal Psi(. - x0 - a) against each
    /// mode (closed form for the Gaussian, quadrature otherwise). Throws
    /// TruncationError if the residual exceeds 1e-6.
    StateCoefficients displaced_state(double a) const;

    /// d c / d a. Analytic for the Gaussian; Richardson central differences
    /// with step max(1e-6, 1e-3 |a|) otherwise.
    Eigen::VectorXd displaced_state_derivative(double a) const;

private:
    struct Impl;
    explicit OrthonormalBasis(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

}  // namespace superres
