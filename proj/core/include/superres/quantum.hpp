#pragma once

#include <Eigen/Dense>
#include <array>

#include "superres/basis.hpp"
#include "superres/fisher.hpp"
#include "superres/params.hpp"
#include "superres/psf.hpp"

namespace superres {

/// Two-source state rho = q |Psi+><Psi+| + (1-q) |Psi-><Psi-| expressed in an
/// orthonormal mode basis. Real symmetric, rank 2, unit trace up to the
/// basis-truncation residual.
struct DensityMatrix {
    Eigen::MatrixXd rho;
    Eigen::VectorXd c_plus;   ///< coefficients of the source at s0 + s/2
    Eigen::VectorXd c_minus;  ///< coefficients of the source at s0 - s/2
};

DensityMatrix density_matrix(const OrthonormalBasis& basis, const SourceParams& theta);

/// d rho / d theta_alpha for alpha in (s0, s, q), assembled from the analytic
/// coefficient derivatives by the chain rule.
std::array<Eigen::MatrixXd, 3> parameter_derivatives(const OrthonormalBasis& basis,
                                                     const SourceParams& theta);

/// Symmetric logarithmic derivative: the symmetric solution L of
/// (L rho + rho L)/2 = drho, solved in rho's eigenbasis. Matrix elements
/// across eigenvalue pairs with lambda_i + lambda_j below
/// support_threshold * lambda_max are set to zero.
Eigen::MatrixXd solve_sld(const Eigen::MatrixXd& rho, const Eigen::MatrixXd& drho,
                          double support_threshold = 1e-12);

/// Quantum Fisher information matrix from the SLD route,
/// Q_ab = Tr(rho {L_a, L_b}) / 2.
FisherMatrix qfim_numeric(const OrthonormalBasis& basis, const SourceParams& theta);

/// Quantum Fisher information matrix from the closed form in the PSF overlap
/// moments (real arithmetic; the purely imaginary momentum overlap enters
/// through its imaginary part only).
FisherMatrix qfim_closed(const PsfModel& model, const SourceParams& theta);

/// Saturability residuals R_ab = Tr(rho [L_a, L_b]); all entries vanish for
/// real amplitude PSFs, so this returns floating-point noise by design.
Eigen::Matrix3d compatibility_residual(const OrthonormalBasis& basis, const SourceParams& theta);

/// Exact inversion of the closed-form qFIM, evaluated in cancellation-free
/// variables. Equivalent to qfim_closed(...).precisions() in exact
/// arithmetic, but keeps full accuracy at separations where det(Q) ~ s^4
/// falls below the matrix rounding floor (s below ~1e-2).
PrecisionTriple quantum_precisions(const PsfModel& model, const SourceParams& theta);

/// Leading small-separation quantum precisions,
///   H_s0 ~ Q^2 V s^2,  H_s ~ Q^2 V s^2 / (4(1-Q^2)),  H_q ~ V s^4 / Q^2,
/// with Q^2 = 4q(1-q) and V = Var(P^2). The expansion degenerates for
/// balanced sources; q = 1/2 throws a DomainError directing callers to the
/// exact inversion.
PrecisionTriple small_separation_approx(const PsfModel& model, const SourceParams& theta);

}  // namespace superres
