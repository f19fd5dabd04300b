#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "superres/basis.hpp"
#include "superres/fisher.hpp"
#include "superres/params.hpp"
#include "superres/psf.hpp"

namespace superres {

/// Four-outcome measurement: three rank-one projectors |pi_j><pi_j| spanned
/// by the first four basis modes, completed by Pi_3 = 1 - sum_j Pi_j.
///
/// The coefficient matrix C has rows |pi_0|, |pi_1|, |pi_2| over
/// {Phi_0..Phi_3}. For superresolution to survive, two rows must have zero
/// Phi_0 overlap and nonzero Phi_1 overlap, and the third must overlap both
/// (validated by validate_povm).
class PovmSpec {
public:
    using Coefficients = Eigen::Matrix<double, 3, 4>;

    /// One-parameter family of exactly orthonormal projector triples,
    /// 0 < phi < pi/2 (strict; the entries carry sqrt(cos phi)).
    static PovmSpec phi_family(double phi, double x0);

    /// Arbitrary coefficient matrix; validate with validate_povm.
    static PovmSpec custom(const Coefficients& c, double x0);

    const Coefficients& coefficients() const { return c_; }
    double x0() const { return x0_; }
    /// Family angle, set only for phi_family-built specs.
    std::optional<double> phi() const { return phi_; }

private:
    PovmSpec(const Coefficients& c, double x0, std::optional<double> phi)
        : c_(c), x0_(x0), phi_(phi) {}
    Coefficients c_;
    double x0_;
    std::optional<double> phi_;
};

/// Structural validation report plus the measurement quality factor.
struct QualityReport {
    double quality_factor = 0.0;  ///< A in [0, 1] for condition-satisfying POVMs
    bool conditions_ok = false;   ///< the zero/nonzero overlap pattern holds
    bool completion_psd = false;  ///< Pi_3 = 1 - sum Pi_j is PSD
    bool independent = false;     ///< the three projectors are linearly independent
    bool conditioning_warning = false;   ///< a required-nonzero entry is nearly zero
    bool zero_quality_warning = false;   ///< A ~ 0, measurement useless for s
    std::array<int, 3> canonical_rows{0, 1, 2};  ///< permutation used for A
    std::vector<std::string> violations;         ///< failed clauses, empty when ok

    bool ok() const { return conditions_ok && completion_psd && independent; }
};

/// Checks the overlap-pattern conditions under row permutation, completeness
/// and independence, and computes the quality factor
/// A = (C01 C12 - C02 C11)^2 / (C01^2 + C11^2) in the canonical row order
/// (zero-Phi_0 rows first, by descending |C_j1|).
QualityReport validate_povm(const PovmSpec& spec);

/// lambda = 4 q (1-q) * A: the factor by which an aligned measurement falls
/// short of the quantum precision at small separations.
double lambda_prediction(double q, const QualityReport& report);

/// Outcome probabilities and their analytic theta-derivatives.
struct OutcomeModel {
    Eigen::Vector4d p;
    Eigen::Matrix<double, 4, 3> dp;  ///< rows: outcomes, cols: (s0, s, q)
};

/// p_j = q |<pi_j|Psi+>|^2 + (1-q) |<pi_j|Psi->|^2 for j < 3 and
/// p_3 = 1 - sum (exact for normalized states). The basis must be displaced
/// to the spec's x0 (UsageError otherwise).
Eigen::Vector4d outcome_probabilities(const PovmSpec& spec, const OrthonormalBasis& basis,
                                      const SourceParams& theta);

OutcomeModel outcome_model(const PovmSpec& spec, const OrthonormalBasis& basis,
                           const SourceParams& theta);

/// Classical Fisher information per detection event,
/// F_ab = sum_j (d_a p_j)(d_b p_j)/p_j. Outcomes with p_j and dp_j both below
/// 1e-14 contribute nothing; a vanishing p_j with a surviving derivative
/// flags the result as unbounded instead of throwing.
FisherMatrix classical_fim(const PovmSpec& spec, const OrthonormalBasis& basis,
                           const SourceParams& theta);

/// The displacement maximizing the precisions at small separation: the
/// intensity-weighted centroid s0 - (1/2) s (1 - 2q).
double optimal_displacement(const SourceParams& theta);

/// Continuous-outcome Fisher matrix of ideal intensity detection,
/// F_ab = int (d_a I)(d_b I)/I dx — the classical baseline.
FisherMatrix direct_imaging_fim(const PsfModel& model, const SourceParams& theta);

}  // namespace superres
