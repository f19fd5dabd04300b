#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <numbers>
#include <vector>

#include "superres/basis.hpp"
#include "superres/params.hpp"
#include "superres/povm.hpp"
#include "superres/rng.hpp"

namespace superres {

/// Photon counts for the four measurement outcomes.
struct OutcomeCounts {
    std::array<std::uint64_t, 4> n{};
    std::uint64_t total() const { return n[0] + n[1] + n[2] + n[3]; }
};

/// Multinomial draw of `photons` detection events from the outcome
/// probabilities at theta. Identical (inputs, seed) give identical counts on
/// every platform (SplitMix64 uniforms + inverse-CDF search).
OutcomeCounts sample_outcomes(const PovmSpec& spec, const OrthonormalBasis& basis,
                              const SourceParams& theta, std::uint64_t photons,
                              std::uint64_t seed);

struct EstimationResult {
    SourceParams theta_hat;
    double log_likelihood = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Maximum-likelihood estimate of theta from outcome counts: bounded simplex
/// search on transformed coordinates (q mapped into (1e-6, 1-1e-6), s into
/// [0, s_max]). A mirrored restart (s0 reflected about the measurement axis,
/// q -> 1-q) resolves the label-swap ambiguity; when both branches tie in
/// likelihood the q <= 1/2 branch is reported.
///
/// Throws DegenerateDataError when no photon landed in outcomes 0..2.
EstimationResult ml_estimate(const OutcomeCounts& counts, const PovmSpec& spec,
                             const OrthonormalBasis& basis, const SourceParams& initial,
                             double s_max = 2.0);

/// Same estimator on fractional outcome weights (e.g. expected counts N p_j).
EstimationResult ml_estimate_weighted(const std::array<double, 4>& weights,
                                      const PovmSpec& spec, const OrthonormalBasis& basis,
                                      const SourceParams& initial, double s_max = 2.0);

/// Monte Carlo Cramer-Rao experiment: R independent sample + estimate cycles.
struct CrlbSummary {
    SourceParams theta_true;
    std::uint64_t n_photons = 0;
    int replications = 0;
    std::uint64_t seed = 0;
    int failures = 0;
    Eigen::Vector3d estimator_mean = Eigen::Vector3d::Zero();
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d crlb_classical = Eigen::Matrix3d::Zero();  ///< F^-1 / N
    Eigen::Matrix3d crlb_quantum = Eigen::Matrix3d::Zero();    ///< Q^-1 / N
};

CrlbSummary crlb_experiment(const SourceParams& theta, const PovmSpec& spec,
                            const OrthonormalBasis& basis, std::uint64_t photons,
                            int replications, std::uint64_t seed);

/// Finite-outcome model of pixelated direct imaging: intensity integrated
/// over bins of width sigma/10 covering [-6 sigma, 6 sigma], plus one lumped
/// outside-support outcome so the multinomial is proper.
class BinnedImagingModel {
public:
    explicit BinnedImagingModel(const PsfModel& psf);

    int outcomes() const { return static_cast<int>(edges_.size()) + 1; }
    /// Outcome probabilities at theta; the last entry is the outside bin.
    Eigen::VectorXd probabilities(const SourceParams& theta) const;
    std::vector<std::uint64_t> sample(const SourceParams& theta, std::uint64_t photons,
                                      SplitMix64& rng) const;
    EstimationResult ml_estimate(const std::vector<std::uint64_t>& counts,
                                 const SourceParams& initial, double s_max = 2.0) const;
    /// Intensity-weighted mean position of the counts (the fallback estimate
    /// of the optimal displacement).
    double weighted_mean(const std::vector<std::uint64_t>& counts) const;

private:
    PsfModel psf_;
    std::vector<double> edges_;  // bin boundaries, edges_[i]..edges_[i+1]
    std::vector<double> gl_nodes_, gl_weights_;  // per-bin fixed rule
};

/// Two-stage adaptive measurement: a direct-imaging stage estimates the
/// optimal displacement, then the phi-family measurement built there spends
/// the remaining photons.
struct AdaptiveSchedule {
    std::uint64_t total_photons = 0;
    double first_stage_fraction = 0.2;  ///< in (0,1); both stages get >= 1 photon
    double phi = 9.0 * std::numbers::pi / 20.0;
    int basis_dim = 30;
    double s_max = 2.0;
};

struct AdaptiveResult {
    EstimationResult stage1;
    EstimationResult stage2;
    std::uint64_t stage1_photons = 0;
    std::uint64_t stage2_photons = 0;
    double x0_opt_estimate = 0.0;  ///< from stage 1, used to build stage 2
    bool fallback_used = false;    ///< stage 1 degenerate, weighted mean used
};

AdaptiveResult adaptive_two_stage(const AdaptiveSchedule& schedule, const PsfModel& psf,
                                  const SourceParams& theta_true, std::uint64_t seed);

}  // namespace superres
