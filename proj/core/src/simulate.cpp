#include "superres/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "superres/errors.hpp"
#include "superres/optim.hpp"
#include "superres/quantum.hpp"

namespace superres {

namespace {

constexpr double kQClamp = 1e-6;
constexpr double kHuge = 1e30;

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// Transform between unconstrained coordinates and (s0, s, q): s0 free,
// s = s_max * logistic, q mapped into [kQClamp, 1 - kQClamp].
struct BoxTransform {
    double s_max;

    Eigen::Vector3d to_u(const SourceParams& t) const {
        const double s_frac = std::clamp(t.s / s_max, 1e-4, 1.0 - 1e-4);
        const double q = std::clamp(t.q, 2.0 * kQClamp, 1.0 - 2.0 * kQClamp);
        return {t.s0, logit(s_frac), logit((q - kQClamp) / (1.0 - 2.0 * kQClamp))};
    }

    SourceParams to_theta(const Eigen::Vector3d& u) const {
        return SourceParams(u(0), s_max * logistic(u(1)),
                            kQClamp + (1.0 - 2.0 * kQClamp) * logistic(u(2)));
    }
};

template <class Probs>
double negative_log_likelihood(const Probs& p, const double* weights, int k, double total) {
    double acc = 0.0;
    for (int j = 0; j < k; ++j) {
        if (weights[j] <= 0.0) continue;
        if (p(j) < 1e-300) return kHuge;
        acc -= weights[j] * std::log(p(j));
    }
    return acc / total;
}

std::vector<std::uint64_t> multinomial(const Eigen::VectorXd& p, std::uint64_t n,
                                       SplitMix64& rng) {
    const int k = static_cast<int>(p.size());
    std::vector<double> cdf(k);
    double acc = 0.0;
    for (int j = 0; j < k; ++j) {
        acc += std::max(0.0, p(j));
        cdf[j] = acc;
    }
    std::vector<std::uint64_t> counts(k, 0);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double u = rng.uniform() * acc;
        // upper_bound skips zero-probability outcomes even when u lands
        // exactly on a cumulative boundary.
        const int j = static_cast<int>(
            std::distance(cdf.begin(), std::upper_bound(cdf.begin(), cdf.end(), u)));
        ++counts[std::min(j, k - 1)];
    }
    return counts;
}

EstimationResult maximize_multinomial(
    const std::function<Eigen::VectorXd(const SourceParams&)>& probabilities,
    const std::vector<double>& weights, const SourceParams& initial, double s_max,
    double mirror_axis, bool try_mirror) {
    const double total = std::max(1.0, std::accumulate(weights.begin(), weights.end(), 0.0));
    const BoxTransform box{s_max};
    const int k = static_cast<int>(weights.size());

    auto objective = [&](const Eigen::VectorXd& u) {
        try {
            const Eigen::VectorXd p = probabilities(box.to_theta(u));
            return negative_log_likelihood(p, weights.data(), k, total);
        } catch (const Error&) {
            return kHuge;  // outside the representable model region
        }
    };

    NelderMeadOptions options;
    options.initial_step = 0.25;
    options.tolerance = 1e-10;
    options.max_iterations = 2000;

    NelderMeadResult best = nelder_mead(objective, box.to_u(initial), options);
    int iterations = best.iterations;

    if (try_mirror) {
        // Label-swap branch: reflect about the measurement axis, swap weights.
        const SourceParams theta_best = box.to_theta(best.x);
        const SourceParams mirrored(2.0 * mirror_axis - theta_best.s0, theta_best.s,
                                    1.0 - theta_best.q);
        NelderMeadResult alt = nelder_mead(objective, box.to_u(mirrored), options);
        iterations += alt.iterations;
        const double tie_tol = 1e-10;
        if (alt.value < best.value - tie_tol) {
            best = alt;
        } else if (alt.value <= best.value + tie_tol &&
                   box.to_theta(alt.x).q < box.to_theta(best.x).q) {
            // Equivalent likelihood: canonicalize to q <= 1/2.
            best = alt;
        }
    }

    EstimationResult result{box.to_theta(best.x), -best.value * total, best.converged,
                            iterations};
    return result;
}

}  // namespace

OutcomeCounts sample_outcomes(const PovmSpec& spec, const OrthonormalBasis& basis,
                              const SourceParams& theta, std::uint64_t photons,
                              std::uint64_t seed) {
    if (photons < 1) throw DomainError("simulate: need at least one photon");
    const Eigen::Vector4d p = outcome_probabilities(spec, basis, theta);
    SplitMix64 rng(seed);
    const auto counts = multinomial(p, photons, rng);
    OutcomeCounts out;
    std::copy(counts.begin(), counts.end(), out.n.begin());
    return out;
}

EstimationResult ml_estimate_weighted(const std::array<double, 4>& weights,
                                      const PovmSpec& spec, const OrthonormalBasis& basis,
                                      const SourceParams& initial, double s_max) {
    if (weights[0] + weights[1] + weights[2] <= 0.0)
        throw DegenerateDataError(
            "simulate: no events in the informative outcomes, the likelihood "
            "does not constrain the parameters");
    if (std::abs(basis.x0() - spec.x0()) > 1e-12)
        throw UsageError("simulate: basis and measurement displacements differ");
    auto probabilities = [&](const SourceParams& t) {
        return Eigen::VectorXd(outcome_probabilities(spec, basis, t));
    };
    return maximize_multinomial(probabilities,
                                {weights.begin(), weights.end()}, initial, s_max,
                                spec.x0(), true);
}

EstimationResult ml_estimate(const OutcomeCounts& counts, const PovmSpec& spec,
                             const OrthonormalBasis& basis, const SourceParams& initial,
                             double s_max) {
    std::array<double, 4> w;
    for (int j = 0; j < 4; ++j) w[j] = static_cast<double>(counts.n[j]);
    return ml_estimate_weighted(w, spec, basis, initial, s_max);
}

CrlbSummary crlb_experiment(const SourceParams& theta, const PovmSpec& spec,
                            const OrthonormalBasis& basis, std::uint64_t photons,
                            int replications, std::uint64_t seed) {
    if (replications < 100)
        throw DomainError("simulate: need at least 100 replications for variance estimates");

    CrlbSummary summary{theta};
    summary.n_photons = photons;
    summary.replications = replications;
    summary.seed = seed;

    std::vector<Eigen::Vector3d> estimates;
    estimates.reserve(replications);
    for (int r = 0; r < replications; ++r) {
        try {
            SplitMix64 rng = SplitMix64::substream(seed, static_cast<std::uint64_t>(r));
            const Eigen::Vector4d p = outcome_probabilities(spec, basis, theta);
            const auto counts_vec = multinomial(p, photons, rng);
            OutcomeCounts counts;
            std::copy(counts_vec.begin(), counts_vec.end(), counts.n.begin());
            const EstimationResult est = ml_estimate(counts, spec, basis, theta);
            estimates.emplace_back(est.theta_hat.s0, est.theta_hat.s, est.theta_hat.q);
        } catch (const Error&) {
            ++summary.failures;
        }
    }
    if (estimates.size() < 2)
        throw DegenerateDataError("simulate: too few successful replications");

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& e : estimates) mean += e;
    mean /= static_cast<double>(estimates.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& e : estimates) cov += (e - mean) * (e - mean).transpose();
    cov /= static_cast<double>(estimates.size() - 1);

    summary.estimator_mean = mean;
    summary.covariance = cov;
    const double n = static_cast<double>(photons);
    summary.crlb_classical = classical_fim(spec, basis, theta).matrix().inverse() / n;
    summary.crlb_quantum = qfim_closed(basis.psf(), theta).matrix().inverse() / n;
    return summary;
}

BinnedImagingModel::BinnedImagingModel(const PsfModel& psf) : psf_(psf) {
    const double sg = psf.sigma();
    const double width = 0.1 * sg;
    const int bins = 120;
    edges_.resize(bins + 1);
    for (int i = 0; i <= bins; ++i) edges_[i] = -6.0 * sg + i * width;
    // 4-point Gauss-Legendre on [-1, 1] for the per-bin intensity integral.
    const double a = 0.3399810435848562648, b = 0.8611363115940525752;
    const double wa = 0.6521451548625461426, wb = 0.3478548451374538574;
    gl_nodes_ = {-b, -a, a, b};
    gl_weights_ = {wb, wa, wa, wb};
}

Eigen::VectorXd BinnedImagingModel::probabilities(const SourceParams& theta) const {
    const double xp = theta.s0 + 0.5 * theta.s;
    const double xm = theta.s0 - 0.5 * theta.s;
    const int bins = static_cast<int>(edges_.size()) - 1;
    Eigen::VectorXd p(bins + 1);
    double inside = 0.0;
    for (int i = 0; i < bins; ++i) {
        const double lo = edges_[i], hi = edges_[i + 1];
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double acc = 0.0;
        for (std::size_t k = 0; k < gl_nodes_.size(); ++k) {
            const double x = mid + half * gl_nodes_[k];
            const double up = psf_(x - xp), um = psf_(x - xm);
            acc += gl_weights_[k] * (theta.q * up * up + (1.0 - theta.q) * um * um);
        }
        p(i) = half * acc;
        inside += p(i);
    }
    p(bins) = std::max(0.0, 1.0 - inside);
    return p;
}

std::vector<std::uint64_t> BinnedImagingModel::sample(const SourceParams& theta,
                                                      std::uint64_t photons,
                                                      SplitMix64& rng) const {
    return multinomial(probabilities(theta), photons, rng);
}

double BinnedImagingModel::weighted_mean(const std::vector<std::uint64_t>& counts) const {
    const int bins = static_cast<int>(edges_.size()) - 1;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < bins; ++i) {
        const double center = 0.5 * (edges_[i] + edges_[i + 1]);
        num += center * static_cast<double>(counts[i]);
        den += static_cast<double>(counts[i]);
    }
    if (den == 0.0) throw DegenerateDataError("simulate: no photons inside the imaging support");
    return num / den;
}

EstimationResult BinnedImagingModel::ml_estimate(const std::vector<std::uint64_t>& counts,
                                                 const SourceParams& initial,
                                                 double s_max) const {
    if (counts.size() != static_cast<std::size_t>(outcomes()))
        throw UsageError("simulate: count vector does not match the bin layout");
    std::vector<double> w(counts.size());
    double inside = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        w[i] = static_cast<double>(counts[i]);
        if (i + 1 < counts.size()) inside += w[i];
    }
    if (inside <= 0.0)
        throw DegenerateDataError("simulate: no photons inside the imaging support");
    auto probabilities_fn = [&](const SourceParams& t) { return probabilities(t); };
    return maximize_multinomial(probabilities_fn, w, initial, s_max, initial.s0, false);
}

AdaptiveResult adaptive_two_stage(const AdaptiveSchedule& schedule, const PsfModel& psf,
                                  const SourceParams& theta_true, std::uint64_t seed) {
    if (schedule.total_photons < 2)
        throw DomainError("simulate: adaptive schedule needs at least 2 photons");
    if (!(schedule.first_stage_fraction > 0.0 && schedule.first_stage_fraction < 1.0))
        throw DomainError("simulate: first-stage fraction must lie in (0, 1)");
    const auto n1 = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(
               std::llround(schedule.first_stage_fraction *
                            static_cast<double>(schedule.total_photons))));
    const std::uint64_t n2 = schedule.total_photons - n1;
    if (n2 < 1) throw DomainError("simulate: both stages need at least one photon");

    AdaptiveResult result;
    result.stage1_photons = n1;
    result.stage2_photons = n2;

    // Stage 1: pixelated direct imaging, ML for (s0, s, q).
    const BinnedImagingModel imaging(psf);
    SplitMix64 stage1_rng = SplitMix64::substream(seed, 0);
    const auto counts1 = imaging.sample(theta_true, n1, stage1_rng);

    // Moment-based initial point: mean locates the weighted centroid; the
    // excess variance over the PSF width sets the separation scale.
    const double mean = imaging.weighted_mean(counts1);
    double m2 = 0.0, total_inside = 0.0;
    for (std::size_t i = 0; i + 1 < counts1.size(); ++i) {
        const double c = -6.0 * psf.sigma() + (i + 0.5) * 0.1 * psf.sigma();
        m2 += static_cast<double>(counts1[i]) * (c - mean) * (c - mean);
        total_inside += static_cast<double>(counts1[i]);
    }
    m2 = total_inside > 0.0 ? m2 / total_inside : psf.sigma() * psf.sigma();
    const double q0 = 0.4;
    const double excess = std::max(m2 - psf.sigma() * psf.sigma(), 1e-6);
    const double s_init = std::min(std::sqrt(excess / (q0 * (1.0 - q0))), 0.9 * schedule.s_max);
    const SourceParams init1(mean - (q0 - 0.5) * s_init, s_init, q0);

    bool fallback = false;
    EstimationResult est1{init1, 0.0, false, 0};
    try {
        est1 = imaging.ml_estimate(counts1, init1, schedule.s_max);
        if (!est1.converged) fallback = true;
    } catch (const Error&) {
        fallback = true;
    }
    result.stage1 = est1;
    result.fallback_used = fallback;
    result.x0_opt_estimate = fallback
                                 ? imaging.weighted_mean(counts1)
                                 : optimal_displacement(est1.theta_hat);

    // Stage 2: optimal family displaced to the stage-1 estimate.
    const OrthonormalBasis basis =
        OrthonormalBasis::build(psf, result.x0_opt_estimate, schedule.basis_dim);
    const PovmSpec spec = PovmSpec::phi_family(schedule.phi, result.x0_opt_estimate);
    SplitMix64 stage2_rng = SplitMix64::substream(seed, 1);
    const Eigen::Vector4d p2 = outcome_probabilities(spec, basis, theta_true);
    const auto counts2_vec = multinomial(p2, n2, stage2_rng);
    OutcomeCounts counts2;
    std::copy(counts2_vec.begin(), counts2_vec.end(), counts2.n.begin());
    result.stage2 = ml_estimate(counts2, spec, basis,
                                fallback ? init1 : est1.theta_hat, schedule.s_max);
    return result;
}

}  // namespace superres
