#pragma once

#include <cmath>
#include <span>

namespace superres {

/// Parameters of the precision-vs-displacement model
///   H(x0) = l1 s^2 / (1 + l2 (x0 - s0 + l3 s)^2 / s^2).
/// For the optimal measurement family the expansion gives l1 s^2 = A H_s^Q,
/// l2 = 1/(q(1-q)) and l3 = (1-2q)/2, so the fitted peak sits at the
/// intensity-weighted centroid.
struct LorentzianFit {
    double l1 = 0.0;       ///< amplitude scale (> 0)
    double l2 = 0.0;       ///< inverse-width^2 scale (> 0)
    double l3 = 0.0;       ///< center offset as a fraction of s
    double residual = 0.0; ///< rms misfit over the samples
    int iterations = 0;
    bool converged = false;

    double peak_x0(double s0, double s) const { return s0 - l3 * s; }
    double half_width(double s) const { return s / std::sqrt(l2); }
};

/// Least-squares fit of the Lorentzian model to (x0, H_s) samples at known
/// s0 and s. Initialized from the sampled peak location, height and
/// half-width, then refined by a bounded simplex search (positivity of l1,
/// l2 enforced through log coordinates).
///
/// Requires at least 7 samples with the peak bracketed (DomainError
/// otherwise); throws FitFailureError with diagnostics if the refinement
/// fails to converge within 500 iterations.
LorentzianFit fit_lorentzian(std::span<const double> x0, std::span<const double> h_s,
                             double s0, double s);

}  // namespace superres
