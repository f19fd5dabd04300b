#include "superres/lorentzian.hpp"

#include <algorithm>
#include <cmath>

#include "superres/errors.hpp"
#include "superres/optim.hpp"

namespace superres {

namespace {

double model_value(double l1, double l2, double l3, double x, double s0, double s) {
    const double d = (x - s0 + l3 * s) / s;
    return l1 * s * s / (1.0 + l2 * d * d);
}

}  // namespace

LorentzianFit fit_lorentzian(std::span<const double> x0, std::span<const double> h_s,
                             double s0, double s) {
    const std::size_t n = x0.size();
    if (n != h_s.size()) throw UsageError("lorentzian: sample arrays differ in length");
    if (n < 7) throw DomainError("lorentzian: need at least 7 samples");
    if (!(s > 0.0)) throw DomainError("lorentzian: separation scale must be positive");

    const std::size_t peak =
        std::distance(h_s.begin(), std::max_element(h_s.begin(), h_s.end()));
    if (peak == 0 || peak == n - 1)
        throw DomainError("lorentzian: samples do not bracket the peak");

    const double h_peak = h_s[peak];
    if (!(h_peak > 0.0)) throw DomainError("lorentzian: peak value must be positive");

    // Quadratic refinement of the peak position.
    double x_peak = x0[peak];
    {
        const double d1 = h_s[peak + 1] - h_s[peak - 1];
        const double d2 = h_s[peak + 1] - 2.0 * h_s[peak] + h_s[peak - 1];
        if (d2 < 0.0) x_peak -= 0.5 * d1 / d2 * (x0[peak + 1] - x0[peak]);
    }

    // Half-width from the first half-maximum crossings on either side.
    double half_width = 0.0;
    int crossings = 0;
    for (std::size_t i = peak; i-- > 0;) {
        if (h_s[i] < 0.5 * h_peak) {
            const double t = (0.5 * h_peak - h_s[i]) / (h_s[i + 1] - h_s[i]);
            half_width += x_peak - (x0[i] + t * (x0[i + 1] - x0[i]));
            ++crossings;
            break;
        }
    }
    for (std::size_t i = peak + 1; i < n; ++i) {
        if (h_s[i] < 0.5 * h_peak) {
            const double t = (0.5 * h_peak - h_s[i - 1]) / (h_s[i] - h_s[i - 1]);
            half_width += x0[i - 1] + t * (x0[i] - x0[i - 1]) - x_peak;
            ++crossings;
            break;
        }
    }
    half_width = crossings > 0 ? half_width / crossings
                               : 0.25 * (x0[n - 1] - x0[0]);

    const double l1_init = h_peak / (s * s);
    const double l2_init = (s / half_width) * (s / half_width);
    const double l3_init = (s0 - x_peak) / s;

    auto objective = [&](const Eigen::VectorXd& u) {
        const double l1 = std::exp(u(0)), l2 = std::exp(u(1)), l3 = u(2);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = model_value(l1, l2, l3, x0[i], s0, s) - h_s[i];
            acc += r * r;
        }
        return acc;
    };

    Eigen::VectorXd start(3);
    start << std::log(l1_init), std::log(l2_init), l3_init;
    NelderMeadOptions options;
    options.max_iterations = 500;
    options.tolerance = 1e-10;
    options.initial_step = 0.05;
    options.restart_once = false;
    const NelderMeadResult opt = nelder_mead(objective, start, options);

    LorentzianFit fit;
    fit.l1 = std::exp(opt.x(0));
    fit.l2 = std::exp(opt.x(1));
    fit.l3 = opt.x(2);
    fit.residual = std::sqrt(opt.value / static_cast<double>(n));
    fit.iterations = opt.iterations;
    fit.converged = opt.converged;
    if (!opt.converged)
        throw FitFailureError("lorentzian: refinement did not converge",
                              {fit.l1, fit.l2, fit.l3}, fit.residual, opt.iterations);
    return fit;
}

}  // namespace superres
