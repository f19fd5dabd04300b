#pragma once

#include <Eigen/Dense>
#include <functional>

namespace superres {

struct NelderMeadOptions {
    int max_iterations = 2000;
    double tolerance = 1e-10;        ///< relative simplex size at convergence
    double initial_step = 0.1;       ///< per-coordinate simplex extent
    bool restart_once = true;        ///< re-expand the simplex at the optimum
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimization (Nelder-Mead, standard coefficients).
/// Deterministic for identical inputs. Box constraints are handled by the
/// caller through coordinate transforms.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start,
                             const NelderMeadOptions& options = {});

}  // namespace superres
