#include "superres/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace superres {

namespace {

NelderMeadResult run_simplex(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, double step, int max_iterations,
                             double tol) {
    const int n = static_cast<int>(start.size());
    std::vector<Eigen::VectorXd> x(n + 1, start);
    std::vector<double> fx(n + 1);
    for (int i = 0; i < n; ++i) x[i + 1](i) += step;
    for (int i = 0; i <= n; ++i) fx[i] = f(x[i]);

    std::vector<int> order(n + 1);
    int iterations = 0;
    bool converged = false;
    for (; iterations < max_iterations; ++iterations) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
        const int best = order[0], worst = order[n], second_worst = order[n - 1];

        double diameter = 0.0;
        for (int i = 1; i <= n; ++i)
            diameter = std::max(diameter, (x[order[i]] - x[best]).cwiseAbs().maxCoeff());
        const double scale = std::max(1.0, x[best].cwiseAbs().maxCoeff());
        if (diameter <= tol * scale) {
            converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i <= n; ++i)
            if (i != worst) centroid += x[i];
        centroid /= n;

        const Eigen::VectorXd reflected = centroid + (centroid - x[worst]);
        const double f_ref = f(reflected);
        if (f_ref < fx[best]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - x[worst]);
            const double f_exp = f(expanded);
            if (f_exp < f_ref) {
                x[worst] = expanded;
                fx[worst] = f_exp;
            } else {
                x[worst] = reflected;
                fx[worst] = f_ref;
            }
        } else if (f_ref < fx[second_worst]) {
            x[worst] = reflected;
            fx[worst] = f_ref;
        } else {
            const Eigen::VectorXd contracted =
                f_ref < fx[worst] ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                                  : Eigen::VectorXd(centroid + 0.5 * (x[worst] - centroid));
            const double f_con = f(contracted);
            if (f_con < std::min(f_ref, fx[worst])) {
                x[worst] = contracted;
                fx[worst] = f_con;
            } else {
                for (int i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    x[i] = x[best] + 0.5 * (x[i] - x[best]);
                    fx[i] = f(x[i]);
                }
            }
        }
    }

    const auto best_it = std::min_element(fx.begin(), fx.end());
    NelderMeadResult result;
    result.x = x[std::distance(fx.begin(), best_it)];
    result.value = *best_it;
    result.iterations = iterations;
    result.converged = converged;
    return result;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const NelderMeadOptions& options) {
    NelderMeadResult result = run_simplex(objective, start, options.initial_step,
                                          options.max_iterations, options.tolerance);
    if (options.restart_once) {
        NelderMeadResult second =
            run_simplex(objective, result.x, 0.1 * options.initial_step,
                        options.max_iterations, options.tolerance);
        second.iterations += result.iterations;
        if (second.value <= result.value) return second;
        result.iterations = second.iterations;
    }
    return result;
}

}  // namespace superres
