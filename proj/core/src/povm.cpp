#include "superres/povm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "superres/errors.hpp"

namespace superres {

namespace {

constexpr double kZeroTol = 1e-12;       // structural zero, relative to row norm
constexpr double kSmallEntryTol = 0.1;   // conditioning warning threshold
constexpr double kProbFloor = 1e-14;

struct Amplitudes {
    Eigen::Vector3d plus, minus;    // <pi_j | Psi_pm>
    Eigen::Vector3d dplus, dminus;  // d/da of the above
};

Amplitudes project_states(const PovmSpec& spec, const OrthonormalBasis& basis,
                          const SourceParams& theta, bool with_derivatives) {
    if (std::abs(basis.x0() - spec.x0()) > 1e-12)
        throw UsageError("povm: basis displacement does not match the measurement displacement");
    const double a_plus = theta.s0 + 0.5 * theta.s - spec.x0();
    const double a_minus = theta.s0 - 0.5 * theta.s - spec.x0();
    Amplitudes amp;
    const Eigen::Matrix<double, 3, 4>& c = spec.coefficients();
    amp.plus = c * basis.displaced_state(a_plus).c.head<4>();
    amp.minus = c * basis.displaced_state(a_minus).c.head<4>();
    if (with_derivatives) {
        amp.dplus = c * basis.displaced_state_derivative(a_plus).head<4>();
        amp.dminus = c * basis.displaced_state_derivative(a_minus).head<4>();
    }
    return amp;
}

}  // namespace

PovmSpec PovmSpec::phi_family(double phi, double x0) {
    if (!(phi > 0.0 && phi < 0.5 * std::numbers::pi))
        throw DomainError("povm: family angle must lie strictly inside (0, pi/2)");
    const double c = std::cos(phi);
    const double s_half = std::sin(0.5 * phi);
    const double c_half = std::cos(0.5 * phi);
    const double r1 = std::sqrt(1.0 + c);
    const double r3 = std::sqrt(1.0 + 3.0 * c);

    Coefficients m;
    m.row(0) << 0.0, s_half / r1, c_half / r1, -std::sqrt(c) / r1;
    m.row(1) << 0.0, s_half / r1, -c_half / r1, -std::sqrt(c) / r1;
    m.row(2) << std::sqrt(2.0 * c) / r3, std::sqrt(2.0 * c) / r3, 0.0, std::sqrt(1.0 - c) / r3;

    for (int j = 0; j < 3; ++j)
        for (int k = j; k < 3; ++k) {
            const double dot = m.row(j).dot(m.row(k));
            if (std::abs(dot - (j == k ? 1.0 : 0.0)) > 1e-12)
                throw AccuracyError("povm: family rows failed the orthonormality check");
        }
    return PovmSpec(m, x0, phi);
}

PovmSpec PovmSpec::custom(const Coefficients& c, double x0) {
    if (!c.allFinite()) throw DomainError("povm: coefficients must be finite");
    return PovmSpec(c, x0, std::nullopt);
}

QualityReport validate_povm(const PovmSpec& spec) {
    const auto& c = spec.coefficients();
    QualityReport report;

    std::array<double, 3> row_norm{};
    for (int j = 0; j < 3; ++j) row_norm[j] = c.row(j).norm();

    auto is_zero = [&](int j, int k) { return std::abs(c(j, k)) <= kZeroTol * row_norm[j]; };

    // Canonical order: zero-Phi_0 rows first, by descending |C_j1|.
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const bool za = is_zero(a, 0), zb = is_zero(b, 0);
        if (za != zb) return za;
        if (za && zb) return std::abs(c(a, 1)) > std::abs(c(b, 1));
        return false;
    });
    report.canonical_rows = order;

    int n_zero = 0;
    for (int j = 0; j < 3; ++j) n_zero += is_zero(j, 0) ? 1 : 0;
    if (n_zero != 2)
        report.violations.push_back("need exactly two rows with zero Phi_0 overlap, found " +
                                    std::to_string(n_zero));
    for (int idx = 0; idx < 2; ++idx) {
        const int j = order[idx];
        if (!is_zero(j, 0))
            report.violations.push_back("row " + std::to_string(j) +
                                        ": Phi_0 overlap must vanish");
        if (is_zero(j, 1))
            report.violations.push_back("row " + std::to_string(j) +
                                        ": Phi_1 overlap must not vanish");
    }
    {
        const int j = order[2];
        if (is_zero(j, 0))
            report.violations.push_back("row " + std::to_string(j) +
                                        ": Phi_0 overlap must not vanish");
        if (is_zero(j, 1))
            report.violations.push_back("row " + std::to_string(j) +
                                        ": Phi_1 overlap must not vanish");
    }
    report.conditions_ok = report.violations.empty();

    for (int j = 0; j < 3; ++j)
        if (row_norm[j] > 1.0 + 1e-12)
            report.violations.push_back("row " + std::to_string(j) +
                                        " has norm above one, completion cannot be PSD");

    Eigen::Matrix4d completion = Eigen::Matrix4d::Identity();
    for (int j = 0; j < 3; ++j) completion -= c.row(j).transpose() * c.row(j);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(completion);
    report.completion_psd = es.eigenvalues().minCoeff() >= -1e-10;
    if (!report.completion_psd)
        report.violations.push_back("completion element is not positive semidefinite");

    // Projector independence: Gram of the vectorized projectors.
    Eigen::Matrix3d gram;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const double d = c.row(a).dot(c.row(b));
            gram(a, b) = d * d;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> gs(gram);
    report.independent = gs.eigenvalues().minCoeff() > 1e-12 * gs.eigenvalues().maxCoeff();
    if (!report.independent) report.violations.push_back("projectors are linearly dependent");

    const int r0 = order[0], r1 = order[1];
    const double num = c(r0, 1) * c(r1, 2) - c(r0, 2) * c(r1, 1);
    const double den = c(r0, 1) * c(r0, 1) + c(r1, 1) * c(r1, 1);
    report.quality_factor = den > 0.0 ? num * num / den : 0.0;
    report.zero_quality_warning = report.quality_factor < 1e-12;

    const int r2 = order[2];
    const double smallest =
        std::min({std::abs(c(r0, 1)) / std::max(row_norm[r0], kProbFloor),
                  std::abs(c(r1, 1)) / std::max(row_norm[r1], kProbFloor),
                  std::abs(c(r2, 0)) / std::max(row_norm[r2], kProbFloor),
                  std::abs(c(r2, 1)) / std::max(row_norm[r2], kProbFloor)});
    report.conditioning_warning = smallest < kSmallEntryTol;
    return report;
}

double lambda_prediction(double q, const QualityReport& report) {
    return 4.0 * q * (1.0 - q) * report.quality_factor;
}

Eigen::Vector4d outcome_probabilities(const PovmSpec& spec, const OrthonormalBasis& basis,
                                      const SourceParams& theta) {
    const Amplitudes amp = project_states(spec, basis, theta, false);
    Eigen::Vector4d p;
    for (int j = 0; j < 3; ++j)
        p(j) = theta.q * amp.plus(j) * amp.plus(j) +
               (1.0 - theta.q) * amp.minus(j) * amp.minus(j);
    double p3 = 1.0 - p(0) - p(1) - p(2);
    if (p3 < 0.0) {
        if (p3 < -1e-12)
            throw AccuracyError("povm: probabilities exceed one beyond the rounding tolerance");
        p3 = 0.0;
    }
    p(3) = p3;
    return p;
}

OutcomeModel outcome_model(const PovmSpec& spec, const OrthonormalBasis& basis,
                           const SourceParams& theta) {
    const Amplitudes amp = project_states(spec, basis, theta, true);
    OutcomeModel out;
    const double q = theta.q;
    for (int j = 0; j < 3; ++j) {
        const double ap = amp.plus(j), am = amp.minus(j);
        const double dp = amp.dplus(j), dm = amp.dminus(j);
        out.p(j) = q * ap * ap + (1.0 - q) * am * am;
        out.dp(j, 0) = 2.0 * q * ap * dp + 2.0 * (1.0 - q) * am * dm;
        out.dp(j, 1) = q * ap * dp - (1.0 - q) * am * dm;  // da/ds = +/- 1/2
        out.dp(j, 2) = ap * ap - am * am;
    }
    double p3 = 1.0 - out.p(0) - out.p(1) - out.p(2);
    if (p3 < 0.0) {
        if (p3 < -1e-12)
            throw AccuracyError("povm: probabilities exceed one beyond the rounding tolerance");
        p3 = 0.0;
    }
    out.p(3) = p3;
    out.dp.row(3) = -(out.dp.row(0) + out.dp.row(1) + out.dp.row(2));
    return out;
}

FisherMatrix classical_fim(const PovmSpec& spec, const OrthonormalBasis& basis,
                           const SourceParams& theta) {
    const OutcomeModel model = outcome_model(spec, basis, theta);
    Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
    bool unbounded = false;
    for (int j = 0; j < 4; ++j) {
        const double pj = model.p(j);
        const double dmax = model.dp.row(j).cwiseAbs().maxCoeff();
        if (pj < kProbFloor) {
            if (dmax >= kProbFloor) unbounded = true;
            continue;
        }
        f += model.dp.row(j).transpose() * model.dp.row(j) / pj;
    }
    FisherMatrix out(f, FisherKind::classical);
    if (unbounded) out.flag_unbounded();
    return out;
}

double optimal_displacement(const SourceParams& theta) {
    return theta.s0 - 0.5 * theta.s * (1.0 - 2.0 * theta.q);
}

FisherMatrix direct_imaging_fim(const PsfModel& model, const SourceParams& theta) {
    const double xp = theta.s0 + 0.5 * theta.s;
    const double xm = theta.s0 - 0.5 * theta.s;
    const double q = theta.q;

    auto fim_with = [&](const QuadratureRule& rule) {
        Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double x = rule.nodes()[i];
            const double w = rule.weights()[i];
            const double up = model(x - xp), um = model(x - xm);
            const double vp = model.derivative(1, x - xp), vm = model.derivative(1, x - xm);
            const double fp = up * up, fm = um * um;
            const double gp = 2.0 * up * vp, gm = 2.0 * um * vm;  // f' of each component
            const double intensity = q * fp + (1.0 - q) * fm;
            if (intensity <= 1e-300) continue;
            Eigen::Vector3d grad;
            grad(0) = -q * gp - (1.0 - q) * gm;
            grad(1) = -0.5 * q * gp + 0.5 * (1.0 - q) * gm;
            grad(2) = fp - fm;
            f += (w / intensity) * grad * grad.transpose();
        }
        return f;
    };

    const Eigen::Matrix3d coarse = fim_with(model.rule());
    const Eigen::Matrix3d fine = fim_with(model.fine_rule());
    if ((fine - coarse).norm() > 1e-8 * fine.norm() + 1e-12)
        throw AccuracyError("povm: direct-imaging quadrature did not converge");
    return FisherMatrix(fine, FisherKind::classical);
}

}  // namespace superres
