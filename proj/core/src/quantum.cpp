#include "superres/quantum.hpp"

#include <cmath>

#include "superres/errors.hpp"

namespace superres {

namespace {

struct SldSystem {
    Eigen::MatrixXd rho;
    std::array<Eigen::MatrixXd, 3> sld;
};

SldSystem build_slds(const OrthonormalBasis& basis, const SourceParams& theta) {
    SldSystem sys;
    sys.rho = density_matrix(basis, theta).rho;
    const auto drho = parameter_derivatives(basis, theta);
    for (int a = 0; a < 3; ++a) sys.sld[a] = solve_sld(sys.rho, drho[a]);
    return sys;
}

}  // namespace

DensityMatrix density_matrix(const OrthonormalBasis& basis, const SourceParams& theta) {
    DensityMatrix dm;
    const double a_plus = theta.s0 + 0.5 * theta.s - basis.x0();
    const double a_minus = theta.s0 - 0.5 * theta.s - basis.x0();
    dm.c_plus = basis.displaced_state(a_plus).c;
    dm.c_minus = basis.displaced_state(a_minus).c;
    dm.rho = theta.q * dm.c_plus * dm.c_plus.transpose() +
             (1.0 - theta.q) * dm.c_minus * dm.c_minus.transpose();
    return dm;
}

std::array<Eigen::MatrixXd, 3> parameter_derivatives(const OrthonormalBasis& basis,
                                                     const SourceParams& theta) {
    const double a_plus = theta.s0 + 0.5 * theta.s - basis.x0();
    const double a_minus = theta.s0 - 0.5 * theta.s - basis.x0();
    const Eigen::VectorXd cp = basis.displaced_state(a_plus).c;
    const Eigen::VectorXd cm = basis.displaced_state(a_minus).c;
    const Eigen::VectorXd dcp = basis.displaced_state_derivative(a_plus);
    const Eigen::VectorXd dcm = basis.displaced_state_derivative(a_minus);

    const Eigen::MatrixXd sym_p = dcp * cp.transpose() + cp * dcp.transpose();
    const Eigen::MatrixXd sym_m = dcm * cm.transpose() + cm * dcm.transpose();
    const double q = theta.q;

    // da_pm/ds0 = 1, da_pm/ds = +/- 1/2.
    std::array<Eigen::MatrixXd, 3> out;
    out[0] = q * sym_p + (1.0 - q) * sym_m;
    out[1] = 0.5 * q * sym_p - 0.5 * (1.0 - q) * sym_m;
    out[2] = cp * cp.transpose() - cm * cm.transpose();
    return out;
}

Eigen::MatrixXd solve_sld(const Eigen::MatrixXd& rho, const Eigen::MatrixXd& drho,
                          double support_threshold) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const Eigen::MatrixXd& u = es.eigenvectors();
    const double eps = support_threshold * lam.cwiseAbs().maxCoeff();

    Eigen::MatrixXd dt = u.transpose() * drho * u;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        for (Eigen::Index j = 0; j < lam.size(); ++j) {
            const double den = lam(i) + lam(j);
            dt(i, j) = den > eps ? 2.0 * dt(i, j) / den : 0.0;
        }
    return u * dt * u.transpose();
}

FisherMatrix qfim_numeric(const OrthonormalBasis& basis, const SourceParams& theta) {
    const SldSystem sys = build_slds(basis, theta);
    Eigen::Matrix3d q;
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            const double val =
                0.5 * (sys.rho * (sys.sld[a] * sys.sld[b] + sys.sld[b] * sys.sld[a])).trace();
            q(a, b) = val;
            q(b, a) = val;
        }
    return FisherMatrix(q, FisherKind::quantum);
}

FisherMatrix qfim_closed(const PsfModel& model, const SourceParams& theta) {
    const PsfMoments m = model.moments(theta.s);
    const double p2 = m.p_squared;
    const double beta = m.p_imag;
    const double qq = theta.q_factor();

    Eigen::Matrix3d q;
    q(0, 0) = 4.0 * p2 - 4.0 * qq * beta * beta;
    q(0, 1) = (4.0 * theta.q - 2.0) * p2;
    q(0, 2) = 4.0 * m.w * beta;
    q(1, 1) = p2;
    q(1, 2) = 0.0;
    q(2, 2) = 4.0 * m.one_minus_w_sq() / qq;
    q(1, 0) = q(0, 1);
    q(2, 0) = q(0, 2);
    q(2, 1) = q(1, 2);
    return FisherMatrix(q, FisherKind::quantum);
}

Eigen::Matrix3d compatibility_residual(const OrthonormalBasis& basis, const SourceParams& theta) {
    const SldSystem sys = build_slds(basis, theta);
    Eigen::Matrix3d r = Eigen::Matrix3d::Zero();
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            const double val =
                (sys.rho * (sys.sld[a] * sys.sld[b] - sys.sld[b] * sys.sld[a])).trace();
            r(a, b) = val;
            r(b, a) = -val;
        }
    return r;
}

PrecisionTriple quantum_precisions(const PsfModel& model, const SourceParams& theta) {
    const PsfMoments m = model.moments(theta.s);
    const double p2 = m.p_squared;
    const double beta2 = m.p_imag * m.p_imag;
    const double u2 = m.one_minus_w_sq();
    const double qq = theta.q_factor();
    const double bias = (2.0 * theta.q - 1.0) * (2.0 * theta.q - 1.0);  // 1 - qq, exact

    // det(Q) = 16 p2 g with g = (1-w^2) p2 - beta^2; the denominator of H_s
    // is regrouped as (1-qq) beta^2 + g so nothing cancels at q = 1/2.
    const double g = u2 * p2 - beta2;
    PrecisionTriple h;
    h.s0 = 4.0 * qq * g / u2;
    h.s = qq * p2 * g / (bias * beta2 + g);
    h.q = 4.0 * g / (qq * (p2 - beta2));
    if (!std::isfinite(h.s0) || !std::isfinite(h.s) || !std::isfinite(h.q))
        throw SingularMatrixError("quantum: qFIM is singular (zero separation?)", {0.0, 0.0, 1.0});
    return h;
}

PrecisionTriple small_separation_approx(const PsfModel& model, const SourceParams& theta) {
    if (theta.q == 0.5)
        throw DomainError(
            "quantum: the small-separation expansion degenerates at q = 1/2; "
            "use the exact inversion (quantum_precisions)");
    const PsfMoments m = model.moments(theta.s);
    const double v = m.var_p2();
    const double qq = theta.q_factor();
    const double s2 = theta.s * theta.s;
    PrecisionTriple h;
    h.s0 = qq * v * s2;
    h.s = qq * v * s2 / (4.0 * (1.0 - qq));
    h.q = v * s2 * s2 / qq;
    return h;
}

}  // namespace superres
