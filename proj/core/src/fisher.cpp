#include "superres/fisher.hpp"

#include <cmath>
#include <limits>

#include "superres/errors.hpp"

namespace superres {

FisherMatrix::FisherMatrix(const Eigen::Matrix3d& m, FisherKind kind)
    : matrix_(0.5 * (m + m.transpose())), kind_(kind) {
    infinite_entries_ = !matrix_.allFinite();
}

PrecisionTriple FisherMatrix::precisions() const {
    const Eigen::Matrix3d& f = matrix_;
    const double det = f.determinant();
    const double minor_s0 = f(1, 1) * f(2, 2) - f(1, 2) * f(2, 1);
    const double minor_s = f(0, 0) * f(2, 2) - f(0, 2) * f(2, 0);
    const double minor_q = f(0, 0) * f(1, 1) - f(0, 1) * f(1, 0);
    PrecisionTriple h{det / minor_s0, det / minor_s, det / minor_q};
    if (det == 0.0 || !std::isfinite(h.s0) || !std::isfinite(h.s) || !std::isfinite(h.q)) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(f);
        Eigen::Vector3d null_dir = es.eigenvectors().col(0);
        throw SingularMatrixError("fisher: matrix is singular, no finite precisions",
                                  {null_dir(0), null_dir(1), null_dir(2)});
    }
    return h;
}

double FisherMatrix::condition_number() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(matrix_);
    const Eigen::Vector3d mags = es.eigenvalues().cwiseAbs();
    const double lo = mags.minCoeff();
    const double hi = mags.maxCoeff();
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace superres
