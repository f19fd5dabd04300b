#pragma once

#include <Eigen/Dense>
#include <array>

namespace superres {

enum class FisherKind { quantum, classical };

/// Per-event estimation precisions H_alpha = 1/(F^-1)_aa, parameter order
/// (s0, s, q).
struct PrecisionTriple {
    double s0 = 0.0;
    double s = 0.0;
    double q = 0.0;

    double operator[](int i) const { return i == 0 ? s0 : (i == 1 ? s : q); }
};

/// 3x3 symmetric Fisher information matrix (quantum or classical), per
/// detection event, parameter order fixed globally as (s0, s, q).
class FisherMatrix {
public:
    static constexpr std::array<const char*, 3> parameter_order = {"s0", "s", "q"};

    FisherMatrix(const Eigen::Matrix3d& m, FisherKind kind);

    const Eigen::Matrix3d& matrix() const { return matrix_; }
    FisherKind kind() const { return kind_; }
    double operator()(int a, int b) const { return matrix_(a, b); }

    /// H_alpha = 1/(F^-1)_aa via the adjugate (no LU noise on the tiny
    /// determinant). Throws SingularMatrixError with the null direction if
    /// the matrix is not invertible.
    PrecisionTriple precisions() const;

    /// Spectral condition number max|eig| / min|eig|.
    double condition_number() const;

    /// Set when an entry overflowed (e.g. the brightness block as q -> 0, 1).
    bool has_infinite_entries() const { return infinite_entries_; }
    /// Set by classical_fim when an outcome probability vanished while its
    /// derivative did not; the information is then formally unbounded.
    bool unbounded_information() const { return unbounded_; }

    FisherMatrix& flag_unbounded() {
        unbounded_ = true;
        return *this;
    }

private:
    Eigen::Matrix3d matrix_;
    FisherKind kind_;
    bool infinite_entries_ = false;
    bool unbounded_ = false;
};

}  // namespace superres
