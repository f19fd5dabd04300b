#include "superres/basis.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "superres/errors.hpp"

namespace superres {

namespace {

constexpr double kRankTol = 1e-8;         // residual norm of a unit-scaled function
constexpr double kResidualLimit = 1e-6;   // displaced-state truncation threshold

// Poisson upper tail P(X >= n), summed forward so tiny tails keep full
// relative accuracy.
double poisson_tail(double mu, int n) {
    if (mu == 0.0) return 0.0;
    double log_term = -mu + n * std::log(mu);
    for (int k = 2; k <= n; ++k) log_term -= std::log(static_cast<double>(k));
    double term = std::exp(log_term);
    double acc = 0.0;
    for (int k = n; k < n + 200 && term > 0.0; ++k) {
        acc += term;
        term *= mu / (k + 1);
        if (term < acc * 1e-18) break;
    }
    return acc;
}

}  // namespace

struct OrthonormalBasis::Impl {
    PsfModel psf;
    double x0 = 0.0;
    int dim = 0;
    Eigen::MatrixXd combination;  // T: Phi_n = sum_k T(n,k) Psi_k, lower triangular
    Eigen::MatrixXd overlap;      // G
    Eigen::MatrixXd modes_grid;   // dim x nodes, Phi_n at the centered rule nodes
    Eigen::VectorXd quad_weights;
    Eigen::VectorXd quad_nodes;   // centered frame (y = x - x0)
    bool gaussian = false;

    explicit Impl(PsfModel m) : psf(std::move(m)) {}

    Eigen::VectorXd coefficients_raw(double a) const {
        Eigen::VectorXd c(dim);
        if (gaussian) {
            const double sg = psf.sigma();
            const double d = -a / (2.0 * sg);
            const double env = std::exp(-a * a / (8.0 * sg * sg));
            double pow_term = env;  // env * d^n / sqrt(n!)
            for (int n = 0; n < dim; ++n) {
                c(n) = pow_term;
                pow_term *= d / std::sqrt(static_cast<double>(n + 1));
            }
            return c;
        }
        Eigen::VectorXd shifted(quad_nodes.size());
        for (Eigen::Index i = 0; i < quad_nodes.size(); ++i)
            shifted(i) = quad_weights(i) * psf.derivative(0, quad_nodes(i) - a);
        return modes_grid * shifted;
    }

    double residual_of(const Eigen::VectorXd& c, double a) const {
        if (gaussian) {
            const double sg = psf.sigma();
            return poisson_tail(a * a / (4.0 * sg * sg), dim);
        }
        return 1.0 - c.squaredNorm();
    }
};

OrthonormalBasis OrthonormalBasis::build(const PsfModel& psf, double x0, int dim) {
    if (dim < 4) throw DomainError("basis: dimension must be at least 4");
    if (dim - 1 > psf.max_derivative_order())
        throw CapabilityError("basis: dimension " + std::to_string(dim) +
                              " needs derivative order " + std::to_string(dim - 1) +
                              " beyond the PSF's supported maximum");

    auto impl = std::make_shared<Impl>(psf);
    impl->x0 = x0;
    impl->dim = dim;
    impl->gaussian = psf.kind() == PsfKind::gaussian;

    const auto& rule = psf.rule();
    const Eigen::Index m = static_cast<Eigen::Index>(rule.size());
    impl->quad_nodes.resize(m);
    impl->quad_weights.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        impl->quad_nodes(i) = rule.nodes()[i];
        impl->quad_weights(i) = rule.weights()[i];
    }

    // Derivative functions on the grid (centered frame).
    Eigen::MatrixXd derivs(dim, m);
    std::vector<double> buf(dim);
    for (Eigen::Index i = 0; i < m; ++i) {
        psf.derivatives_up_to(dim - 1, impl->quad_nodes(i), buf);
        for (int n = 0; n < dim; ++n) derivs(n, i) = buf[n];
    }

    auto dot = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
        return (f.array() * g.array() * impl->quad_weights.array()).sum();
    };

    // Pre-scale rows to unit norm; T starts as the diagonal of inverse norms.
    Eigen::VectorXd prescale(dim);
    for (int n = 0; n < dim; ++n) {
        const double norm = std::sqrt(dot(derivs.row(n), derivs.row(n)));
        if (!(norm > 0.0)) throw RankDeficiencyError("basis: derivative order has zero norm", n);
        prescale(n) = 1.0 / norm;
        derivs.row(n) *= prescale(n);
    }

    Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd modes(dim, m);
    for (int n = 0; n < dim; ++n) {
        Eigen::VectorXd v = derivs.row(n);
        Eigen::VectorXd coeff = Eigen::VectorXd::Zero(dim);
        coeff(n) = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (int k = 0; k < n; ++k) {
                const double r = dot(modes.row(k), v);
                v -= r * modes.row(k).transpose();
                coeff -= r * combo.row(k).transpose();
            }
        }
        const double norm = std::sqrt(dot(v, v));
        if (norm < kRankTol)
            throw RankDeficiencyError(
                "basis: derivative order " + std::to_string(n) +
                    " is numerically dependent on lower orders (residual norm " +
                    std::to_string(norm) + ")",
                n);
        modes.row(n) = v / norm;
        combo.row(n) = coeff / norm;
    }

    // Orthonormality is a construction guarantee; verify the quadrature sees it.
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b <= a; ++b) {
            const double g = dot(modes.row(a), modes.row(b));
            if (std::abs(g - (a == b ? 1.0 : 0.0)) > 1e-9)
                throw AccuracyError("basis: orthonormality check failed at (" +
                                    std::to_string(a) + "," + std::to_string(b) + ")");
        }

    // Undo the pre-scaling so T maps raw derivative functions to modes.
    for (int n = 0; n < dim; ++n)
        for (int k = 0; k <= n; ++k) combo(n, k) *= prescale(k);

    // G_nm = <Phi_n | Psi_m>; n > m vanishes by construction, set exactly.
    Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n < dim; ++n)
        for (int mm = n; mm < dim; ++mm)
            overlap(n, mm) = dot(modes.row(n), derivs.row(mm)) / prescale(mm);

    impl->combination = std::move(combo);
    impl->overlap = std::move(overlap);
    impl->modes_grid = std::move(modes);

    OrthonormalBasis basis(std::move(impl));

    if (psf.kind() == PsfKind::gaussian) {
        // The closed-form displaced overlaps are used at runtime; verify them
        // against the quadrature route once per build.
        for (double a : {0.3, 1.0}) {
            Eigen::VectorXd shifted(basis.impl_->quad_nodes.size());
            for (Eigen::Index i = 0; i < basis.impl_->quad_nodes.size(); ++i)
                shifted(i) = basis.impl_->quad_weights(i) *
                             psf.derivative(0, basis.impl_->quad_nodes(i) - a);
            Eigen::VectorXd by_quadrature = basis.impl_->modes_grid * shifted;
            Eigen::VectorXd closed = basis.impl_->coefficients_raw(a);
            if ((by_quadrature - closed).cwiseAbs().maxCoeff() > 1e-9)
                throw AccuracyError("basis: closed-form displaced overlaps disagree with quadrature");
        }
    }
    return basis;
}

int OrthonormalBasis::dim() const { return impl_->dim; }
double OrthonormalBasis::x0() const { return impl_->x0; }
const PsfModel& OrthonormalBasis::psf() const { return impl_->psf; }
const Eigen::MatrixXd& OrthonormalBasis::overlap_matrix() const { return impl_->overlap; }

double OrthonormalBasis::mode(int n, double x) const {
    if (n < 0 || n >= impl_->dim) throw UsageError("basis: mode index out of range");
    std::vector<double> buf(n + 1);
    impl_->psf.derivatives_up_to(n, x - impl_->x0, buf);
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) acc += impl_->combination(n, k) * buf[k];
    return acc;
}

StateCoefficients OrthonormalBasis::displaced_state(double a) const {
    StateCoefficients out;
    out.displacement = a;
    out.c = impl_->coefficients_raw(a);
    out.residual = impl_->residual_of(out.c, a);
    if (out.residual > kResidualLimit)
        throw TruncationError("basis: displaced state leaves residual " +
                                  std::to_string(out.residual) +
                                  " outside the basis; increase the dimension",
                              out.residual, impl_->dim);
    return out;
}

Eigen::VectorXd OrthonormalBasis::displaced_state_derivative(double a) const {
    if (impl_->gaussian) {
        const double sg = impl_->psf.sigma();
        const double s2 = sg * sg;
        Eigen::VectorXd c = impl_->coefficients_raw(a);
        Eigen::VectorXd dc(impl_->dim);
        // d/da [ env * d^n / sqrt(n!) ], env = exp(-a^2/(8 s^2)), d = -a/(2 s)
        const double env = std::exp(-a * a / (8.0 * s2));
        double dpow = 1.0;  // d^(n-1) / sqrt((n-1)!) running term
        dc(0) = -a / (4.0 * s2) * c(0);
        for (int n = 1; n < impl_->dim; ++n) {
            dc(n) = -a / (4.0 * s2) * c(n) -
                    n / (2.0 * sg) * env * dpow / std::sqrt(static_cast<double>(n));
            dpow *= (-a / (2.0 * sg)) / std::sqrt(static_cast<double>(n));
        }
        return dc;
    }
    const double h = std::max(1e-6, 1e-3 * std::abs(a));
    auto central = [&](double step) {
        return Eigen::VectorXd((impl_->coefficients_raw(a + step) -
                                impl_->coefficients_raw(a - step)) /
                               (2.0 * step));
    };
    Eigen::VectorXd d_h = central(h);
    Eigen::VectorXd d_h2 = central(0.5 * h);
    return (4.0 * d_h2 - d_h) / 3.0;
}

}  // namespace superres
