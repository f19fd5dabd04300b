#include "superres/psf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "superres/errors.hpp"

namespace superres {

namespace {

constexpr int kGaussianMaxOrder = 64;  // scaled Hermite recurrence stays in range

// Interpolation window for tabulated PSFs (degree = kWindow - 1).
constexpr int kWindow = 9;

double relative_step(int order) {
    // Central differences of order n lose roundoff like eps / h^n; widening
    // the step as eps^(1/(n+4)) balances that against the O(h^4) Richardson
    // truncation. Order 1..2 keep the 1e-4 base step.
    const double eps = std::numeric_limits<double>::epsilon();
    return std::max(1e-4, std::pow(eps, 1.0 / (order + 4)));
}

}  // namespace

struct PsfModel::Impl {
    PsfKind kind = PsfKind::gaussian;
    double sigma = 1.0;
    int max_order = kGaussianMaxOrder;
    QuadratureRule rule, rule_fine;

    // tabulated data (normalized on load)
    std::vector<double> tx, tv;

    double eval_table(double x) const;
    double deriv_table(int order, double x) const;
    double deriv(int order, double x) const;
};

// Local Lagrange interpolation (Neville) on the kWindow nearest table points.
double PsfModel::Impl::eval_table(double x) const {
    if (x <= tx.front() || x >= tx.back()) return 0.0;
    const auto it = std::upper_bound(tx.begin(), tx.end(), x);
    long i = std::distance(tx.begin(), it);
    long lo = std::clamp<long>(i - kWindow / 2 - 1, 0, static_cast<long>(tx.size()) - kWindow);
    double p[kWindow];
    for (int k = 0; k < kWindow; ++k) p[k] = tv[lo + k];
    for (int m = 1; m < kWindow; ++m) {
        for (int k = 0; k < kWindow - m; ++k) {
            const double xa = tx[lo + k], xb = tx[lo + k + m];
            p[k] = ((x - xb) * p[k] + (xa - x) * p[k + 1]) / (xa - xb);
        }
    }
    return p[0];
}

double PsfModel::Impl::deriv_table(int order, double x) const {
    if (order == 0) return eval_table(x);
    const double h = relative_step(order) * sigma;
    // (order+1)-point central stencil of width h, one Richardson level.
    auto stencil = [&](double step) {
        double acc = 0.0;
        double binom = 1.0;
        for (int k = 0; k <= order; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            acc += sign * binom * eval_table(x + (0.5 * order - k) * step);
            binom *= static_cast<double>(order - k) / (k + 1);
        }
        return acc / std::pow(step, order);
    };
    const double d_h = stencil(h);
    const double d_h2 = stencil(0.5 * h);
    return (4.0 * d_h2 - d_h) / 3.0;
}

double PsfModel::Impl::deriv(int order, double x) const {
    if (kind == PsfKind::tabulated) return deriv_table(order, x);
    // Gaussian: d^n/dx^n Psi = (2 pi s^2)^(-1/4) (-1)^n (2s)^(-n) H_n(u) e^(-u^2),
    // u = x/(2s). The recurrence runs on H_n e^(-u^2) to avoid overflow.
    const double u = x / (2.0 * sigma);
    const double env = std::exp(-u * u);
    double hm1 = 0.0, h = env;
    for (int k = 0; k < order; ++k) {
        const double hp1 = 2.0 * u * h - 2.0 * k * hm1;
        hm1 = h;
        h = hp1;
    }
    const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
    const double sign = (order % 2 == 0) ? 1.0 : -1.0;
    return norm * sign * std::pow(2.0 * sigma, -order) * h;
}

PsfModel PsfModel::gaussian(double sigma, int quad_nodes) {
    if (!(sigma > 0.0)) throw DomainError("psf: sigma must be positive");
    if (quad_nodes < 8) throw DomainError("psf: need at least 8 quadrature nodes");
    auto impl = std::make_shared<Impl>();
    impl->kind = PsfKind::gaussian;
    impl->sigma = sigma;
    impl->max_order = kGaussianMaxOrder;
    impl->rule = QuadratureRule::gauss_hermite(quad_nodes, 0.0, sigma);
    impl->rule_fine = impl->rule.refined();
    return PsfModel(std::move(impl));
}

PsfModel PsfModel::tabulated(std::vector<double> x, std::vector<double> amplitude,
                             int max_derivative_order) {
    if (x.size() != amplitude.size() || x.size() < static_cast<std::size_t>(kWindow))
        throw DomainError("psf: table needs matching columns with at least 9 rows");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw DomainError("psf: table abscissae must be strictly increasing");
    auto impl = std::make_shared<Impl>();
    impl->kind = PsfKind::tabulated;
    impl->max_order = max_derivative_order;
    impl->tx = std::move(x);
    impl->tv = std::move(amplitude);

    // Width scale from the intensity second moment; used only to size
    // derivative steps, so a rough value is fine.
    impl->rule = QuadratureRule::composite_legendre(impl->tx.front(), impl->tx.back(), 96);
    impl->rule_fine = impl->rule.refined();
    double norm2 = impl->rule_fine.integrate([&](double t) {
        const double v = impl->eval_table(t);
        return v * v;
    });
    if (!(norm2 > 0.0)) throw DomainError("psf: table amplitude has zero norm");
    const double scale = 1.0 / std::sqrt(norm2);
    for (auto& v : impl->tv) v *= scale;
    double mean = impl->rule_fine.integrate([&](double t) {
        const double v = impl->eval_table(t);
        return t * v * v;
    });
    double m2 = impl->rule_fine.integrate([&](double t) {
        const double v = impl->eval_table(t);
        return (t - mean) * (t - mean) * v * v;
    });
    impl->sigma = std::sqrt(std::max(m2, 1e-12));
    return PsfModel(std::move(impl));
}

PsfModel PsfModel::tabulated_from_file(const std::string& path, int max_derivative_order) {
    std::ifstream in(path);
    if (!in) throw DomainError("psf: cannot open table file: " + path);
    std::vector<double> xs, vs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        double x, v;
        if (row >> x >> v) {
            xs.push_back(x);
            vs.push_back(v);
        }
    }
    return tabulated(std::move(xs), std::move(vs), max_derivative_order);
}

PsfKind PsfModel::kind() const { return impl_->kind; }
double PsfModel::sigma() const { return impl_->sigma; }
int PsfModel::max_derivative_order() const { return impl_->max_order; }
const QuadratureRule& PsfModel::rule() const { return impl_->rule; }
const QuadratureRule& PsfModel::fine_rule() const { return impl_->rule_fine; }

std::span<const double> PsfModel::table_x() const {
    if (impl_->kind != PsfKind::tabulated) throw UsageError("psf: model has no table");
    return impl_->tx;
}

std::span<const double> PsfModel::table_amplitude() const {
    if (impl_->kind != PsfKind::tabulated) throw UsageError("psf: model has no table");
    return impl_->tv;
}

double PsfModel::derivative(int order, double x) const {
    if (order < 0 || order > impl_->max_order)
        throw CapabilityError("psf: derivative order " + std::to_string(order) +
                              " beyond supported maximum " + std::to_string(impl_->max_order));
    if (!std::isfinite(x)) throw DomainError("psf: evaluation point must be finite");
    return impl_->deriv(order, x);
}

void PsfModel::derivatives_up_to(int max_order, double x, std::span<double> out) const {
    if (max_order < 0 || max_order > impl_->max_order)
        throw CapabilityError("psf: derivative order " + std::to_string(max_order) +
                              " beyond supported maximum " + std::to_string(impl_->max_order));
    if (out.size() != static_cast<std::size_t>(max_order) + 1)
        throw UsageError("psf: output span size must be max_order + 1");
    if (impl_->kind == PsfKind::tabulated) {
        for (int n = 0; n <= max_order; ++n) out[n] = impl_->deriv_table(n, x);
        return;
    }
    const double sigma = impl_->sigma;
    const double u = x / (2.0 * sigma);
    const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
    double hm1 = 0.0, h = std::exp(-u * u);
    double prefactor = norm;
    for (int n = 0; n <= max_order; ++n) {
        out[n] = prefactor * h;
        prefactor *= -1.0 / (2.0 * sigma);
        const double hp1 = 2.0 * u * h - 2.0 * n * hm1;
        hm1 = h;
        h = hp1;
    }
}

double PsfModel::inner_product(const std::function<double(double)>& f,
                               const std::function<double(double)>& g) const {
    const double coarse = impl_->rule.integrate([&](double x) { return f(x) * g(x); });
    const double fine = impl_->rule_fine.integrate([&](double x) { return f(x) * g(x); });
    if (std::abs(fine - coarse) > 1e-10 * std::abs(fine) + 1e-14)
        throw AccuracyError("psf: quadrature did not converge (coarse/fine disagree)");
    return fine;
}

PsfMoments PsfModel::moments(double s) const {
    if (!std::isfinite(s)) throw DomainError("psf: separation must be finite");
    const auto& self = *impl_;
    PsfMoments m;
    m.p_squared = inner_product([&](double x) { return self.deriv(1, x); },
                                [&](double x) { return self.deriv(1, x); });
    m.fourth_moment = inner_product([&](double x) { return self.deriv(2, x); },
                                    [&](double x) { return self.deriv(2, x); });
    m.w = inner_product([&](double x) { return self.deriv(0, x); },
                        [&](double x) { return self.deriv(0, x - s); });
    m.p_imag = inner_product([&](double x) { return self.deriv(0, x); },
                             [&](double x) { return -self.deriv(1, x + s); });
    if (self.kind == PsfKind::gaussian) {
        // expm1 keeps 1-w fully accurate down to s ~ 0.
        m.one_minus_w = -std::expm1(-s * s / (8.0 * self.sigma * self.sigma));
    } else {
        // 0.5 * ||Psi - Psi_s||^2: the integrand is a squared difference, so
        // no leading digits cancel after integration.
        m.one_minus_w = 0.5 * impl_->rule_fine.integrate([&](double x) {
            const double d = self.deriv(0, x) - self.deriv(0, x - s);
            return d * d;
        });
    }
    return m;
}

}  // namespace superres
