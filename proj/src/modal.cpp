#include "satstab/modal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "satstab/errors.hpp"
#include "satstab/quadrature.hpp"

namespace satstab {

ActuatorShape ActuatorShape::indicator(double a, double b) {
    ActuatorShape s;
    s.kind = Kind::Indicator;
    s.a = a;
    s.b = b;
    return s;
}

ActuatorShape ActuatorShape::mode_combination(std::vector<double> coefficients) {
    ActuatorShape s;
    s.kind = Kind::ModeCombination;
    s.coefficients = std::move(coefficients);
    return s;
}

void ActuatorShape::validate(double length) const {
    if (kind == Kind::Indicator) {
        require(std::isfinite(a) && std::isfinite(b), "indicator endpoints must be finite");
        require(0.0 <= a && a < b && b <= length,
                "indicator support must satisfy 0 <= a < b <= L (got [" + std::to_string(a) + ", " +
                    std::to_string(b) + "])");
        return;
    }
    require(!coefficients.empty(), "mode combination needs at least one coefficient");
    for (double c : coefficients) {
        require(std::isfinite(c), "mode combination coefficients must be finite");
    }
    require(norm_squared() > 0.0, "mode combination must not be identically zero");
}

double ActuatorShape::norm_squared() const {
    if (kind == Kind::Indicator) {
        return b - a;
    }
    double s = 0.0;
    for (double c : coefficients) {
        s += c * c;
    }
    return s;
}

double Lifting::d(double x, int derivative) const {
    const double L = length;
    switch (derivative) {
    case 0: return x * x * x / (L * L) - 2.0 * x * x / L + x;
    case 1: return 3.0 * x * x / (L * L) - 4.0 * x / L + 1.0;
    case 2: return 6.0 * x / (L * L) - 4.0 / L;
    case 3: return 6.0 / (L * L);
    default: return 0.0;
    }
}

double Lifting::a(double x) const { return -lambda * d(x, 2); }
double Lifting::b(double x) const { return -d(x, 0); }
double Lifting::d_norm_squared() const { return length * length * length / 105.0; }

Eigen::MatrixXd ModalSystem::b_tail() const {
    const auto J = static_cast<Eigen::Index>(modes());
    const auto nn = static_cast<Eigen::Index>(n);
    if (coeffs.rows() == 0 || J <= nn) {
        return Eigen::MatrixXd(0, coeffs.cols());
    }
    return coeffs.bottomRows(J - nn);
}

double indicator_coefficient_closed_form(const EigenSystem& es, std::size_t j, double a, double b) {
    const Mode& m = es.mode(j);
    const double A = m.amplitude();
    const double w = m.frequency();
    switch (m.kind()) {
    case Mode::Kind::Sine: return A * (std::cos(w * a) - std::cos(w * b)) / w;
    case Mode::Kind::Cosine: return A * (std::sin(w * b) - std::sin(w * a)) / w;
    case Mode::Kind::Constant: return A * (b - a);
    case Mode::Kind::ParityPair: break;
    }
    throw Error(ErrorKind::InvalidArgument, "no closed-form indicator coefficient for clamped modes");
}

namespace {

double indicator_coefficient_quadrature(const EigenSystem& es, std::size_t j, double a, double b) {
    // Integrate over [a, b] directly so the jump of the indicator never
    // falls inside a panel.
    const double L = es.params().length;
    const int k = std::max(1, es.labels()[j]);
    const auto kw = static_cast<std::size_t>(std::ceil(k * (b - a) / L)) + 2;
    const Quadrature q = Quadrature::for_wavenumber(b - a, kw);
    const Mode& m = es.mode(j);
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        s += q.weights()[i] * m.eval(a + q.nodes()[i]);
    }
    return s;
}

} // namespace

Eigen::MatrixXd actuator_coefficients(const EigenSystem& es, std::span<const ActuatorShape> shapes,
                                      std::size_t count) {
    require(count <= es.count(), "requested more actuator coefficients than computed modes");
    const double L = es.params().length;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(count),
                                                static_cast<Eigen::Index>(shapes.size()));
    const bool closed = es.bc() != BoundaryCondition::Clamped;
    for (std::size_t k = 0; k < shapes.size(); ++k) {
        const ActuatorShape& s = shapes[k];
        s.validate(L);
        for (std::size_t j = 0; j < count; ++j) {
            double v = 0.0;
            if (s.kind == ActuatorShape::Kind::ModeCombination) {
                v = j < s.coefficients.size() ? s.coefficients[j] : 0.0;
            } else if (closed) {
                v = indicator_coefficient_closed_form(es, j, s.a, s.b);
            } else {
                v = indicator_coefficient_quadrature(es, j, s.a, s.b);
            }
            out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = v;
        }
    }
    return out;
}

double indicator_coefficient_by_quadrature(const EigenSystem& es, std::size_t j, double a, double b) {
    ActuatorShape::indicator(a, b).validate(es.params().length);
    return indicator_coefficient_quadrature(es, j, a, b);
}

ModalSystem assemble_internal(std::shared_ptr<const EigenSystem> es, const Eigen::MatrixXd& coeffs,
                              std::size_t n, std::vector<double> actuator_norm_sq) {
    require(es != nullptr, "eigen system required");
    const auto uc = unstable_count(*es);
    require(n == uc.n, "unstable dimension does not match the spectrum");
    require(static_cast<std::size_t>(coeffs.rows()) == es->count(),
            "actuator table must have one row per retained mode");
    require(actuator_norm_sq.size() == static_cast<std::size_t>(coeffs.cols()),
            "one actuator norm per channel required");

    ModalSystem ms;
    ms.mode = ModalMode::Internal;
    ms.n = n;
    ms.eta = uc.eta;
    ms.sigma.assign(es->values().begin(), es->values().end());
    const auto nn = static_cast<Eigen::Index>(n);
    ms.A = Eigen::MatrixXd::Zero(nn, nn);
    for (Eigen::Index i = 0; i < nn; ++i) {
        ms.A(i, i) = ms.sigma[static_cast<std::size_t>(i)];
    }
    ms.B = coeffs.topRows(nn);
    ms.coeffs = coeffs;
    ms.actuator_norm_sq = std::move(actuator_norm_sq);
    ms.es = std::move(es);
    return ms;
}

ModalSystem assemble_internal(std::shared_ptr<const EigenSystem> es, std::span<const ActuatorShape> shapes) {
    require(es != nullptr, "eigen system required");
    require(!shapes.empty(), "at least one actuator is required");
    Eigen::MatrixXd coeffs = actuator_coefficients(*es, shapes, es->count());
    std::vector<double> norms;
    for (const auto& s : shapes) {
        norms.push_back(s.norm_squared());
    }
    const std::size_t n = unstable_count(*es).n;
    return assemble_internal(std::move(es), coeffs, n, std::move(norms));
}

ModalSystem modal_from_matrices(std::vector<double> sigma, Eigen::MatrixXd coeffs, std::size_t n) {
    require(static_cast<std::size_t>(coeffs.rows()) == sigma.size(), "one coefficient row per mode");
    require(n <= sigma.size(), "n exceeds the number of modes");
    ModalSystem ms;
    ms.mode = ModalMode::Internal;
    ms.n = n;
    ms.eta = n < sigma.size() ? -sigma[n] / 2.0 : 0.0;
    const auto nn = static_cast<Eigen::Index>(n);
    ms.A = Eigen::MatrixXd::Zero(nn, nn);
    for (Eigen::Index i = 0; i < nn; ++i) {
        ms.A(i, i) = sigma[static_cast<std::size_t>(i)];
    }
    ms.B = coeffs.topRows(nn);
    for (Eigen::Index k = 0; k < coeffs.cols(); ++k) {
        ms.actuator_norm_sq.push_back(coeffs.col(k).squaredNorm());
    }
    ms.coeffs = std::move(coeffs);
    ms.sigma = std::move(sigma);
    return ms;
}

ModalSystem assemble_boundary(std::shared_ptr<const EigenSystem> es, std::size_t n, double critical_tol) {
    require(es != nullptr, "eigen system required");
    require(es->bc() == BoundaryCondition::Clamped, "boundary control needs the clamped eigen system");
    const auto uc = unstable_count(*es);
    require(n == uc.n, "unstable dimension does not match the spectrum");
    const double lambda = es->params().lambda;
    const double L = es->params().length;
    // On (0, L) the critical set scales as lambda L^2 in N.
    const double scaled = lambda * L * L;
    if (critical_set_member(scaled, critical_tol * std::max(1.0, scaled))) {
        throw Error(ErrorKind::CriticalLength,
                    "lambda L^2 = " + std::to_string(scaled) +
                        " lies in the critical set pi^2 (k^2 + l^2); the boundary pair is not controllable");
    }

    ModalSystem ms;
    ms.mode = ModalMode::Boundary;
    ms.n = n;
    ms.eta = uc.eta;
    ms.lifting = Lifting{L, lambda};
    ms.sigma.assign(es->values().begin(), es->values().end());
    const Lifting lift = ms.lifting;
    const auto av = es->project([&](double x) { return lift.a(x); });
    const auto dv = es->project([&](double x) { return lift.d(x); });
    const auto J = static_cast<Eigen::Index>(es->count());
    ms.lift_coeffs.resize(J);
    ms.d_coeffs.resize(J);
    ms.coeffs.resize(J, 1);
    for (Eigen::Index j = 0; j < J; ++j) {
        ms.lift_coeffs(j) = av[static_cast<std::size_t>(j)];
        ms.d_coeffs(j) = dv[static_cast<std::size_t>(j)];
        ms.coeffs(j, 0) = -dv[static_cast<std::size_t>(j)];
    }

    const auto nn = static_cast<Eigen::Index>(n);
    ms.A = Eigen::MatrixXd::Zero(nn + 1, nn + 1);
    ms.B = Eigen::MatrixXd::Zero(nn + 1, 1);
    ms.B(0, 0) = 1.0;
    for (Eigen::Index i = 0; i < nn; ++i) {
        ms.A(i + 1, 0) = ms.lift_coeffs(i);
        ms.A(i + 1, i + 1) = ms.sigma[static_cast<std::size_t>(i)];
        ms.B(i + 1, 0) = ms.coeffs(i, 0);
    }
    ms.actuator_norm_sq = {lift.d_norm_squared()};
    ms.es = std::move(es);
    return ms;
}

std::pair<std::vector<double>, std::vector<double>> project(std::span<const double> state, std::size_t n) {
    require(state.size() >= n, "state shorter than the unstable dimension");
    return {std::vector<double>(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(n)),
            std::vector<double>(state.begin() + static_cast<std::ptrdiff_t>(n), state.end())};
}

std::size_t max_multiplicity(std::span<const double> unstable, double tol) {
    std::size_t best = 0;
    std::size_t i = 0;
    while (i < unstable.size()) {
        std::size_t j = i + 1;
        while (j < unstable.size() &&
               std::abs(unstable[j] - unstable[i]) <= tol * std::max(1.0, std::abs(unstable[i]))) {
            ++j;
        }
        best = std::max(best, j - i);
        i = j;
    }
    return best;
}

std::vector<ActuatorShape> suggest_actuators(const EigenSystem& es, std::vector<ActuatorShape> shapes,
                                             std::size_t n) {
    const std::size_t n0 = max_multiplicity(es.values().first(n));
    if (n0 == 0) {
        return shapes;
    }
    // Short indicators at staggered irrational offsets avoid the symmetry
    // points where whole families of modes integrate to zero.
    const double L = es.params().length;
    const double width = L / static_cast<double>(4 * (n + 1));
    for (std::size_t i = 0; i < n0; ++i) {
        const double a = std::fmod((0.1 + std::numbers::sqrt2 * 0.17 * static_cast<double>(i + 1)), 0.75) * L;
        shapes.push_back(ActuatorShape::indicator(a, a + width));
    }
    return shapes;
}

} // namespace satstab
