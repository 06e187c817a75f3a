#include "satstab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "satstab/errors.hpp"
#include "satstab/kernels.hpp"

namespace satstab {

GaussRule gauss_legendre(std::size_t order) {
    require(order >= 1, "gauss_legendre: order must be >= 1");
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const std::size_t half = (order + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(order) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= order; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            if (order == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = static_cast<double>(order) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // Recompute derivative at the converged node.
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= order; ++k) {
            const double kk = static_cast<double>(k);
            const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
            p0 = p1;
            p1 = p2;
        }
        dp = static_cast<double>(order) * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) {
        rule.nodes[order / 2] = 0.0;
    }
    return rule;
}

Quadrature::Quadrature(double length, std::size_t panels, std::size_t order)
    : length_(length), panels_(panels), order_(order) {
    require(length > 0.0, "Quadrature: length must be positive");
    require(panels >= 1 && order >= 1, "Quadrature: need at least one panel and one node");
    const GaussRule rule = gauss_legendre(order);
    const double h = length / static_cast<double>(panels);
    nodes_.reserve(panels * order);
    weights_.reserve(panels * order);
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = h * static_cast<double>(p);
        for (std::size_t i = 0; i < order; ++i) {
            nodes_.push_back(a + 0.5 * h * (rule.nodes[i] + 1.0));
            weights_.push_back(0.5 * h * rule.weights[i]);
        }
    }
}

Quadrature Quadrature::for_wavenumber(double length, std::size_t max_wavenumber) {
    // A 16-point panel integrates ~3 half-periods of a sinusoid to 1e-16;
    // the extra panels cover the boundary layers of clamped modes.
    const std::size_t panels = std::max<std::size_t>(4, (max_wavenumber + 2) / 2);
    return Quadrature(length, panels, 16);
}

double Quadrature::integrate(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (std::size_t q = 0; q < nodes_.size(); ++q) {
        s += weights_[q] * f(nodes_[q]);
    }
    return s;
}

double Quadrature::inner(std::span<const double> f, std::span<const double> g) const {
    require(f.size() == size() && g.size() == size(), "Quadrature::inner: field length mismatch");
    double s = 0.0;
    for (std::size_t q = 0; q < f.size(); ++q) {
        s += weights_[q] * f[q] * g[q];
    }
    return s;
}

} // namespace satstab
