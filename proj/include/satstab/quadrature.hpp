#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace satstab {

// Gauss-Legendre nodes/weights on [-1, 1], computed by Newton iteration on
// the three-term recurrence. Accurate to a few ulps for orders up to ~200.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule gauss_legendre(std::size_t order);

// Composite Gauss-Legendre rule on [0, length]: `panels` equal panels with
// `order` nodes each. Nodes are strictly increasing.
class Quadrature {
public:
    Quadrature() = default;
    Quadrature(double length, std::size_t panels, std::size_t order = 16);

    // Enough panels that products with total wavenumber up to `max_wavenumber`
    // (in units of pi/L) are integrated to roughly machine precision.
    static Quadrature for_wavenumber(double length, std::size_t max_wavenumber);

    [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] double length() const noexcept { return length_; }
    [[nodiscard]] std::size_t panels() const noexcept { return panels_; }
    [[nodiscard]] std::size_t order() const noexcept { return order_; }

    [[nodiscard]] double integrate(const std::function<double(double)>& f) const;
    // sum_q w_q f_q g_q for sampled fields.
    [[nodiscard]] double inner(std::span<const double> f, std::span<const double> g) const;

private:
    double length_ = 0.0;
    std::size_t panels_ = 0;
    std::size_t order_ = 0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

} // namespace satstab
