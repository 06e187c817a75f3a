#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace satstab {

// Bernoulli-type comparison: v' <= b(t) v + k(t) v^p, v(0) = v0, p != 1.
// With q = 1 - p,
//   w(t) = v0^q + q int_0^t k(s) exp(-q int_0^s b) ds,
//   v(t) <= exp(int_0^t b) w(t)^{1/q}   while w > 0.
struct GronwallResult {
    std::vector<double> times;
    std::vector<double> w;
    std::vector<double> bound;  // NaN from the first nonpositive w onwards
    std::optional<std::size_t> expired_at;

    // Throws BoundExpired if w reached zero on the grid.
    void require_valid() const;
};

GronwallResult gronwall_bound(double v0, const std::function<double(double)>& b,
                              const std::function<double(double)>& k, double p, std::span<const double> t_grid,
                              std::size_t panels_per_interval = 2);

} // namespace satstab
