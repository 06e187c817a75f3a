#include "satstab/gronwall.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "satstab/errors.hpp"
#include "satstab/quadrature.hpp"

namespace satstab {

void GronwallResult::require_valid() const {
    if (expired_at) {
        throw Error(ErrorKind::BoundExpired,
                    "w(t) <= 0 at t = " + std::to_string(times[*expired_at]) + "; the bound no longer applies");
    }
}

GronwallResult gronwall_bound(double v0, const std::function<double(double)>& b,
                              const std::function<double(double)>& k, double p, std::span<const double> t_grid,
                              std::size_t panels_per_interval) {
    require(std::isfinite(p) && p >= 0.0 && p != 1.0, "gronwall: p must be >= 0 and != 1");
    require(std::isfinite(v0) && v0 > 0.0, "gronwall: v0 must be positive");
    require(!t_grid.empty() && t_grid.front() == 0.0, "gronwall: time grid must start at 0");
    require(panels_per_interval >= 1, "gronwall: need at least one panel per interval");
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        require(t_grid[i] > t_grid[i - 1], "gronwall: time grid must be increasing");
    }
    const double q = 1.0 - p;
    const GaussRule gl = gauss_legendre(16);

    // int_lo^hi f by Gauss-Legendre on one panel
    auto panel = [&](const std::function<double(double)>& f, double lo, double hi) {
        const double h = 0.5 * (hi - lo);
        const double c = 0.5 * (hi + lo);
        double s = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            s += gl.weights[i] * f(c + h * gl.nodes[i]);
        }
        return s * h;
    };

    GronwallResult out;
    out.times.assign(t_grid.begin(), t_grid.end());
    double Bt = 0.0;     // int_0^t b
    double integral = 0.0;  // int_0^t k exp(-q B)
    const double base = std::pow(v0, q);
    auto emit = [&](std::size_t i) {
        const double w = base + q * integral;
        out.w.push_back(w);
        if (!out.expired_at && !(w > 0.0)) {
            out.expired_at = i;
        }
        out.bound.push_back(out.expired_at ? std::numeric_limits<double>::quiet_NaN()
                                           : std::exp(Bt) * std::pow(w, 1.0 / q));
    };
    emit(0);
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        const double t0 = t_grid[i - 1];
        const double hstep = (t_grid[i] - t0) / static_cast<double>(panels_per_interval);
        for (std::size_t s = 0; s < panels_per_interval; ++s) {
            const double lo = t0 + hstep * static_cast<double>(s);
            const double hi = lo + hstep;
            const double Blo = Bt;
            integral += panel([&](double x) { return k(x) * std::exp(-q * (Blo + panel(b, lo, x))); }, lo, hi);
            Bt = Blo + panel(b, lo, hi);
        }
        emit(i);
    }
    return out;
}

} // namespace satstab
