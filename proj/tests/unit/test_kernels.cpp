#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "satstab/kernels.hpp"

using namespace satstab;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// FMA contraction differs from mul+add by at most one rounding per element.
bool close_ulps(double a, double b, double scale) {
    return std::abs(a - b) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1e-300);
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar and avx2 tables agree, including remainder lanes") {
    if (!kernels::avx2_available()) {
        MESSAGE("AVX2 not available on this host; equivalence skipped");
        return;
    }
    const auto& s = kernels::scalar_table();
    const auto& v = kernels::avx2_table();
    CHECK(v.isa == kernels::Isa::Avx2);
    std::mt19937_64 rng(7);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 63u, 1000u, 1027u}) {
        const auto a = random_vector(rng, n);
        const auto b = random_vector(rng, n);
        const auto c = random_vector(rng, n);

        double abs_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) abs_sum += std::abs(a[i] * b[i]);
        const double ds = s.dot(a.data(), b.data(), n);
        const double dv = v.dot(a.data(), b.data(), n);
        CHECK(std::abs(ds - dv) <= 8.0 * n * std::numeric_limits<double>::epsilon() * abs_sum + 1e-300);

        auto y1 = c, y2 = c;
        s.exp_euler(y1.data(), a.data(), b.data(), c.data(), n);
        v.exp_euler(y2.data(), a.data(), b.data(), c.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(close_ulps(y1[i], y2[i], std::abs(a[i] * c[i]) + std::abs(b[i] * c[i])));
        }

        y1 = c;
        y2 = c;
        s.axpy(0.37, a.data(), y1.data(), n);
        v.axpy(0.37, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(close_ulps(y1[i], y2[i], std::abs(c[i]) + std::abs(0.37 * a[i])));
        }

        std::vector<double> m1(n), m2(n);
        s.mul(a.data(), b.data(), m1.data(), n);
        v.mul(a.data(), b.data(), m2.data(), n);
        CHECK(m1 == m2);
    }
}

TEST_CASE("force_isa switches the active table") {
    const auto before = kernels::active_isa();
    kernels::force_isa(kernels::Isa::Scalar);
    CHECK(kernels::active_isa() == kernels::Isa::Scalar);
    kernels::force_isa(kernels::Isa::Avx2);
    CHECK(kernels::active_isa() == (kernels::avx2_available() ? kernels::Isa::Avx2 : kernels::Isa::Scalar));
    kernels::force_isa(before);
}

TEST_CASE("synthesize and project are transposes") {
    std::mt19937_64 rng(3);
    const std::size_t rows = 5, stride = 37;
    const auto basis = random_vector(rng, rows * stride);
    const auto coeffs = random_vector(rng, rows);
    const auto g = random_vector(rng, stride);
    std::vector<double> field(stride), proj(rows);
    kernels::synthesize(basis, stride, coeffs, field);
    kernels::project(basis, stride, g, proj);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t q = 0; q < stride; ++q) lhs += field[q] * g[q];
    for (std::size_t j = 0; j < rows; ++j) rhs += coeffs[j] * proj[j];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

}
