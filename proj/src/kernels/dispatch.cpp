#include "satstab/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "satstab/errors.hpp"

namespace satstab::kernels {
namespace {

const KernelTable* pick_default() noexcept {
    if (const char* env = std::getenv("SATSTAB_KERNELS")) {
        if (std::string(env) == "scalar") {
            return &scalar_table();
        }
    }
    return avx2_available() ? &avx2_table() : &scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
    static std::atomic<const KernelTable*> table{pick_default()};
    return table;
}

} // namespace

bool avx2_available() noexcept {
#if defined(SATSTAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

Isa active_isa() noexcept { return active().isa; }

void force_isa(Isa isa) noexcept {
    const KernelTable* t = (isa == Isa::Avx2 && avx2_available()) ? &avx2_table() : &scalar_table();
    slot().store(t, std::memory_order_release);
}

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void exp_euler(std::span<double> y, std::span<const double> decay, std::span<const double> phi,
               std::span<const double> forcing) {
    require(decay.size() == y.size() && phi.size() == y.size() && forcing.size() == y.size(),
            "exp_euler: length mismatch");
    active().exp_euler(y.data(), decay.data(), phi.data(), forcing.data(), y.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "dot: length mismatch");
    return active().dot(a.data(), b.data(), a.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    require(x.size() == y.size(), "axpy: length mismatch");
    active().axpy(a, x.data(), y.data(), y.size());
}

void mul(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    require(a.size() == out.size() && b.size() == out.size(), "mul: length mismatch");
    active().mul(a.data(), b.data(), out.data(), out.size());
}

void synthesize(std::span<const double> basis, std::size_t stride, std::span<const double> coeffs,
                std::span<double> out) {
    require(out.size() <= stride && basis.size() >= coeffs.size() * stride,
            "synthesize: table too small");
    const KernelTable& k = active();
    for (double& v : out) {
        v = 0.0;
    }
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (coeffs[j] != 0.0) {
            k.axpy(coeffs[j], basis.data() + j * stride, out.data(), out.size());
        }
    }
}

void project(std::span<const double> basis, std::size_t stride, std::span<const double> g,
             std::span<double> out) {
    require(g.size() <= stride && basis.size() >= out.size() * stride, "project: table too small");
    const KernelTable& k = active();
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = k.dot(basis.data() + j * stride, g.data(), g.size());
    }
}

} // namespace satstab::kernels
