#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops shared by the quadrature, the pseudospectral
// nonlinearity and the exponential-Euler stepper. Each kernel has a scalar
// reference and an AVX2/FMA variant; the variant is picked once at startup
// from CPUID and can be pinned with SATSTAB_KERNELS=scalar|avx2.
namespace satstab::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;
    // y[i] = decay[i] * y[i] + phi[i] * forcing[i]
    void (*exp_euler)(double* y, const double* decay, const double* phi, const double* forcing,
                      std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // out[i] = a[i] * b[i]
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
const KernelTable& avx2_table() noexcept;

bool avx2_available() noexcept;

const KernelTable& active() noexcept;
Isa active_isa() noexcept;
// Test hook. Requesting Avx2 on a machine without it falls back to Scalar.
void force_isa(Isa isa) noexcept;

std::string_view to_string(Isa isa);

void exp_euler(std::span<double> y, std::span<const double> decay, std::span<const double> phi,
               std::span<const double> forcing);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double a, std::span<const double> x, std::span<double> y);
void mul(std::span<const double> a, std::span<const double> b, std::span<double> out);

// out[q] = sum_j coeffs[j] * basis[j*stride + q] for a row-major table.
void synthesize(std::span<const double> basis, std::size_t stride, std::span<const double> coeffs,
                std::span<double> out);
// out[j] = sum_q basis[j*stride + q] * g[q]
void project(std::span<const double> basis, std::size_t stride, std::span<const double> g,
             std::span<double> out);

} // namespace satstab::kernels
