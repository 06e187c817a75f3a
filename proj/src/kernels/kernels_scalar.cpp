#include "satstab/kernels.hpp"

namespace satstab::kernels {
namespace {

void exp_euler_scalar(double* y, const double* decay, const double* phi, const double* forcing,
                      std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = decay[i] * y[i] + phi[i] * forcing[i];
    }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += a * x[i];
    }
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a[i] * b[i];
    }
}

constexpr KernelTable kScalar{Isa::Scalar, exp_euler_scalar, dot_scalar, axpy_scalar, mul_scalar};

} // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

} // namespace satstab::kernels
