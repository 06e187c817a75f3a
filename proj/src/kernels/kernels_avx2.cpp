#include "satstab/kernels.hpp"

#if defined(SATSTAB_HAVE_AVX2)
#include <immintrin.h>
#endif

namespace satstab::kernels {

#if defined(SATSTAB_HAVE_AVX2)
namespace {

void exp_euler_avx2(double* y, const double* decay, const double* phi, const double* forcing,
                    std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vd = _mm256_loadu_pd(decay + i);
        __m256d vp = _mm256_loadu_pd(phi + i);
        __m256d vf = _mm256_loadu_pd(forcing + i);
        __m256d r = _mm256_fmadd_pd(vp, vf, _mm256_mul_pd(vd, vy));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) {
        y[i] = decay[i] * y[i] + phi[i] * forcing[i];
    }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    acc0 = _mm256_add_pd(acc0, acc1);
    __m128d lo = _mm256_castpd256_pd128(acc0);
    __m128d hi = _mm256_extractf128_pd(acc0, 1);
    lo = _mm_add_pd(lo, hi);
    double s = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
    for (; i < n; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) {
        y[i] += a * x[i];
    }
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) {
        out[i] = a[i] * b[i];
    }
}

constexpr KernelTable kAvx2{Isa::Avx2, exp_euler_avx2, dot_avx2, axpy_avx2, mul_avx2};

} // namespace

const KernelTable& avx2_table() noexcept { return kAvx2; }

#else

const KernelTable& avx2_table() noexcept { return scalar_table(); }

#endif

} // namespace satstab::kernels
