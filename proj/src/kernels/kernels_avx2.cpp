// AVX2 variants of the kernel set. This TU is compiled with -mavx2 (and
// without FMA: contraction would change results vs the scalar reference).
// On other architectures it degrades to "no AVX2 ops available".

#include "splitconv/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace splitconv::kernels {
namespace {

void axpy_avx2(double* y, const double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t main = n - n % 4;
    for (std::size_t i = 0; i < main; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
        _mm256_storeu_pd(y + i, vy);
    }
    for (std::size_t i = main; i < n; ++i) y[i] += a * x[i];
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t main = n - n % 4;
    for (std::size_t i = 0; i < main; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
    }
    // lanes (acc0,acc1,acc2,acc3) -> (acc0+acc2) + (acc1+acc3)
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d pair = _mm_add_pd(lo, hi);
    double sum = _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
    for (std::size_t i = main; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double sumsq_avx2(const double* x, std::size_t n) { return dot_avx2(x, x, n); }

void scale_avx2(double* y, const double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t main = n - n % 4;
    for (std::size_t i = 0; i < main; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (std::size_t i = main; i < n; ++i) y[i] = a * x[i];
}

void add_avx2(double* out, const double* a, const double* b, std::size_t n) {
    std::size_t main = n - n % 4;
    for (std::size_t i = 0; i < main; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (std::size_t i = main; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(double* out, const double* a, const double* b, std::size_t n) {
    std::size_t main = n - n % 4;
    for (std::size_t i = 0; i < main; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (std::size_t i = main; i < n; ++i) out[i] = a[i] - b[i];
}

void relu_avx2(double* y, const double* x, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t main = n - n % 4;
    for (std::size_t i = 0; i < main; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d mask = _mm256_cmp_pd(vx, zero, _CMP_GT_OQ);
        _mm256_storeu_pd(y + i, _mm256_and_pd(mask, vx));
    }
    for (std::size_t i = main; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_avx2(double* dx, const double* x, const double* dy, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t main = n - n % 4;
    for (std::size_t i = 0; i < main; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d mask = _mm256_cmp_pd(vx, zero, _CMP_GT_OQ);
        _mm256_storeu_pd(dx + i, _mm256_and_pd(mask, _mm256_loadu_pd(dy + i)));
    }
    for (std::size_t i = main; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

constexpr Ops kAvx2Ops = {
    "avx2",    axpy_avx2, dot_avx2,  sumsq_avx2,
    scale_avx2, add_avx2, sub_avx2,  relu_avx2,
    relu_mask_avx2,
};

} // namespace

const Ops* avx2_ops_build() { return &kAvx2Ops; }

} // namespace splitconv::kernels

#else // !__AVX2__

namespace splitconv::kernels {
const Ops* avx2_ops_build() { return nullptr; }
} // namespace splitconv::kernels

#endif
