// Built with -mavx2 -mfma on x86-64 only; never called unless the CPU says so.
#include "switchcell/kernels.hpp"

#include <immintrin.h>

namespace switchcell::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4)
        _mm256_storeu_pd(out + k, _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k)));
    for (; k < n; ++k) out[k] = a[k] * b[k];
}

// Sum of a[k]*b[k] over k in [first, last), no stride.
double dot_range(const double* a, const double* b, std::size_t first, std::size_t last) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t k = first;
    for (; k + 8 <= last; k += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; k < last; ++k) s += a[k] * b[k];
    return s;
}

double simpson_product(const double* a, const double* b, std::size_t n, double h) {
    // Weights 1,4,2,4,...,2,4,1: accumulate odd/even lanes with a blend mask.
    const __m256d w = _mm256_set_pd(4.0, 2.0, 4.0, 2.0);  // lanes k+0..3 for k even: 2,4,2,4
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 2;
    for (; k + 4 <= n - 1; k += 4) {
        __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
        acc = _mm256_fmadd_pd(p, w, acc);
    }
    double s = hsum(acc);
    for (; k < n - 1; ++k) s += ((k & 1u) ? 4.0 : 2.0) * a[k] * b[k];
    s += 4.0 * a[1] * b[1];
    const double ends = a[0] * b[0] + a[n - 1] * b[n - 1];
    return h / 3.0 * (ends + s);
}

double trapezoid_product(const double* a, const double* b, std::size_t n, double h) {
    const double inner = n > 2 ? dot_range(a, b, 1, n - 1) : 0.0;
    return h * (inner + 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]));
}

double sum(const double* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 8 <= n; k += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + k));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + k + 4));
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; k < n; ++k) s += a[k];
    return s;
}

}  // namespace

const Table* avx2_table() {
    static const Table t{Backend::Avx2, multiply, simpson_product, trapezoid_product, sum};
    return &t;
}

}  // namespace switchcell::kernels
