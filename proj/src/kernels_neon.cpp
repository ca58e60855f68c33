// aarch64 only. Advanced SIMD is mandatory there, so no runtime probe is needed.
#include "switchcell/kernels.hpp"

#include <arm_neon.h>

namespace switchcell::kernels {
namespace {

void multiply(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) vst1q_f64(out + k, vmulq_f64(vld1q_f64(a + k), vld1q_f64(b + k)));
    for (; k < n; ++k) out[k] = a[k] * b[k];
}

double dot_range(const double* a, const double* b, std::size_t first, std::size_t last) {
    float64x2_t acc0 = vdupq_n_f64(0.0), acc1 = vdupq_n_f64(0.0);
    std::size_t k = first;
    for (; k + 4 <= last; k += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + k), vld1q_f64(b + k));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + k + 2), vld1q_f64(b + k + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; k < last; ++k) s += a[k] * b[k];
    return s;
}

double simpson_product(const double* a, const double* b, std::size_t n, double h) {
    const double wv[2] = {2.0, 4.0};
    const float64x2_t w = vld1q_f64(wv);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t k = 2;
    for (; k + 2 <= n - 1; k += 2)
        acc = vfmaq_f64(acc, vmulq_f64(vld1q_f64(a + k), vld1q_f64(b + k)), w);
    double s = vaddvq_f64(acc);
    for (; k < n - 1; ++k) s += ((k & 1u) ? 4.0 : 2.0) * a[k] * b[k];
    s += 4.0 * a[1] * b[1];
    return h / 3.0 * (a[0] * b[0] + a[n - 1] * b[n - 1] + s);
}

double trapezoid_product(const double* a, const double* b, std::size_t n, double h) {
    const double inner = n > 2 ? dot_range(a, b, 1, n - 1) : 0.0;
    return h * (inner + 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]));
}

double sum(const double* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) acc = vaddq_f64(acc, vld1q_f64(a + k));
    double s = vaddvq_f64(acc);
    for (; k < n; ++k) s += a[k];
    return s;
}

}  // namespace

const Table* neon_table() {
    static const Table t{Backend::Neon, multiply, simpson_product, trapezoid_product, sum};
    return &t;
}

}  // namespace switchcell::kernels
