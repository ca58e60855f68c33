#include "switchcell/kernels.hpp"

namespace switchcell::kernels {
namespace {

void multiply(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * b[k];
}

double simpson_product(const double* a, const double* b, std::size_t n, double h) {
    double odd = 0.0, even = 0.0;
    for (std::size_t k = 1; k + 1 < n; k += 2) odd += a[k] * b[k];
    for (std::size_t k = 2; k + 1 < n; k += 2) even += a[k] * b[k];
    const double ends = a[0] * b[0] + a[n - 1] * b[n - 1];
    return h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
}

double trapezoid_product(const double* a, const double* b, std::size_t n, double h) {
    double inner = 0.0;
    for (std::size_t k = 1; k + 1 < n; ++k) inner += a[k] * b[k];
    return h * (inner + 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]));
}

double sum(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += a[k];
    return s;
}

}  // namespace

const Table& scalar_table() {
    static const Table t{Backend::Scalar, multiply, simpson_product, trapezoid_product, sum};
    return t;
}

}  // namespace switchcell::kernels
