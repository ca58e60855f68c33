#pragma once

#include <cstddef>
#include <string_view>

// Hot loops over sampled waveforms. Each kernel has a scalar reference
// version and vector variants (AVX2+FMA on x86-64, NEON on aarch64); the
// dispatcher picks one at first use based on what the CPU reports.

namespace switchcell::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct Table {
    Backend backend;
    /// out[k] = a[k] * b[k]
    void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
    /// Composite Simpson of a[k]*b[k] on a uniform grid; n must be odd and >= 3.
    double (*simpson_product)(const double* a, const double* b, std::size_t n, double h);
    /// Trapezoid of a[k]*b[k] on a uniform grid; n >= 2.
    double (*trapezoid_product)(const double* a, const double* b, std::size_t n, double h);
    /// Plain sum, used for energy audits.
    double (*sum)(const double* a, std::size_t n);
};

const Table& scalar_table();
/// nullptr when the variant was not compiled for this target.
const Table* avx2_table();
const Table* neon_table();

bool cpu_has_avx2();

/// Currently selected table. First call resolves it from the CPU (and the
/// SWITCHCELL_KERNELS=scalar environment override).
const Table& active();

/// Force a backend. Returns false when it is not available here.
bool select(Backend b);

std::string_view name(Backend b);

}  // namespace switchcell::kernels
