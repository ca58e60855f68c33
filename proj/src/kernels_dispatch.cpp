#include "switchcell/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace switchcell::kernels {

#if !defined(SWITCHCELL_HAVE_AVX2)
const Table* avx2_table() { return nullptr; }
#endif
#if !defined(SWITCHCELL_HAVE_NEON)
const Table* neon_table() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(SWITCHCELL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const Table* resolve() {
    if (const char* env = std::getenv("SWITCHCELL_KERNELS"); env && std::string(env) == "scalar")
        return &scalar_table();
    if (const Table* t = neon_table()) return t;
    if (cpu_has_avx2())
        if (const Table* t = avx2_table()) return t;
    return &scalar_table();
}

std::atomic<const Table*> g_active{nullptr};

}  // namespace

const Table& active() {
    const Table* t = g_active.load(std::memory_order_acquire);
    if (!t) {
        t = resolve();
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

bool select(Backend b) {
    const Table* t = nullptr;
    switch (b) {
        case Backend::Scalar: t = &scalar_table(); break;
        case Backend::Avx2: t = cpu_has_avx2() ? avx2_table() : nullptr; break;
        case Backend::Neon: t = neon_table(); break;
    }
    if (!t) return false;
    g_active.store(t, std::memory_order_release);
    return true;
}

std::string_view name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "?";
}

}  // namespace switchcell::kernels
