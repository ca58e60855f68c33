#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "switchcell/kernels.hpp"

using namespace switchcell::kernels;

namespace {

std::vector<const Table*> variants() {
    std::vector<const Table*> v;
    if (const Table* t = avx2_table(); t && cpu_has_avx2()) v.push_back(t);
    if (const Table* t = neon_table()) v.push_back(t);
    return v;
}

std::vector<double> noise(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-50.0, 50.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

TEST_CASE("scalar simpson is exact for a cubic") {
    // integral of x * x^2 over [0, 2] = 4
    const std::size_t n = 9;
    const double h = 0.25;
    std::vector<double> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
        a[k] = k * h;
        b[k] = a[k] * a[k];
    }
    CHECK(scalar_table().simpson_product(a.data(), b.data(), n, h) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("scalar trapezoid of a linear product") {
    // integral of 1 * x over [0, 1] = 0.5, exact for the trapezoid rule
    const std::size_t n = 11;
    std::vector<double> a(n, 1.0), b(n);
    for (std::size_t k = 0; k < n; ++k) b[k] = k * 0.1;
    CHECK(scalar_table().trapezoid_product(a.data(), b.data(), n, 0.1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("vector variants match scalar") {
    const auto& ref = scalar_table();
    for (const Table* t : variants()) {
        CAPTURE(name(t->backend));
        // lengths around the vector width and its tails
        for (std::size_t n : {3u, 5u, 7u, 9u, 17u, 31u, 33u, 1025u, 4097u}) {
            CAPTURE(n);
            const auto a = noise(n, 1 + n), b = noise(n, 1000 + n);
            std::vector<double> p0(n), p1(n);
            ref.multiply(a.data(), b.data(), p0.data(), n);
            t->multiply(a.data(), b.data(), p1.data(), n);
            for (std::size_t k = 0; k < n; ++k) CHECK(p1[k] == doctest::Approx(p0[k]).epsilon(1e-15));

            double scale = 0.0;
            for (std::size_t k = 0; k < n; ++k) scale += std::abs(a[k] * b[k]);
            const double h = 1e-9;
            CHECK(std::abs(t->simpson_product(a.data(), b.data(), n, h) -
                           ref.simpson_product(a.data(), b.data(), n, h)) <= 1e-13 * scale * h);
            CHECK(std::abs(t->trapezoid_product(a.data(), b.data(), n, h) -
                           ref.trapezoid_product(a.data(), b.data(), n, h)) <= 1e-13 * scale * h);
            double abs_sum = 0.0;
            for (double x : a) abs_sum += std::abs(x);
            CHECK(std::abs(t->sum(a.data(), n) - ref.sum(a.data(), n)) <= 1e-13 * abs_sum);
        }
    }
}

TEST_CASE("trapezoid handles the two-point minimum") {
    const double a[2] = {1.0, 3.0}, b[2] = {2.0, 2.0};
    CHECK(scalar_table().trapezoid_product(a, b, 2, 0.5) == doctest::Approx(2.0));
    for (const Table* t : variants()) CHECK(t->trapezoid_product(a, b, 2, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("dispatcher honours the override and selection") {
    const Table& first = active();
    if (const char* env = std::getenv("SWITCHCELL_KERNELS"); env && std::string(env) == "scalar")
        CHECK(first.backend == Backend::Scalar);
    CHECK(select(Backend::Scalar));
    CHECK(active().backend == Backend::Scalar);
    if (!avx2_table() || !cpu_has_avx2()) CHECK_FALSE(select(Backend::Avx2));
    if (!neon_table()) CHECK_FALSE(select(Backend::Neon));
    CHECK(name(Backend::Scalar) == "scalar");
}
