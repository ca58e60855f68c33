#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fixture.hpp"
#include "switchcell/errors.hpp"
#include "switchcell/thermal.hpp"

using namespace switchcell;

namespace {

// closed-form junction rise of a ladder driven by a power step from rest
double step_response(const FosterLadder& l, double p, double t) {
    double sum = 0.0;
    for (const auto& s : l.stages) sum -= p * s.r_th * std::expm1(-t / s.tau());
    return sum;
}

double junction_drop(const ThermalState& s) {
    double sum = 0.0;
    for (double d : s.junction_drops) sum += d;
    return sum;
}

}  // namespace

TEST_CASE("advance from rest equals the step response") {
    const auto set = fixture::profile();
    for (const FosterLadder* l : {&set.thermal_mos, &set.thermal_sbd}) {
        for (double dt : {1e-6, 1e-4, 1e-3, 0.05, 1.0, 10.0}) {
            const auto s = foster_advance(initial_state(*l, 298.15), *l, 100.0, dt);
            const double want = step_response(*l, 100.0, dt);
            CHECK(std::abs(junction_drop(s) - want) <= 1e-12 * want);
        }
    }
}

TEST_CASE("split steps compose exactly under constant power") {
    const auto l = fixture::profile().thermal_mos;
    auto s = initial_state(l, 298.15);
    for (int i = 0; i < 100; ++i) s = foster_advance(s, l, 40.0, 1e-3);
    const double want = step_response(l, 40.0, 0.1);
    CHECK(std::abs(junction_drop(s) - want) <= 1e-12 * want);
}

TEST_CASE("cooling from a loaded state decays each stage") {
    const auto l = fixture::profile().thermal_sbd;
    auto s = foster_advance(initial_state(l, 298.15), l, 50.0, 0.2);
    const auto before = s.junction_drops;
    s = foster_advance(s, l, 0.0, 0.01);
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(s.junction_drops[i] == doctest::Approx(before[i] * std::exp(-0.01 / l.stages[i].tau())).epsilon(1e-14));
}

TEST_CASE("steady-state rises at 100 W") {
    const auto set = fixture::profile();
    CHECK(junction_to_case_rise(set.thermal_mos, 100.0) == doctest::Approx(43.7).epsilon(1e-12));
    CHECK(junction_to_case_rise(set.thermal_sbd, 100.0) == doctest::Approx(36.8).epsilon(1e-12));
    // the case path adds its own resistance on top
    CHECK(steady_state_rise(set.thermal_mos, 100.0) == doctest::Approx(43.7 + 50.0).epsilon(1e-12));
}

TEST_CASE("long run settles at the steady-state rise") {
    const auto l = fixture::profile().thermal_mos;
    auto s = initial_state(l, 300.0);
    s = foster_advance(s, l, 10.0, 1e4);
    CHECK(s.t_j() == doctest::Approx(300.0 + steady_state_rise(l, 10.0)).epsilon(1e-12));
    CHECK(s.t_c() == doctest::Approx(300.0 + 10.0 * 0.5).epsilon(1e-12));
}

TEST_CASE("zero dt and negative power are domain errors") {
    const auto l = fixture::profile().thermal_mos;
    const auto s0 = initial_state(l, 298.15);
    CHECK_THROWS_AS(foster_advance(s0, l, 30.0, 0.0), DomainError);
    CHECK_THROWS_AS(foster_advance(s0, l, -1.0, 1e-3), DomainError);
}

TEST_CASE("bad ladders and arguments are rejected") {
    FosterLadder empty;
    CHECK_THROWS_AS(validate(empty), ValidationError);
    FosterLadder neg{{{-0.1, 0.01}}, {}};
    CHECK_THROWS_AS(validate(neg), ValidationError);
    const auto l = fixture::profile().thermal_mos;
    CHECK_THROWS_AS(foster_advance(initial_state(l, 298.15), l, 1.0, -1.0), ValidationError);
}
