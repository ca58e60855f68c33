#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fixture.hpp"
#include "switchcell/errors.hpp"
#include "switchcell/multirate.hpp"

using namespace switchcell;

namespace {

Scenario constant_duty(double horizon, double duty) {
    Scenario sc;
    sc.set = fixture::profile();
    sc.v_dc = 400.0;
    sc.f_sw = 20e3;
    sc.r_load = 5.0;
    sc.t_amb = 298.15;
    sc.horizon = horizon;
    sc.schedule = {{0.0, horizon, duty}};
    return sc;
}

}  // namespace

TEST_CASE("growth is exactly xi per calm step and stops at dt_max") {
    CouplerConfig cfg;
    cfg.dt_min = 1e-5;
    cfg.dt_max = 5e-4;
    cfg.xi = 1e-4;
    auto s = coupler_start(cfg);
    CHECK(s.dt_th == 1e-5);
    s = coupler_next_step(s, 0.1);
    CHECK(s.dt_th == doctest::Approx(1.1e-4).epsilon(1e-12));
    s = coupler_next_step(s, 0.2);
    CHECK(s.dt_th == doctest::Approx(2.1e-4).epsilon(1e-12));
    for (int i = 0; i < 20; ++i) s = coupler_next_step(s, 0.2);
    CHECK(s.dt_th == 5e-4);
}

TEST_CASE("a jump larger than delta_t holds the step") {
    CouplerConfig cfg;
    auto s = coupler_start(cfg);
    s = coupler_next_step(s, 0.1);
    const double before = s.dt_th;
    s = coupler_next_step(s, 2.5);
    CHECK(s.dt_th == before);
    s = coupler_next_step(s, 2.6);
    CHECK(s.dt_th == doctest::Approx(before + cfg.xi));
}

TEST_CASE("first falling step resets to dt_min, then grows again") {
    CouplerConfig cfg;
    auto s = coupler_start(cfg);
    for (int i = 0; i < 5; ++i) s = coupler_next_step(s, 0.3);
    CHECK(s.dt_th > cfg.dt_min);
    s = coupler_next_step(s, -0.2);
    CHECK(s.dt_th == cfg.dt_min);
    CHECK(s.direction == Direction::Falling);
    s = coupler_next_step(s, -0.25);
    CHECK(s.dt_th == doctest::Approx(cfg.dt_min + cfg.xi));
}

TEST_CASE("frozen thermal dynamics grow monotonically to dt_max") {
    CouplerConfig cfg;
    auto s = coupler_start(cfg);
    double prev = s.dt_th;
    for (int i = 0; i < 200; ++i) {
        s = coupler_next_step(s, 0.0);
        CHECK(s.dt_th >= prev);
        CHECK(s.dt_th <= cfg.dt_max);
        prev = s.dt_th;
    }
    CHECK(s.dt_th == cfg.dt_max);
}

TEST_CASE("fixed mode always uses dt_min") {
    CouplerConfig cfg;
    cfg.adaptive = false;
    auto s = coupler_start(cfg);
    for (int i = 0; i < 10; ++i) s = coupler_next_step(s, 0.01);
    CHECK(s.dt_th == cfg.dt_min);
}

TEST_CASE("coupler config validation") {
    CouplerConfig cfg;
    cfg.dt_max = 1e-6;
    CHECK_THROWS_AS(coupler_start(cfg), ValidationError);
    cfg = {};
    cfg.xi = 0.0;
    CHECK_THROWS_AS(coupler_start(cfg), ValidationError);
}

TEST_CASE("duty lookup") {
    const std::vector<DutyWindow> w{{0.0, 2.0, 0.5}, {2.0, 4.0, 0.4}};
    CHECK(duty_at(w, 0.0) == 0.5);
    CHECK(duty_at(w, 1.999) == 0.5);
    CHECK(duty_at(w, 2.0) == 0.4);
    CHECK(duty_at(w, 4.0) == 0.4);
    CHECK_THROWS_AS(duty_at(w, 5.0), DomainError);
}

TEST_CASE("cycle power is switching energy times f_sw plus conduction") {
    const auto s = fixture::profile();
    const OperatingPoint op{400.0, 40.0, 298.15};
    const auto p = average_cycle_power(s, op, 0.5, 20e3);
    const auto on = simulate_turn_on(s, op), off = simulate_turn_off(s, op);
    CHECK(p.p_mos == doctest::Approx((on.e_on_mos + off.e_off_mos) * 20e3 + 0.5 * 1600.0 * 0.08));
    CHECK(p.p_sbd >= 0.0);
    CHECK(average_cycle_power(s, op, 0.0, 20e3).p_mos == 0.0);
    // 20 MHz leaves no room for both edges
    CHECK_THROWS_AS(average_cycle_power(s, op, 0.5, 20e6), ValidationError);
}

TEST_CASE("steps land on duty-window edges and stay inside the bounds") {
    Scenario sc = constant_duty(0.3, 0.5);
    sc.schedule = {{0.0, 0.1, 0.5}, {0.1, 0.2, 0.3}, {0.2, 0.3, 0.5}};
    CouplerConfig cfg;
    const auto tr = run_electrothermal(sc, cfg);
    bool hit1 = false, hit2 = false;
    for (std::size_t i = 1; i < tr.samples.size(); ++i) {
        const auto& s = tr.samples[i];
        CHECK(s.dt_th <= cfg.dt_max + 1e-15);
        CHECK(s.t > tr.samples[i - 1].t);
        hit1 = hit1 || s.t == 0.1;
        hit2 = hit2 || s.t == 0.2;
    }
    CHECK(hit1);
    CHECK(hit2);
    CHECK(tr.samples.back().t == 0.3);
    CHECK(tr.exchange_count == static_cast<int>(tr.samples.size()) - 1);
}

TEST_CASE("adaptive run tracks the fixed-step run with far fewer exchanges") {
    const Scenario sc = constant_duty(0.1, 0.5);
    CouplerConfig fixed;
    fixed.adaptive = false;
    const auto a = run_electrothermal(sc, CouplerConfig{});
    const auto f = run_electrothermal(sc, fixed);
    CHECK(f.exchange_count == 10000);
    CHECK(a.exchange_count * 10 <= f.exchange_count);
    double worst = 0.0;
    for (const auto& s : f.samples) worst = std::max(worst, std::abs(interpolate_tj(a, s.t) - s.tj_mos));
    CHECK(worst <= 2.0);
    CHECK(a.samples.back().tj_mos > sc.t_amb);
}

TEST_CASE("zero duty stays at ambient") {
    const auto tr = run_electrothermal(constant_duty(0.05, 0.0), CouplerConfig{});
    CHECK(tr.samples.back().tj_mos == doctest::Approx(298.15));
    CHECK(tr.samples.back().tj_sbd == doctest::Approx(298.15));
}

TEST_CASE("scenario validation") {
    Scenario sc = constant_duty(0.1, 0.5);
    sc.schedule = {{0.0, 0.05, 0.5}};
    CHECK_THROWS_AS(run_electrothermal(sc, CouplerConfig{}), ValidationError);
    sc = constant_duty(0.1, 1.5);
    CHECK_THROWS_AS(run_electrothermal(sc, CouplerConfig{}), ValidationError);
    sc = constant_duty(0.1, 0.5);
    sc.schedule = {{0.0, 0.05, 0.5}, {0.06, 0.1, 0.5}};
    CHECK_THROWS_AS(run_electrothermal(sc, CouplerConfig{}), ValidationError);
}
