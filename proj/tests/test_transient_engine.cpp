#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fixture.hpp"
#include "switchcell/errors.hpp"
#include "switchcell/transient_engine.hpp"

using namespace switchcell;

namespace {

const OperatingPoint kNominal{400.0, 15.0, 298.15};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("turn-on delay and current-rise closed forms") {
    const auto s = fixture::profile();
    const auto plan = turn_on_stage_plan(s, kNominal);
    REQUIRE(plan.labels.size() == 7);
    CHECK(plan.labels.front() == "on-1");
    CHECK(plan.labels.back() == "on-7");

    // hand-evaluated from the datasheet values
    const double r_g = 10.0, c_iss = 2e-9 + 571e-12, v_th = 5.9, g = 4.9;
    const double v_m = v_th + 15.0 / g, v_t3 = v_th + 7.5 / g;
    CHECK(plan.markers.v_th == doctest::Approx(v_th).epsilon(1e-12));
    CHECK(plan.markers.v_miller == doctest::Approx(v_m).epsilon(1e-12));
    CHECK(plan.durations[0] == doctest::Approx(r_g * c_iss * std::log(25.0 / (20.0 - v_th))).epsilon(1e-12));
    const double t43 = (r_g * c_iss * (v_m - v_t3) + 20e-9 * 7.5) / (20.0 - (v_m + v_t3) / 2.0);
    CHECK(plan.durations[2] == doctest::Approx(t43).epsilon(1e-12));
    CHECK(plan.markers.v_drop == doctest::Approx(150e-9 * 7.5 / t43).epsilon(1e-12));
    CHECK(plan.markers.v_ds0 == doctest::Approx(400.0 + 1.3 - plan.markers.v_drop).epsilon(1e-12));
    CHECK(plan.durations[6] == doctest::Approx(2.0 * r_g * c_iss).epsilon(1e-12));
    CHECK(plan.markers.i_peak > 15.0);
    CHECK(plan.markers.i_peak == doctest::Approx(15.0 + plan.osc.amplitude));
    // ring frequency from the stray loop and the diode-side capacitance at 400 V
    CHECK(plan.osc.omega == doctest::Approx(1.0 / std::sqrt(150e-9 * (61e-12 + 26e-12))).epsilon(1e-12));
}

TEST_CASE("turn-off overshoot follows the current-fall slope") {
    const auto s = fixture::profile();
    const auto plan = turn_off_stage_plan(s, kNominal);
    REQUIRE(plan.labels.size() == 5);
    const double t76 = plan.durations[3];
    REQUIRE(t76 > 0.0);
    CHECK(plan.markers.v_peak == doctest::Approx(400.0 + 1.3 + 150e-9 * plan.markers.i_t6 / t76).epsilon(1e-12));
    CHECK(plan.markers.i_t4 <= 15.0);
    CHECK(plan.markers.v_gs_t6 >= plan.markers.v_th);
    CHECK(plan.osc.omega == doctest::Approx(1.0 / std::sqrt(150e-9 * (11e-12 + 95e-12))).epsilon(1e-12));
}

TEST_CASE("stage records are contiguous and continuous") {
    const auto s = fixture::profile();
    for (const auto& r : {simulate_turn_on(s, kNominal), simulate_turn_off(s, kNominal)}) {
        for (std::size_t i = 1; i < r.stages.size(); ++i) {
            const auto& a = r.stages[i - 1];
            const auto& b = r.stages[i];
            CAPTURE(b.label);
            CHECK(a.t_end == b.t_start);
            const double t = a.t_end;
            CHECK(rel(a.v_gs.eval(t), b.v_gs.eval(t)) <= 1e-6);
            CHECK(std::abs(a.v_ds.eval(t) - b.v_ds.eval(t)) <= 1e-6 * 400.0);
            CHECK(std::abs(a.i_d.eval(t) - b.i_d.eval(t)) <= 1e-6 * 15.0);
        }
    }
}

TEST_CASE("diode and channel currents add up to the load current") {
    const auto s = fixture::profile();
    for (const auto& r : {simulate_turn_on(s, kNominal), simulate_turn_off(s, kNominal)})
        for (const auto& st : r.stages)
            for (int k = 0; k <= 16; ++k) {
                const double t = st.t_start + st.duration() * k / 16.0;
                CHECK(st.i_F.eval(t) + st.i_d.eval(t) == doctest::Approx(15.0).epsilon(1e-9));
            }
}

TEST_CASE("stage energies agree with a dense sampled trace") {
    const auto s = fixture::profile();
    const auto on = simulate_turn_on(s, kNominal);
    const auto off = simulate_turn_off(s, kNominal);
    const auto e_on = trace_energies(sample_trace(on, 2e-12));
    const auto e_off = trace_energies(sample_trace(off, 2e-12));
    CHECK(e_on.first == doctest::Approx(on.e_on_mos).epsilon(1e-3));
    CHECK(e_off.first == doctest::Approx(off.e_off_mos).epsilon(1e-3));
    CHECK(e_on.second == doctest::Approx(on.e_on_sbd).epsilon(2e-3));
    // nominal point as computed by this model
    CHECK(on.e_on_mos * 1e6 == doctest::Approx(167.92).epsilon(1e-3));
    CHECK(off.e_off_mos * 1e6 == doctest::Approx(65.70).epsilon(1e-3));
}

TEST_CASE("energies rise with gate resistance") {
    auto s = fixture::profile();
    double prev_on = 0.0, prev_off = 0.0;
    for (double ext : {0.0, 5.0, 10.0, 15.0}) {
        s.drive.r_g_ext = ext;
        const double on = simulate_turn_on(s, kNominal).e_on_mos;
        const double off = simulate_turn_off(s, kNominal).e_off_mos;
        CHECK(on > prev_on);
        CHECK(off > prev_off);
        prev_on = on;
        prev_off = off;
    }
}

TEST_CASE("sampled trace ends exactly on the last knot") {
    const auto on = simulate_turn_on(fixture::profile(), kNominal);
    const auto tr = sample_trace(on, 1e-10);
    REQUIRE(tr.size() > 2);
    CHECK(tr.t.front() == on.t_begin());
    CHECK(tr.t.back() == on.t_finish());
    CHECK(tr.p_mos[5] == doctest::Approx(tr.v_ds[5] * tr.i_d[5]));
    CHECK_THROWS_AS(sample_trace(on, 0.0), ValidationError);
    CHECK_THROWS_AS(sample_trace(on, 1e-6), ValidationError);
}

TEST_CASE("drive too weak to reach the plateau") {
    auto s = fixture::profile();
    s.drive.v_cc = 5.0;
    CHECK_THROWS_AS(simulate_turn_on(s, kNominal), NumericError);
    s.drive.v_cc = 7.0;  // above v_th, below the plateau
    CHECK_THROWS_AS(simulate_turn_on(s, kNominal), NumericError);
}

TEST_CASE("operating point validation") {
    const auto s = fixture::profile();
    CHECK_THROWS_AS(simulate_turn_on(s, {0.0, 15.0, 298.15}), ValidationError);
    CHECK_THROWS_AS(simulate_turn_off(s, {400.0, -1.0, 298.15}), ValidationError);
}

TEST_CASE("conduction loss") {
    const auto s = fixture::profile();
    const auto c = conduction_loss(s, 40.0, 0.5);
    CHECK(c.p_mos == doctest::Approx(0.5 * 1600.0 * 0.08));
    CHECK(c.p_sbd == doctest::Approx(0.5 * 40.0 * 1.3));
    CHECK_THROWS_AS(conduction_loss(s, 1.0, 1.5), DomainError);
}
