#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "fixture.hpp"
#include "switchcell/config.hpp"
#include "switchcell/csv_io.hpp"
#include "switchcell/errors.hpp"
#include "switchcell/sweep.hpp"

using namespace switchcell;
namespace fs = std::filesystem;

namespace {

std::string profile_text() { return read_file(fixture::data("profiles/cmf20120d.ini")); }

LoadedConfig parse(const std::string& text) { return parse_config(text, "t.ini", fixture::data("configs")); }

std::string with_run(const std::string& run) { return profile_text() + "\n[run]\n" + run; }

std::string replace_line(std::string text, const std::string& key_prefix, const std::string& line) {
    const auto at = text.find("\n" + key_prefix);
    REQUIRE(at != std::string::npos);
    const auto end = text.find('\n', at + 1);
    return text.replace(at + 1, end - at - 1, line);
}

}  // namespace

TEST_CASE("units are parsed into SI") {
    CHECK(parse_quantity("80 mohm", Dim::Resistance) == doctest::Approx(0.08));
    CHECK(parse_quantity("571pF", Dim::Capacitance) == doctest::Approx(571e-12));
    CHECK(parse_quantity("25 C", Dim::Temperature) == doctest::Approx(298.15));
    CHECK(parse_quantity("300 K", Dim::Temperature) == 300.0);
    CHECK(parse_quantity("1000 uH", Dim::Inductance) == doctest::Approx(1e-3));
    CHECK(parse_quantity("20 kHz", Dim::Frequency) == 20e3);
    CHECK(parse_quantity("-5", Dim::Voltage) == -5.0);
    CHECK(parse_quantity("1 C", Dim::TempDelta) == 1.0);
    CHECK_THROWS_WITH_AS(parse_quantity("10 furlongs", Dim::Voltage), doctest::Contains("unknown unit"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(parse_quantity("10 pF", Dim::Voltage), doctest::Contains("not a voltage"), ValidationError);
    CHECK_THROWS_AS(parse_quantity("abc", Dim::None), ValidationError);
    CHECK_THROWS_AS(parse_quantity("nan", Dim::None), ValidationError);
}

TEST_CASE("format_double round-trips") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::ldexp(u(rng), static_cast<int>(u(rng)));
        CHECK(parse_quantity(format_double(v), Dim::None) == v);
    }
}

TEST_CASE("bundled config loads") {
    const auto cfg = fixture::nominal();
    CHECK(cfg.run.mode == "dpt-both");
    CHECK(cfg.run.op.v_dc == 400.0);
    CHECK(cfg.run.op.i_l == 15.0);
    CHECK(cfg.run.op.t_j == doctest::Approx(298.15));
    CHECK(cfg.set.mosfet.l_s == doctest::Approx(20e-9));
}

TEST_CASE("negative resistance names the key and line") {
    const auto text = replace_line(with_run("mode = dpt-on\n"), "r_ds_on", "r_ds_on = -1 mohm");
    CHECK_THROWS_WITH_AS(parse(text), doctest::Contains("[mosfet].r_ds_on must be > 0"), ValidationError);
    CHECK_THROWS_WITH_AS(parse(text), doctest::Contains("t.ini:"), ValidationError);
}

TEST_CASE("duplicate key reports both lines") {
    const std::string text = "[drive]\nv_cc = 20 V\nv_ee = -5 V\nv_cc = 18 V\n";
    CHECK_THROWS_WITH_AS(parse_ini(text, "d.ini"), doctest::Contains("first set on line 2, again on line 4"),
                         ValidationError);
}

TEST_CASE("syntax and schema errors") {
    CHECK_THROWS_WITH_AS(parse_ini("[drive\n", "x.ini"), doctest::Contains("x.ini:1"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_ini("v = 1\n", "x.ini"), doctest::Contains("outside any [section]"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_ini("[a]\nnovalue\n", "x.ini"), doctest::Contains("key = value"), ValidationError);
    CHECK_THROWS_WITH_AS(parse(with_run("bogus = 1\n")), doctest::Contains("unknown key"), ValidationError);
    CHECK_THROWS_WITH_AS(parse(profile_text() + "\n[extra]\nx = 1\n"), doctest::Contains("unknown section"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(parse(replace_line(profile_text(), "c_gs", "c_gs = 2 nH")),
                         doctest::Contains("[mosfet].c_gs"), ValidationError);
    CHECK_THROWS_WITH_AS(parse(replace_line(profile_text(), "k_fs", "# removed")),
                         doctest::Contains("missing required key [mosfet].k_fs"), ValidationError);
    CHECK_THROWS_WITH_AS(parse(replace_line(profile_text(), "c_gd", "c_gd = 571, 15 pF")),
                         doctest::Contains("[mosfet].c_gd"), ValidationError);
    CHECK_THROWS_WITH_AS(parse(with_run("mode = warp\n")), doctest::Contains("unknown mode"), ValidationError);
}

TEST_CASE("mode requirements") {
    CHECK_THROWS_WITH_AS(parse(with_run("mode = sweep\n")), doctest::Contains("sweep_axis"), ValidationError);
    CHECK_THROWS_WITH_AS(parse(with_run("mode = sweep\nsweep_axis = t_j\n")), doctest::Contains("sweep_values"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(parse(with_run("mode = mission\n")), doctest::Contains("duty_schedule"), ValidationError);
    CHECK_THROWS_AS(parse(with_run("mode = sweep\nsweep_axis = colour\nsweep_values = 1\n")), ValidationError);
    const auto m = parse(with_run("mode = mission\nduty_schedule = 0:1:0.5, 1:3 s:0.3\n"));
    CHECK(m.run.horizon == 3.0);
    REQUIRE(m.run.schedule.size() == 2);
    CHECK(m.run.schedule[1].duty == 0.3);
}

TEST_CASE("profile overlay") {
    const auto cfg = parse("[run]\nprofile = ../profiles/cmf20120d.ini\n[drive]\nr_g_ext = 0\n");
    CHECK(cfg.set.drive.r_g_ext == 0.0);
    CHECK(cfg.set.drive.r_g_int == 5.0);
    CHECK_THROWS_WITH_AS(parse("[run]\nprofile = nowhere.ini\n"), doctest::Contains("cannot open"), ValidationError);
}

TEST_CASE("serialized config parses back to the same objects") {
    for (const char* name : {"dpt_25C.ini", "oracle_25C.ini", "sweep_rg.ini", "sweep_cgd.ini", "mission_duty.ini"}) {
        CAPTURE(name);
        const auto a = load_config(fixture::data(std::string("configs/") + name));
        const auto text = serialize_config(a);
        const auto b = parse_config(text, "round", "/");
        CHECK(b.set == a.set);
        CHECK(b.run.mode == a.run.mode);
        CHECK(b.run.op.v_dc == a.run.op.v_dc);
        CHECK(b.run.op.t_j == a.run.op.t_j);
        CHECK(b.run.sweep_values == a.run.sweep_values);
        CHECK(b.run.reference == a.run.reference);
        CHECK(b.run.schedule.size() == a.run.schedule.size());
        CHECK(b.run.coupler.xi == a.run.coupler.xi);
        CHECK(serialize_config(b) == text);
    }
}

TEST_CASE("trace csv: header, empty trace and bit-identical round trip") {
    WaveformTrace empty;
    CHECK(trace_csv(empty) == std::string(kTraceHeader) + "\n");
    CHECK(parse_trace_csv(trace_csv(empty)).size() == 0);

    const auto cfg = fixture::nominal();
    const auto on = simulate_turn_on(at_temperature(cfg.set, cfg.run.op.t_j), cfg.run.op);
    const auto tr = sample_trace(on, 1e-10);
    const auto back = parse_trace_csv(trace_csv(tr));
    REQUIRE(back.size() == tr.size());
    CHECK(std::memcmp(back.t.data(), tr.t.data(), tr.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(back.v_ds.data(), tr.v_ds.data(), tr.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(back.i_d.data(), tr.i_d.data(), tr.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(back.p_sbd.data(), tr.p_sbd.data(), tr.size() * sizeof(double)) == 0);
    CHECK_THROWS_AS(parse_trace_csv("time_s,wrong\n"), ValidationError);
}

TEST_CASE("trajectory and step-size csv headers") {
    TemperatureTrajectory tr;
    tr.samples.push_back({0.0, 298.15, 298.15, 298.15, 10.0, 2.0, 0.0});
    tr.samples.push_back({1e-5, 299.15, 298.65, 298.15, 10.0, 2.0, 1e-5});
    const auto t = trajectory_csv(tr);
    CHECK(t.rfind("time_s,p_mos_W,p_sbd_W,tj_mos_C,tj_sbd_C,tc_C\n", 0) == 0);
    CHECK(t.find("\n1e-05,10,2,") != std::string::npos);
    CHECK(step_size_csv(tr).rfind("time_s,dt_th_s\n", 0) == 0);
}

TEST_CASE("write_file reports unwritable paths") {
    CHECK_THROWS_AS(write_file("/nonexistent-dir/x/y.csv", "a"), ValidationError);
    CHECK_THROWS_AS(read_file("/nonexistent-dir/x/y.csv"), ValidationError);
}

TEST_CASE("single-value sweep equals a plain double-pulse run") {
    auto cfg = load_config(fixture::data("configs/sweep_rg.ini"));
    cfg.run.sweep_values = {10.0};
    const auto rows = run_sweep(cfg, 1);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].ok);
    const auto plain = simulate_pair(cfg.set, cfg.run.op);
    CHECK(rows[0].e_on == plain.e_on());
    CHECK(rows[0].e_off == plain.e_off());
    CHECK(rows[0].has_ref);
    CHECK(rows[0].dev_total == doctest::Approx(std::abs(plain.e_total() - 249.064e-6) / 249.064e-6));
}

TEST_CASE("sweep rows keep their order on any thread count") {
    const auto cfg = load_config(fixture::data("configs/sweep_cgd.ini"));
    const auto a = run_sweep(cfg, 1);
    const auto b = run_sweep(cfg, 4);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].value == b[i].value);
        CHECK(a[i].e_total == b[i].e_total);
        CHECK(a[i].has_ref);
    }
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i].e_total >= a[i - 1].e_total);
    CHECK(a[2].ref.e_total == doctest::Approx(385.385e-6));
}

TEST_CASE("a failing row is marked and the sweep continues") {
    auto cfg = load_config(fixture::data("configs/sweep_rg.ini"));
    cfg.run.sweep_values = {2.0, 10.0};  // 2 ohm total is below R_G(int)
    const auto rows = run_sweep(cfg, 2);
    CHECK_FALSE(rows[0].ok);
    CHECK(rows[0].error.find("below R_G(int)") != std::string::npos);
    CHECK(rows[1].ok);
    const auto csv = sweep_csv(rows, "r_g_ext");
    CHECK(csv.find("failed:") != std::string::npos);
    CHECK(sweep_text(rows, "r_g_ext").find("failed:") != std::string::npos);
}

TEST_CASE("reference table parsing") {
    const auto refs = read_reference(fixture::data("reference/cgd_sweep.csv"), "c_gd_ext");
    REQUIRE(refs.size() == 4);
    CHECK(refs[1].value == doctest::Approx(16.5e-12));
    CHECK(refs[1].e_on == doctest::Approx(205.414e-6));
    const auto tmp = fs::temp_directory_path() / "switchcell_bad_ref.csv";
    write_file(tmp.string(), "v,a,b,c\n1,2,3\n");
    CHECK_THROWS_WITH_AS(read_reference(tmp.string(), "t_j"), doctest::Contains(":2: expected 4 columns"),
                         ValidationError);
    fs::remove(tmp);
}
