#pragma once

#include <functional>
#include <vector>

#include "switchcell/thermal.hpp"
#include "switchcell/transient_engine.hpp"

namespace switchcell {

enum class Direction { Rising, Falling };

struct CouplerConfig {
    double dt_min = 1e-5;
    double dt_max = 1e-2;
    double delta_t = 1.0;  // K
    double xi = 1e-4;      // s, additive growth
    bool adaptive = true;  // false: every exchange uses dt_min
};

void validate(const CouplerConfig& cfg);

struct CouplerState {
    double dt_th = 1e-5;
    double last_dT = 0.0;
    Direction direction = Direction::Rising;
    CouplerConfig cfg;
};

CouplerState coupler_start(const CouplerConfig& cfg);

/// Grow by xi while consecutive temperature changes differ by at most delta_t,
/// hold otherwise. The first falling step after a rise drops back to dt_min.
CouplerState coupler_next_step(const CouplerState& state, double dT_now);

struct DutyWindow {
    double t_start;
    double t_end;
    double duty;
};

struct Scenario {
    DeviceSet set;  // at the reference temperature
    double v_dc = 400.0;
    double f_sw = 20e3;
    std::vector<DutyWindow> schedule;
    double r_load = 5.0;
    double l_load = 1e-3;  // smoothing only, ripple ignored
    double t_amb = 298.15;
    double horizon = 1.0;
};

void validate(const Scenario& s);

/// Duty of the window containing t; the last window is closed at its end.
double duty_at(const std::vector<DutyWindow>& schedule, double t);

struct CyclePower {
    double p_mos = 0.0;
    double p_sbd = 0.0;
};

/// (E_on + E_off) f_sw plus conduction at the given duty, from a set already
/// corrected to op.t_j. Throws ValidationError if the transients do not fit
/// in one switching period.
CyclePower average_cycle_power(const DeviceSet& set, const OperatingPoint& op, double duty, double f_sw);

struct TrajectorySample {
    double t;
    double tj_mos;
    double tj_sbd;
    double tc;  // MOSFET case temperature
    double p_mos;  // average power applied over the step ending here
    double p_sbd;
    double dt_th;
};

struct TemperatureTrajectory {
    std::vector<TrajectorySample> samples;
    int exchange_count = 0;
    int electrical_evaluations = 0;  // cache misses
};

TemperatureTrajectory run_electrothermal(const Scenario& scenario, const CouplerConfig& cfg);

/// MOSFET junction temperature at t, linear between samples.
double interpolate_tj(const TemperatureTrajectory& tr, double t);

}  // namespace switchcell
