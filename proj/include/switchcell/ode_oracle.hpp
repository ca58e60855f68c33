#pragma once

#include <utility>
#include <vector>

#include "switchcell/transient_engine.hpp"

namespace switchcell {

/// Full switching-cell state. v_F only evolves while the diode blocks.
struct CircuitState {
    double v_gs = 0.0;
    double v_ds = 0.0;
    double i_d = 0.0;
    double v_F = 0.0;
    bool diode_on = true;
    // derived at the same instant
    double i_g = 0.0, i_ch = 0.0, i_gd = 0.0, i_ds = 0.0, i_F = 0.0;
};

struct GateEvent {
    double time;
    double level;  // drive voltage from this time on
};

struct OracleOptions {
    double dt = 50e-12;
    double horizon = 400e-9;
    double newton_tol = 1e-9;  // on the scaled residual
    int newton_max_iter = 50;
    int max_halvings = 12;
    double event_resolution = 1e-12;
};

struct OracleRun {
    WaveformTrace trace;
    CircuitState final_state;
    /// Largest |i_d - i_ch - i_gd - i_ds| and |I_L - i_F - i_d| seen on accepted steps.
    double max_kcl_residual = 0.0;
    double max_kirchhoff_residual = 0.0;
    double peak_i_d = 0.0;
    double peak_v_ds = 0.0;
    int diode_events = 0;
    int newton_failures = 0;
    // integrated alongside the solve over the full horizon
    double e_supply = 0.0;   // V_DC * i_d
    double e_load = 0.0;     // -v_F * I_L
    double e_stored = 0.0;   // change in loop-inductance energy
    double e_mos = 0.0;
    double e_sbd = 0.0;
};

/// Largest LC resonance of the cell, used for the step-size bound dt <= 1/(20 w).
double fastest_resonance(const DeviceSet& set, const OperatingPoint& op);

/// Integrates the switching cell from the steady state implied by the first
/// gate level. Throws ValidationError for a dt that is too coarse and
/// NumericError when Newton keeps failing after step halving.
OracleRun integrate_dpt(const DeviceSet& set, const OperatingPoint& op, const std::vector<GateEvent>& gate,
                        const OracleOptions& opts = {});

/// Trapezoidal {mos, sbd} energies of the trace over [t_a, t_b]; ends are
/// linearly interpolated. Throws DomainError for an empty or out-of-range window.
std::pair<double, double> energies_from_trace(const WaveformTrace& trace, double t_a, double t_b);

/// Energies from t_a to t_b averaged over one ring period past t_b. The
/// after-edge ring trades energy between the loop inductance and the device
/// capacitances, so a hard cut at t_b would count a phase-dependent share of it.
std::pair<double, double> settled_energies(const WaveformTrace& trace, double t_a, double t_b, double period,
                                           int samples = 64);

}  // namespace switchcell
