#pragma once

#include <limits>
#include <string>
#include <vector>

#include "switchcell/device_model.hpp"
#include "switchcell/waveform.hpp"

namespace switchcell {

struct OperatingPoint {
    double v_dc = 400.0;
    double i_l = 15.0;
    double t_j = 298.15;
};

void validate(const OperatingPoint& op);

struct StageRecord {
    std::string label;
    double t_start = 0.0;
    double t_end = 0.0;
    Waveform v_gs, v_ds, i_d, v_F, i_F;
    double e_mos = 0.0;
    double e_sbd = 0.0;
    /// Printed closed-form energies where they are dimensionally sound; NaN otherwise.
    double e_mos_closed = std::numeric_limits<double>::quiet_NaN();
    double e_sbd_closed = std::numeric_limits<double>::quiet_NaN();

    double duration() const { return t_end - t_start; }
};

struct OscillationParams {
    double alpha = 0.0;
    double omega = 0.0;
    double amplitude = 0.0;
};

struct Markers {
    double v_th = 0.0;
    double v_miller = 0.0;
    double v_gs_t3 = 0.0;
    double v_ds0 = 0.0;
    double v_drop = 0.0;
    double i_peak = 0.0;
    double v_gs_peak = 0.0;
    double v_ds_on = 0.0;
    double i_t4 = 0.0;
    double v_peak = 0.0;
    double i_t6 = 0.0;
    double v_gs_t6 = 0.0;
};

/// Durations in stage order. Turn-on: on-1 .. on-7. Turn-off: off-1 .. off-5.
struct StagePlan {
    std::vector<std::string> labels;
    std::vector<double> durations;
    Markers markers;
    OscillationParams osc;
    std::vector<std::string> warnings;
    double total() const;
};

struct TransientResult {
    std::vector<StageRecord> stages;
    double e_on_mos = 0.0, e_off_mos = 0.0, e_on_sbd = 0.0, e_off_sbd = 0.0;
    Markers markers;
    OscillationParams osc;
    double i_l = 0.0;
    std::vector<std::string> warnings;
    std::vector<std::string> notes;

    double t_begin() const { return stages.empty() ? 0.0 : stages.front().t_start; }
    double t_finish() const { return stages.empty() ? 0.0 : stages.back().t_end; }
    double e_mos() const { return e_on_mos + e_off_mos; }
    double e_sbd() const { return e_on_sbd + e_off_sbd; }
};

struct WaveformTrace {
    std::vector<double> t, v_gs, v_ds, i_d, v_F, i_F, p_mos, p_sbd;
    std::size_t size() const { return t.size(); }
    void reserve(std::size_t n);
};

/// Simpson points per stage (odd). At least 513.
inline constexpr std::size_t kStagePoints = 1025;

StagePlan turn_on_stage_plan(const DeviceSet& set, const OperatingPoint& op);
StagePlan turn_off_stage_plan(const DeviceSet& set, const OperatingPoint& op);

enum class Edge { On, Off };
OscillationParams oscillation_params(const DeviceSet& set, const OperatingPoint& op, Edge edge,
                                     const Markers& markers);

/// Both take the device set already corrected to op.t_j.
TransientResult simulate_turn_on(const DeviceSet& set, const OperatingPoint& op);
TransientResult simulate_turn_off(const DeviceSet& set, const OperatingPoint& op);

struct ConductionLoss {
    double p_mos = 0.0;
    double p_sbd = 0.0;
};
ConductionLoss conduction_loss(const DeviceSet& set, double i, double duty);

/// Uniform samples from t_begin; the last sample lands exactly on t_finish.
/// Throws ValidationError if dt is not below the shortest stage.
WaveformTrace sample_trace(const TransientResult& result, double dt);

/// Trapezoidal energies of a trace: {mos, sbd}.
std::pair<double, double> trace_energies(const WaveformTrace& trace);

}  // namespace switchcell
