#pragma once

#include <string>
#include <vector>

#include "switchcell/multirate.hpp"
#include "switchcell/transient_engine.hpp"

namespace switchcell {

inline constexpr const char* kTraceHeader = "time_s,v_gs_V,v_ds_V,i_d_A,v_F_V,i_F_A,p_mos_W,p_sbd_W";

std::string trace_csv(const WaveformTrace& trace);
/// Inverse of trace_csv; bit-identical for anything trace_csv wrote.
WaveformTrace parse_trace_csv(const std::string& text);

std::string trajectory_csv(const TemperatureTrajectory& tr);
std::string step_size_csv(const TemperatureTrajectory& tr);

/// Throws ValidationError when the file cannot be written.
void write_file(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

}  // namespace switchcell
