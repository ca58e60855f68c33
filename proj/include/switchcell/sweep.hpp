#pragma once

#include <string>
#include <vector>

#include "switchcell/config.hpp"

namespace switchcell {

struct EdgePair {
    TransientResult on;
    TransientResult off;
    double e_on() const { return on.e_on_mos; }
    double e_off() const { return off.e_off_mos; }
    double e_total() const { return on.e_on_mos + off.e_off_mos; }
};

/// Both edges at op, with the MOSFET corrected to op.t_j first.
EdgePair simulate_pair(const DeviceSet& set, const OperatingPoint& op);

/// Applies one sweep value to copies of the set and operating point.
void apply_axis(const std::string& axis, double value, const std::string& rg_mode, DeviceSet& set,
                OperatingPoint& op);

struct ReferenceRow {
    double value;
    double e_on, e_off, e_total;  // J
};

/// CSV: header, then "value, E_on, E_off, E_total" with energies in uJ. The
/// value column may carry a unit suffix ("16.5 pF").
std::vector<ReferenceRow> read_reference(const std::string& path, const std::string& axis);

struct SweepRow {
    double value = 0.0;
    bool ok = false;
    std::string error;
    double e_on = 0.0, e_off = 0.0, e_total = 0.0;
    bool has_ref = false;
    ReferenceRow ref{};
    double dev_on = 0.0, dev_off = 0.0, dev_total = 0.0;  // |sim - ref| / ref
};

/// Rows run on a worker pool; a failing row is marked and the rest continue.
std::vector<SweepRow> run_sweep(const LoadedConfig& cfg, unsigned threads = 0);

std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& axis);
std::string sweep_text(const std::vector<SweepRow>& rows, const std::string& axis);

}  // namespace switchcell
