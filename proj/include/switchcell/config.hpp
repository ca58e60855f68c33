#pragma once

#include <map>
#include <string>
#include <vector>

#include "switchcell/multirate.hpp"
#include "switchcell/ode_oracle.hpp"
#include "switchcell/transient_engine.hpp"

namespace switchcell {

// Key = value text with [sections]. '#' and ';' start comments. Numbers take an
// optional unit suffix ("80 mohm", "571 pF", "25 C") and are stored in SI.

struct IniEntry {
    std::string value;
    std::string origin;  // file
    int line = 0;
};

/// section -> key -> entry, in file order of first appearance.
struct IniDocument {
    std::vector<std::string> section_order;
    std::map<std::string, std::map<std::string, IniEntry>> sections;

    const IniEntry* find(const std::string& section, const std::string& key) const;
};

/// Throws ValidationError naming origin:line for syntax errors and duplicate keys.
IniDocument parse_ini(const std::string& text, const std::string& origin);

/// Entries of `top` replace those of `base` key by key.
IniDocument overlay(IniDocument base, const IniDocument& top);

enum class Dim {
    None, Voltage, Current, Resistance, Capacitance, Inductance, ThermalR, ThermalC,
    Frequency, Time, Temperature, TempDelta, Transconductance, VoltPerK, TransPerK
};

/// Parses "<number>[ ]<unit>" into SI. An absent unit means SI already.
/// Throws ValidationError when the unit is unknown or of the wrong kind.
double parse_quantity(const std::string& text, Dim dim);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

struct RunConfig {
    std::string mode = "dpt-both";  // dpt-on | dpt-off | dpt-both | oracle | sweep | mission
    OperatingPoint op;
    double dt = 0.0;  // trace sample step; 0 picks one from the stage lengths
    std::string sweep_axis;  // r_g_ext | c_gd_ext | t_j | v_dc | i_l
    std::vector<double> sweep_values;
    std::string reference;  // resolved path, may be empty
    std::string rg_mode = "total";  // total: sweep values are R_G(int) + R_G(ext)
    double f_sw = 20e3;
    double r_load = 5.0;
    double l_load = 1e-3;
    double t_amb = 298.15;
    double horizon = 0.0;
    std::vector<DutyWindow> schedule;
    CouplerConfig coupler;
    double oracle_dt = 50e-12;
    double oracle_horizon = 400e-9;
    double oracle_edge = 20e-9;  // gate edge time inside the oracle run
};

struct LoadedConfig {
    RunConfig run;
    DeviceSet set;
    std::string origin;
};

/// `base_dir` resolves [run].profile and [run].reference.
LoadedConfig parse_config(const std::string& text, const std::string& origin, const std::string& base_dir);
LoadedConfig load_config(const std::string& path);

/// Normalised SI text; parse_config(serialize_config(x)) reproduces x.
std::string serialize_config(const LoadedConfig& cfg);

/// "key = value" line at round-trip precision.
std::string format_key(const std::string& key, double v);

std::vector<DutyWindow> parse_schedule(const std::string& text);

}  // namespace switchcell
