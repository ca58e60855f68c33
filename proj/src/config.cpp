#include "switchcell/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>

#include "switchcell/csv_io.hpp"
#include "switchcell/errors.hpp"

namespace switchcell {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

struct Unit {
    Dim dim;
    double scale;
    double offset = 0.0;
};

const std::map<std::string, Unit>& unit_table() {
    static const std::map<std::string, Unit> t = {
        {"V", {Dim::Voltage, 1.0}},          {"mV", {Dim::Voltage, 1e-3}},
        {"kV", {Dim::Voltage, 1e3}},         {"A", {Dim::Current, 1.0}},
        {"mA", {Dim::Current, 1e-3}},        {"ohm", {Dim::Resistance, 1.0}},
        {"mohm", {Dim::Resistance, 1e-3}},   {"kohm", {Dim::Resistance, 1e3}},
        {"F", {Dim::Capacitance, 1.0}},      {"uF", {Dim::Capacitance, 1e-6}},
        {"nF", {Dim::Capacitance, 1e-9}},    {"pF", {Dim::Capacitance, 1e-12}},
        {"H", {Dim::Inductance, 1.0}},       {"mH", {Dim::Inductance, 1e-3}},
        {"uH", {Dim::Inductance, 1e-6}},     {"nH", {Dim::Inductance, 1e-9}},
        {"K/W", {Dim::ThermalR, 1.0}},       {"J/K", {Dim::ThermalC, 1.0}},
        {"Ws/K", {Dim::ThermalC, 1.0}},      {"Hz", {Dim::Frequency, 1.0}},
        {"kHz", {Dim::Frequency, 1e3}},      {"MHz", {Dim::Frequency, 1e6}},
        {"s", {Dim::Time, 1.0}},             {"ms", {Dim::Time, 1e-3}},
        {"us", {Dim::Time, 1e-6}},           {"ns", {Dim::Time, 1e-9}},
        {"ps", {Dim::Time, 1e-12}},          {"K", {Dim::Temperature, 1.0}},
        {"C", {Dim::Temperature, 1.0, 273.15}}, {"A/V2", {Dim::Transconductance, 1.0}},
        {"V/K", {Dim::VoltPerK, 1.0}},       {"mV/K", {Dim::VoltPerK, 1e-3}},
        {"A/V2/K", {Dim::TransPerK, 1.0}},
    };
    return t;
}

const char* dim_name(Dim d) {
    switch (d) {
        case Dim::None: return "a plain number";
        case Dim::Voltage: return "a voltage";
        case Dim::Current: return "a current";
        case Dim::Resistance: return "a resistance";
        case Dim::Capacitance: return "a capacitance";
        case Dim::Inductance: return "an inductance";
        case Dim::ThermalR: return "a thermal resistance";
        case Dim::ThermalC: return "a thermal capacitance";
        case Dim::Frequency: return "a frequency";
        case Dim::Time: return "a time";
        case Dim::Temperature: return "a temperature";
        case Dim::TempDelta: return "a temperature difference";
        case Dim::Transconductance: return "a transconductance (A/V2)";
        case Dim::VoltPerK: return "a voltage coefficient (V/K)";
        case Dim::TransPerK: return "a coefficient in A/V2/K";
    }
    return "?";
}

enum class Rule { Any, Positive, NonNegative };

struct KeySpec {
    const char* key;
    Dim dim;
    Rule rule;
    bool list;
    bool required;
};

// string-valued keys use Dim::None with list = false and are read separately
const std::map<std::string, std::vector<KeySpec>>& schema() {
    static const std::map<std::string, std::vector<KeySpec>> s = {
        {"mosfet",
         {{"v_th0", Dim::Voltage, Rule::Any, false, true},
          {"k_fs", Dim::Transconductance, Rule::Positive, false, true},
          {"r_ds_on", Dim::Resistance, Rule::Positive, false, true},
          {"c_gs", Dim::Capacitance, Rule::Positive, false, true},
          {"c_gd", Dim::Capacitance, Rule::Positive, true, true},
          {"c_ds", Dim::Capacitance, Rule::Positive, true, true},
          {"cap_breakpoints", Dim::Voltage, Rule::Positive, true, false},
          {"v_max", Dim::Voltage, Rule::Positive, false, false},
          {"l_d", Dim::Inductance, Rule::NonNegative, false, true},
          {"l_s", Dim::Inductance, Rule::NonNegative, false, true},
          {"t_ref", Dim::Temperature, Rule::Positive, false, false},
          {"t_min", Dim::Temperature, Rule::Positive, false, false},
          {"t_max", Dim::Temperature, Rule::Positive, false, false},
          {"temp_a", Dim::VoltPerK, Rule::Any, false, false},
          {"temp_b", Dim::TransPerK, Rule::Any, false, false},
          {"temp_c", Dim::None, Rule::Any, false, false},
          {"temp_d", Dim::None, Rule::Any, false, false},
          {"temp_e", Dim::None, Rule::Any, false, false}}},
        {"sbd",
         {{"v_f0", Dim::Voltage, Rule::NonNegative, false, true},
          {"c_f", Dim::Capacitance, Rule::Positive, true, true},
          {"cap_breakpoints", Dim::Voltage, Rule::Positive, true, false},
          {"v_max", Dim::Voltage, Rule::Positive, false, false},
          {"l_sd", Dim::Inductance, Rule::NonNegative, false, false}}},
        {"drive",
         {{"v_cc", Dim::Voltage, Rule::Any, false, true},
          {"v_ee", Dim::Voltage, Rule::Any, false, true},
          {"r_g_int", Dim::Resistance, Rule::NonNegative, false, true},
          {"r_g_ext", Dim::Resistance, Rule::NonNegative, false, false},
          {"c_gd_ext", Dim::Capacitance, Rule::NonNegative, false, false}}},
        {"circuit",
         {{"l_p", Dim::Inductance, Rule::NonNegative, false, true},
          {"c_l", Dim::Capacitance, Rule::NonNegative, false, true},
          {"r_damp", Dim::Resistance, Rule::NonNegative, false, false}}},
        {"thermal.mosfet",
         {{"r", Dim::ThermalR, Rule::Positive, true, true},
          {"c", Dim::ThermalC, Rule::Positive, true, true},
          {"case_r", Dim::ThermalR, Rule::Positive, true, false},
          {"case_c", Dim::ThermalC, Rule::Positive, true, false}}},
        {"thermal.sbd",
         {{"r", Dim::ThermalR, Rule::Positive, true, true},
          {"c", Dim::ThermalC, Rule::Positive, true, true},
          {"case_r", Dim::ThermalR, Rule::Positive, true, false},
          {"case_c", Dim::ThermalC, Rule::Positive, true, false}}},
        {"run",
         {{"v_dc", Dim::Voltage, Rule::Positive, false, false},
          {"i_l", Dim::Current, Rule::Positive, false, false},
          {"t_j", Dim::Temperature, Rule::Positive, false, false},
          {"dt", Dim::Time, Rule::Positive, false, false},
          {"f_sw", Dim::Frequency, Rule::Positive, false, false},
          {"r_load", Dim::Resistance, Rule::Positive, false, false},
          {"l_load", Dim::Inductance, Rule::NonNegative, false, false},
          {"t_amb", Dim::Temperature, Rule::Positive, false, false},
          {"horizon", Dim::Time, Rule::Positive, false, false},
          {"dt_min", Dim::Time, Rule::Positive, false, false},
          {"dt_max", Dim::Time, Rule::Positive, false, false},
          {"xi", Dim::Time, Rule::Positive, false, false},
          {"delta_t", Dim::TempDelta, Rule::Positive, false, false},
          {"oracle_dt", Dim::Time, Rule::Positive, false, false},
          {"oracle_horizon", Dim::Time, Rule::Positive, false, false},
          {"oracle_edge", Dim::Time, Rule::Positive, false, false}}},
    };
    return s;
}

const std::vector<std::string>& run_string_keys() {
    static const std::vector<std::string> k = {"mode",         "profile",     "sweep_axis", "sweep_values",
                                               "reference",    "rg_mode",     "duty_schedule", "adaptive"};
    return k;
}

std::string where(const IniEntry& e, const std::string& section, const std::string& key) {
    return e.origin + ":" + std::to_string(e.line) + ": [" + section + "]." + key;
}

Dim sweep_dim(const std::string& axis) {
    if (axis == "r_g_ext") return Dim::Resistance;
    if (axis == "c_gd_ext") return Dim::Capacitance;
    if (axis == "t_j") return Dim::Temperature;
    if (axis == "v_dc") return Dim::Voltage;
    if (axis == "i_l") return Dim::Current;
    throw ValidationError("unknown sweep axis '" + axis + "' (expected r_g_ext, c_gd_ext, t_j, v_dc or i_l)");
}

// Reads the typed keys of one document into a flat map "section.key" -> values.
class Reader {
public:
    explicit Reader(const IniDocument& doc) : doc_(doc) {
        for (const auto& [sec, keys] : doc.sections) {
            const bool known = schema().count(sec) > 0;
            if (!known) {
                const auto& e = keys.begin()->second;
                throw ValidationError(e.origin + ":" + std::to_string(e.line) + ": unknown section [" + sec + "]");
            }
            for (const auto& [key, e] : keys) {
                if (sec == "run" && std::find(run_string_keys().begin(), run_string_keys().end(), key) !=
                                        run_string_keys().end())
                    continue;
                const auto& specs = schema().at(sec);
                auto it = std::find_if(specs.begin(), specs.end(), [&](const KeySpec& k) { return key == k.key; });
                if (it == specs.end()) throw ValidationError(where(e, sec, key) + ": unknown key");
            }
        }
    }

    bool has(const std::string& sec, const std::string& key) const { return doc_.find(sec, key) != nullptr; }

    const IniEntry& entry(const std::string& sec, const std::string& key) const {
        const IniEntry* e = doc_.find(sec, key);
        if (!e) throw ValidationError(origin() + ": missing required key [" + sec + "]." + key);
        return *e;
    }

    std::vector<double> values(const std::string& sec, const std::string& key) const {
        const auto& specs = schema().at(sec);
        const auto& spec = *std::find_if(specs.begin(), specs.end(), [&](const KeySpec& k) { return key == k.key; });
        const IniEntry& e = entry(sec, key);
        return parse_values(e, sec, key, spec.dim, spec.rule, spec.list);
    }

    double value(const std::string& sec, const std::string& key, double fallback) const {
        return has(sec, key) ? values(sec, key).front() : fallback;
    }

    double value(const std::string& sec, const std::string& key) const { return values(sec, key).front(); }

    std::string text(const std::string& sec, const std::string& key, const std::string& fallback) const {
        const IniEntry* e = doc_.find(sec, key);
        return e ? e->value : fallback;
    }

    void check_required() const {
        for (const auto& [sec, specs] : schema()) {
            if (sec == "run") continue;
            for (const auto& k : specs)
                if (k.required && !has(sec, k.key))
                    throw ValidationError(origin() + ": missing required key [" + sec + "]." + k.key);
        }
    }

    std::string origin() const {
        for (const auto& [sec, keys] : doc_.sections)
            for (const auto& [k, e] : keys) return e.origin;
        return "<config>";
    }

    static std::vector<double> parse_values(const IniEntry& e, const std::string& sec, const std::string& key,
                                            Dim dim, Rule rule, bool list) {
        auto items = split(e.value, ',');
        if (items.empty() || (items.size() == 1 && items[0].empty()))
            throw ValidationError(where(e, sec, key) + ": empty value");
        if (!list && items.size() > 1) throw ValidationError(where(e, sec, key) + ": expected a single value");
        // a trailing unit applies to bare numbers earlier in the list: "571, 15, 11 pF"
        std::string shared;
        {
            const std::string& last = items.back();
            double tmp;
            const auto r = std::from_chars(last.data(), last.data() + last.size(), tmp);
            if (r.ec == std::errc{}) shared = trim(std::string(r.ptr, static_cast<const char*>(last.data() + last.size())));
        }
        std::vector<double> out;
        for (const auto& it : items) {
            if (it.empty()) throw ValidationError(where(e, sec, key) + ": empty list item");
            double v;
            const auto r = std::from_chars(it.data(), it.data() + it.size(), v);
            const bool bare = r.ec == std::errc{} && trim(std::string(r.ptr, static_cast<const char*>(it.data() + it.size()))).empty();
            try {
                v = parse_quantity(bare && !shared.empty() ? it + " " + shared : it, dim);
            } catch (const ValidationError& ex) {
                throw ValidationError(where(e, sec, key) + ": " + ex.what());
            }
            if (rule == Rule::Positive && !(v > 0.0))
                throw ValidationError(where(e, sec, key) + " must be > 0 (got '" + it + "')");
            if (rule == Rule::NonNegative && !(v >= 0.0))
                throw ValidationError(where(e, sec, key) + " must be >= 0 (got '" + it + "')");
            out.push_back(v);
        }
        return out;
    }

private:
    const IniDocument& doc_;
};

FosterLadder read_ladder(const Reader& r, const std::string& sec) {
    const auto rs = r.values(sec, "r"), cs = r.values(sec, "c");
    if (rs.size() != cs.size())
        throw ValidationError(where(r.entry(sec, "c"), sec, "c") + ": needs one value per r entry (" +
                              std::to_string(rs.size()) + ")");
    FosterLadder l;
    for (std::size_t i = 0; i < rs.size(); ++i) l.stages.push_back({rs[i], cs[i]});
    // case-to-ambient path: not given by the datasheet, single default stage
    const auto cr = r.has(sec, "case_r") ? r.values(sec, "case_r") : std::vector<double>{0.5};
    const auto cc = r.has(sec, "case_c") ? r.values(sec, "case_c") : std::vector<double>{50.0};
    if (cr.size() != cc.size())
        throw ValidationError(r.origin() + ": [" + sec + "].case_r and case_c must have the same length");
    for (std::size_t i = 0; i < cr.size(); ++i) l.case_to_ambient.push_back({cr[i], cc[i]});
    return l;
}

PiecewiseCapacitance read_cap(const Reader& r, const std::string& sec, const std::string& key,
                              const std::vector<double>& bps, double v_max) {
    const auto vals = r.values(sec, key);
    if (vals.size() != bps.size() + 1)
        throw ValidationError(where(r.entry(sec, key), sec, key) + ": " + std::to_string(vals.size()) +
                              " values need " + std::to_string(vals.size() - 1) + " breakpoints, have " +
                              std::to_string(bps.size()));
    try {
        return PiecewiseCapacitance::from_values(vals, bps, v_max);
    } catch (const ValidationError& e) {
        throw ValidationError(where(r.entry(sec, key), sec, key) + ": " + e.what());
    }
}

bool parse_bool(const IniEntry& e, const std::string& key) {
    std::string v = e.value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ValidationError(where(e, "run", key) + ": expected true or false");
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += format_double(v[i]);
    }
    return s;
}

}  // namespace

const IniEntry* IniDocument::find(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

IniDocument parse_ini(const std::string& text, const std::string& origin) {
    IniDocument doc;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (t.empty()) continue;
        const std::string at = origin + ":" + std::to_string(lineno);
        if (t.front() == '[') {
            if (t.back() != ']') throw ValidationError(at + ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) throw ValidationError(at + ": empty section name");
            if (!doc.sections.count(section)) {
                doc.section_order.push_back(section);
                doc.sections[section];
            }
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ValidationError(at + ": expected key = value");
        if (section.empty()) throw ValidationError(at + ": key outside any [section]");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ValidationError(at + ": empty key");
        auto& keys = doc.sections[section];
        if (auto prev = keys.find(key); prev != keys.end())
            throw ValidationError(at + ": duplicate key [" + section + "]." + key + " (first set on line " +
                                  std::to_string(prev->second.line) + ", again on line " + std::to_string(lineno) +
                                  ")");
        keys[key] = {value, origin, lineno};
    }
    return doc;
}

IniDocument overlay(IniDocument base, const IniDocument& top) {
    for (const auto& sec : top.section_order) {
        if (!base.sections.count(sec)) base.section_order.push_back(sec);
        for (const auto& [k, e] : top.sections.at(sec)) base.sections[sec][k] = e;
    }
    return base;
}

double parse_quantity(const std::string& text, Dim dim) {
    const std::string t = trim(text);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (!t.empty() && t.front() == '+') ++first;
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc{} || !std::isfinite(v)) throw ValidationError("'" + t + "' is not a number");
    const std::string unit = trim(std::string(r.ptr, last));
    if (unit.empty()) return v;
    const auto& table = unit_table();
    auto it = table.find(unit);
    if (it == table.end()) throw ValidationError("unknown unit '" + unit + "'");
    const Unit& u = it->second;
    if (dim == Dim::TempDelta) {
        if (u.dim != Dim::Temperature)
            throw ValidationError("unit '" + unit + "' is not " + std::string(dim_name(dim)));
        return v * u.scale;  // a difference has no offset
    }
    if (u.dim != dim) throw ValidationError("unit '" + unit + "' is not " + std::string(dim_name(dim)));
    // dividing by the exact power of ten keeps "571 pF" identical to 571e-12
    if (u.scale < 1.0) return v / std::round(1.0 / u.scale) + u.offset;
    return v * u.scale + u.offset;
}

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string format_key(const std::string& key, double v) { return key + " = " + format_double(v) + "\n"; }

std::vector<DutyWindow> parse_schedule(const std::string& text) {
    std::vector<DutyWindow> out;
    for (const auto& item : split(text, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 3) throw ValidationError("duty window '" + item + "' must read t_start:t_end:duty");
        DutyWindow w{parse_quantity(parts[0], Dim::Time), parse_quantity(parts[1], Dim::Time),
                     parse_quantity(parts[2], Dim::None)};
        out.push_back(w);
    }
    return out;
}

LoadedConfig parse_config(const std::string& text, const std::string& origin, const std::string& base_dir) {
    IniDocument own = parse_ini(text, origin);
    IniDocument doc = own;
    if (const IniEntry* p = own.find("run", "profile")) {
        const fs::path prof = fs::path(base_dir) / p->value;
        std::string ptext;
        try {
            ptext = read_file(prof.string());
        } catch (const ValidationError&) {
            throw ValidationError(where(*p, "run", "profile") + ": cannot open " + prof.string());
        }
        IniDocument base = parse_ini(ptext, prof.string());
        if (base.sections.count("run"))
            throw ValidationError(prof.string() + ": a profile may not contain a [run] section");
        doc = overlay(std::move(base), own);
    }
    const Reader r(doc);
    r.check_required();

    LoadedConfig cfg;
    cfg.origin = origin;
    DeviceSet& s = cfg.set;
    auto& m = s.mosfet;
    const auto bps = r.has("mosfet", "cap_breakpoints") ? r.values("mosfet", "cap_breakpoints") : std::vector<double>{};
    const double v_max = r.value("mosfet", "v_max", 1200.0);
    m.v_th0 = r.value("mosfet", "v_th0");
    m.k_fs = r.value("mosfet", "k_fs");
    m.r_ds_on = r.value("mosfet", "r_ds_on");
    m.c_gs = r.value("mosfet", "c_gs");
    m.c_gd = read_cap(r, "mosfet", "c_gd", bps, v_max);
    m.c_ds = read_cap(r, "mosfet", "c_ds", bps, v_max);
    m.l_d = r.value("mosfet", "l_d");
    m.l_s = r.value("mosfet", "l_s");
    m.t_ref = r.value("mosfet", "t_ref", 298.15);
    m.t_min = r.value("mosfet", "t_min", 298.15);
    m.t_max = r.value("mosfet", "t_max", 423.15);
    m.temp = {r.value("mosfet", "temp_a", 0.0), r.value("mosfet", "temp_b", 0.0), r.value("mosfet", "temp_c", 0.0),
              r.value("mosfet", "temp_d", 0.0), r.value("mosfet", "temp_e", 1.0)};

    const auto sbps = r.has("sbd", "cap_breakpoints") ? r.values("sbd", "cap_breakpoints") : bps;
    s.sbd.v_f0 = r.value("sbd", "v_f0");
    s.sbd.c_f = read_cap(r, "sbd", "c_f", sbps, r.value("sbd", "v_max", v_max));
    s.sbd.l_sd = r.value("sbd", "l_sd", 0.0);

    s.drive = {r.value("drive", "v_cc"), r.value("drive", "v_ee"), r.value("drive", "r_g_int"),
               r.value("drive", "r_g_ext", 0.0), r.value("drive", "c_gd_ext", 0.0)};
    s.circuit = {r.value("circuit", "l_p"), r.value("circuit", "c_l"), r.value("circuit", "r_damp", 0.0)};
    s.thermal_mos = read_ladder(r, "thermal.mosfet");
    s.thermal_sbd = read_ladder(r, "thermal.sbd");
    try {
        validate(s);
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }

    RunConfig& run = cfg.run;
    run.mode = r.text("run", "mode", "dpt-both");
    static const std::vector<std::string> modes = {"dpt-on", "dpt-off", "dpt-both", "oracle", "sweep", "mission"};
    if (std::find(modes.begin(), modes.end(), run.mode) == modes.end())
        throw ValidationError(where(r.entry("run", "mode"), "run", "mode") + ": unknown mode '" + run.mode + "'");
    run.op = {r.value("run", "v_dc", 400.0), r.value("run", "i_l", 15.0), r.value("run", "t_j", m.t_ref)};
    run.dt = r.value("run", "dt", 0.0);
    run.rg_mode = r.text("run", "rg_mode", "total");
    if (run.rg_mode != "total" && run.rg_mode != "external")
        throw ValidationError(where(r.entry("run", "rg_mode"), "run", "rg_mode") + ": expected total or external");
    run.f_sw = r.value("run", "f_sw", 20e3);
    run.r_load = r.value("run", "r_load", 5.0);
    run.l_load = r.value("run", "l_load", 1e-3);
    run.t_amb = r.value("run", "t_amb", 298.15);
    run.horizon = r.value("run", "horizon", 0.0);
    run.coupler.dt_min = r.value("run", "dt_min", 1e-5);
    run.coupler.dt_max = r.value("run", "dt_max", 1e-2);
    run.coupler.xi = r.value("run", "xi", 1e-4);
    run.coupler.delta_t = r.value("run", "delta_t", 1.0);
    if (const IniEntry* e = doc.find("run", "adaptive")) run.coupler.adaptive = parse_bool(*e, "adaptive");
    run.oracle_dt = r.value("run", "oracle_dt", 50e-12);
    run.oracle_horizon = r.value("run", "oracle_horizon", 400e-9);
    run.oracle_edge = r.value("run", "oracle_edge", 20e-9);
    if (const IniEntry* e = doc.find("run", "reference"))
        run.reference = fs::absolute(fs::path(base_dir) / e->value).lexically_normal().string();

    if (const IniEntry* e = doc.find("run", "sweep_axis")) {
        run.sweep_axis = e->value;
        try {
            sweep_dim(run.sweep_axis);
        } catch (const ValidationError& ex) {
            throw ValidationError(where(*e, "run", "sweep_axis") + ": " + ex.what());
        }
        if (const IniEntry* v = doc.find("run", "sweep_values"))
            run.sweep_values = Reader::parse_values(*v, "run", "sweep_values", sweep_dim(run.sweep_axis), Rule::Any,
                                                    true);
    }
    if (const IniEntry* e = doc.find("run", "duty_schedule")) {
        try {
            run.schedule = parse_schedule(e->value);
        } catch (const ValidationError& ex) {
            throw ValidationError(where(*e, "run", "duty_schedule") + ": " + ex.what());
        }
    }

    if (run.mode == "sweep") {
        if (run.sweep_axis.empty()) throw ValidationError(origin + ": sweep mode needs [run].sweep_axis");
        if (run.sweep_values.empty()) throw ValidationError(origin + ": sweep mode needs [run].sweep_values");
    }
    if (run.mode == "mission") {
        if (run.schedule.empty()) throw ValidationError(origin + ": mission mode needs [run].duty_schedule");
        if (!(run.horizon > 0.0)) run.horizon = run.schedule.back().t_end;
    }
    try {
        validate(run.op);
        validate(run.coupler);
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
    return cfg;
}

LoadedConfig load_config(const std::string& path) {
    const std::string text = read_file(path);
    return parse_config(text, path, fs::path(path).parent_path().string());
}

std::string serialize_config(const LoadedConfig& cfg) {
    const DeviceSet& s = cfg.set;
    const auto& m = s.mosfet;
    std::ostringstream o;
    o << "[mosfet]\n"
      << format_key("v_th0", m.v_th0) << format_key("k_fs", m.k_fs) << format_key("r_ds_on", m.r_ds_on)
      << format_key("c_gs", m.c_gs) << "c_gd = " << join(m.c_gd.values()) << "\n"
      << "c_ds = " << join(m.c_ds.values()) << "\n";
    if (!m.c_gd.breakpoints().empty()) o << "cap_breakpoints = " << join(m.c_gd.breakpoints()) << "\n";
    o << format_key("v_max", m.c_gd.v_max()) << format_key("l_d", m.l_d) << format_key("l_s", m.l_s)
      << format_key("t_ref", m.t_ref) << format_key("t_min", m.t_min) << format_key("t_max", m.t_max)
      << format_key("temp_a", m.temp.a) << format_key("temp_b", m.temp.b) << format_key("temp_c", m.temp.c)
      << format_key("temp_d", m.temp.d) << format_key("temp_e", m.temp.e);
    o << "\n[sbd]\n" << format_key("v_f0", s.sbd.v_f0) << "c_f = " << join(s.sbd.c_f.values()) << "\n";
    if (!s.sbd.c_f.breakpoints().empty()) o << "cap_breakpoints = " << join(s.sbd.c_f.breakpoints()) << "\n";
    o << format_key("v_max", s.sbd.c_f.v_max()) << format_key("l_sd", s.sbd.l_sd);
    o << "\n[drive]\n"
      << format_key("v_cc", s.drive.v_cc) << format_key("v_ee", s.drive.v_ee)
      << format_key("r_g_int", s.drive.r_g_int) << format_key("r_g_ext", s.drive.r_g_ext)
      << format_key("c_gd_ext", s.drive.c_gd_ext);
    o << "\n[circuit]\n"
      << format_key("l_p", s.circuit.l_p) << format_key("c_l", s.circuit.c_l)
      << format_key("r_damp", s.circuit.r_damp);
    auto ladder = [&](const char* name, const FosterLadder& l) {
        std::vector<double> r, c, cr, cc;
        for (const auto& st : l.stages) {
            r.push_back(st.r_th);
            c.push_back(st.c_th);
        }
        for (const auto& st : l.case_to_ambient) {
            cr.push_back(st.r_th);
            cc.push_back(st.c_th);
        }
        o << "\n[" << name << "]\n"
          << "r = " << join(r) << "\nc = " << join(c) << "\n";
        if (!cr.empty()) o << "case_r = " << join(cr) << "\ncase_c = " << join(cc) << "\n";
    };
    ladder("thermal.mosfet", s.thermal_mos);
    ladder("thermal.sbd", s.thermal_sbd);

    const RunConfig& run = cfg.run;
    o << "\n[run]\n"
      << "mode = " << run.mode << "\n"
      << format_key("v_dc", run.op.v_dc) << format_key("i_l", run.op.i_l) << format_key("t_j", run.op.t_j);
    if (run.dt > 0.0) o << format_key("dt", run.dt);
    if (!run.sweep_axis.empty()) o << "sweep_axis = " << run.sweep_axis << "\n";
    if (!run.sweep_values.empty()) o << "sweep_values = " << join(run.sweep_values) << "\n";
    if (!run.reference.empty()) o << "reference = " << run.reference << "\n";
    o << "rg_mode = " << run.rg_mode << "\n"
      << format_key("f_sw", run.f_sw) << format_key("r_load", run.r_load) << format_key("l_load", run.l_load)
      << format_key("t_amb", run.t_amb);
    if (run.horizon > 0.0) o << format_key("horizon", run.horizon);
    if (!run.schedule.empty()) {
        o << "duty_schedule = ";
        for (std::size_t i = 0; i < run.schedule.size(); ++i) {
            const auto& w = run.schedule[i];
            o << (i ? ", " : "") << format_double(w.t_start) << ":" << format_double(w.t_end) << ":"
              << format_double(w.duty);
        }
        o << "\n";
    }
    o << format_key("dt_min", run.coupler.dt_min) << format_key("dt_max", run.coupler.dt_max)
      << format_key("xi", run.coupler.xi) << format_key("delta_t", run.coupler.delta_t)
      << "adaptive = " << (run.coupler.adaptive ? "true" : "false") << "\n"
      << format_key("oracle_dt", run.oracle_dt) << format_key("oracle_horizon", run.oracle_horizon)
      << format_key("oracle_edge", run.oracle_edge);
    return o.str();
}

}  // namespace switchcell
