#include "switchcell/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "switchcell/csv_io.hpp"
#include "switchcell/errors.hpp"

namespace switchcell {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

Dim axis_dim(const std::string& axis) {
    if (axis == "r_g_ext") return Dim::Resistance;
    if (axis == "c_gd_ext") return Dim::Capacitance;
    if (axis == "t_j") return Dim::Temperature;
    if (axis == "v_dc") return Dim::Voltage;
    if (axis == "i_l") return Dim::Current;
    throw ValidationError("unknown sweep axis '" + axis + "'");
}

// value in the unit people read the axis in
std::pair<double, const char*> display(const std::string& axis, double v) {
    if (axis == "c_gd_ext") return {v * 1e12, "pF"};
    if (axis == "t_j") return {v - 273.15, "C"};
    if (axis == "r_g_ext") return {v, "ohm"};
    if (axis == "v_dc") return {v, "V"};
    return {v, "A"};
}

std::string num(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

}  // namespace

EdgePair simulate_pair(const DeviceSet& set, const OperatingPoint& op) {
    const DeviceSet hot = at_temperature(set, op.t_j);
    return {simulate_turn_on(hot, op), simulate_turn_off(hot, op)};
}

void apply_axis(const std::string& axis, double value, const std::string& rg_mode, DeviceSet& set,
                OperatingPoint& op) {
    if (axis == "r_g_ext") {
        const double ext = rg_mode == "total" ? value - set.drive.r_g_int : value;
        if (ext < -1e-12)
            throw ValidationError("sweep value R_G = " + format_double(value) + " ohm is below R_G(int) = " +
                                  format_double(set.drive.r_g_int) + " ohm");
        set.drive.r_g_ext = std::max(0.0, ext);
    } else if (axis == "c_gd_ext") {
        set.drive.c_gd_ext = value;
    } else if (axis == "t_j") {
        op.t_j = value;
    } else if (axis == "v_dc") {
        op.v_dc = value;
    } else if (axis == "i_l") {
        op.i_l = value;
    } else {
        throw ValidationError("unknown sweep axis '" + axis + "'");
    }
    validate(set.drive);
}

std::vector<ReferenceRow> read_reference(const std::string& path, const std::string& axis) {
    const Dim dim = axis_dim(axis);
    std::istringstream in(read_file(path));
    std::string line;
    std::vector<ReferenceRow> out;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(t);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(trim(c));
        const std::string at = path + ":" + std::to_string(lineno);
        if (cells.size() != 4) throw ValidationError(at + ": expected 4 columns");
        try {
            out.push_back({parse_quantity(cells[0], dim), parse_quantity(cells[1], Dim::None) * 1e-6,
                           parse_quantity(cells[2], Dim::None) * 1e-6, parse_quantity(cells[3], Dim::None) * 1e-6});
        } catch (const ValidationError& e) {
            throw ValidationError(at + ": " + e.what());
        }
    }
    return out;
}

std::vector<SweepRow> run_sweep(const LoadedConfig& cfg, unsigned threads) {
    const auto& run = cfg.run;
    if (run.sweep_axis.empty() || run.sweep_values.empty())
        throw ValidationError("sweep: [run].sweep_axis and [run].sweep_values are required");
    std::vector<ReferenceRow> refs;
    if (!run.reference.empty()) refs = read_reference(run.reference, run.sweep_axis);

    std::vector<SweepRow> rows(run.sweep_values.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            SweepRow& r = rows[i];
            r.value = run.sweep_values[i];
            try {
                DeviceSet set = cfg.set;
                OperatingPoint op = run.op;
                apply_axis(run.sweep_axis, r.value, run.rg_mode, set, op);
                validate(op);
                const EdgePair p = simulate_pair(set, op);
                r.e_on = p.e_on();
                r.e_off = p.e_off();
                r.e_total = p.e_total();
                r.ok = true;
            } catch (const std::exception& e) {
                r.ok = false;
                r.error = e.what();
            }
            for (const auto& ref : refs)
                if (std::abs(ref.value - r.value) <= 1e-9 * std::max(std::abs(ref.value), std::abs(r.value))) {
                    r.has_ref = true;
                    r.ref = ref;
                }
            if (r.ok && r.has_ref) {
                r.dev_on = std::abs(r.e_on - r.ref.e_on) / r.ref.e_on;
                r.dev_off = std::abs(r.e_off - r.ref.e_off) / r.ref.e_off;
                r.dev_total = std::abs(r.e_total - r.ref.e_total) / r.ref.e_total;
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(rows.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& axis) {
    const bool refs = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.has_ref; });
    std::string out = axis + ",e_on_uJ,e_off_uJ,e_total_uJ";
    if (refs) out += ",ref_on_uJ,ref_off_uJ,ref_total_uJ,dev_on_pct,dev_off_pct,dev_total_pct";
    out += ",status\n";
    for (const auto& r : rows) {
        out += format_double(r.value);
        auto cell = [&](bool have, double v) {
            out += ',';
            if (have) out += format_double(v);
        };
        cell(r.ok, r.e_on * 1e6);
        cell(r.ok, r.e_off * 1e6);
        cell(r.ok, r.e_total * 1e6);
        if (refs) {
            cell(r.has_ref, r.ref.e_on * 1e6);
            cell(r.has_ref, r.ref.e_off * 1e6);
            cell(r.has_ref, r.ref.e_total * 1e6);
            cell(r.ok && r.has_ref, r.dev_on * 100.0);
            cell(r.ok && r.has_ref, r.dev_off * 100.0);
            cell(r.ok && r.has_ref, r.dev_total * 100.0);
        }
        // errors may hold commas; keep the column parseable
        std::string status = r.ok ? "ok" : "failed: " + r.error;
        std::replace(status.begin(), status.end(), ',', ';');
        out += "," + status + "\n";
    }
    return out;
}

std::string sweep_text(const std::vector<SweepRow>& rows, const std::string& axis) {
    const bool refs = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.has_ref; });
    std::vector<std::vector<std::string>> table;
    std::vector<std::string> head = {axis + " [" + display(axis, 0.0).second + "]", "E_on uJ", "E_off uJ",
                                     "E_total uJ"};
    if (refs) head.insert(head.end(), {"ref on", "ref off", "ref total", "dev on %", "dev off %", "dev total %"});
    head.push_back("status");
    table.push_back(head);
    for (const auto& r : rows) {
        std::vector<std::string> c = {num(display(axis, r.value).first, 3)};
        auto add = [&](bool have, double v, int prec) { c.push_back(have ? num(v, prec) : "-"); };
        add(r.ok, r.e_on * 1e6, 3);
        add(r.ok, r.e_off * 1e6, 3);
        add(r.ok, r.e_total * 1e6, 3);
        if (refs) {
            add(r.has_ref, r.ref.e_on * 1e6, 3);
            add(r.has_ref, r.ref.e_off * 1e6, 3);
            add(r.has_ref, r.ref.e_total * 1e6, 3);
            add(r.ok && r.has_ref, r.dev_on * 100.0, 2);
            add(r.ok && r.has_ref, r.dev_off * 100.0, 2);
            add(r.ok && r.has_ref, r.dev_total * 100.0, 2);
        }
        c.push_back(r.ok ? "ok" : "failed: " + r.error);
        table.push_back(c);
    }
    std::vector<std::size_t> w(head.size(), 0);
    for (const auto& rr : table)
        for (std::size_t i = 0; i + 1 < rr.size(); ++i) w[i] = std::max(w[i], rr[i].size());
    std::string out;
    for (const auto& rr : table) {
        for (std::size_t i = 0; i < rr.size(); ++i) {
            if (i + 1 == rr.size()) {
                out += rr[i];
            } else {
                out += std::string(w[i] - rr[i].size(), ' ') + rr[i] + "  ";
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace switchcell
