#include "switchcell/app.hpp"

#include <cmath>
#include <optional>
#include <cstdio>
#include <filesystem>
#include <cstring>
#include <sstream>

#include "json.hpp"

#include "switchcell/config.hpp"
#include "switchcell/csv_io.hpp"
#include "switchcell/errors.hpp"
#include "switchcell/extraction.hpp"
#include "switchcell/kernels.hpp"
#include "switchcell/sweep.hpp"

#ifndef SWITCHCELL_VERSION
#define SWITCHCELL_VERSION "0.0.0"
#endif

namespace switchcell {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fixed(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

struct Outputs {
    fs::path dir;
    std::vector<std::string> files;

    void put(const std::string& name, const std::string& text) {
        write_file((dir / name).string(), text);
        files.push_back(name);
    }
};

// sample step: requested, or a quarter of the shortest stage capped at 0.1 ns
double pick_dt(const TransientResult& r, double requested) {
    if (requested > 0.0) return requested;
    double shortest = r.stages.front().duration();
    for (const auto& s : r.stages) shortest = std::min(shortest, s.duration());
    return std::min(1e-10, shortest / 4.0);
}

std::string stages_csv(const std::vector<const TransientResult*>& results) {
    std::string out = "label,t_start_s,t_end_s,e_mos_J,e_sbd_J,e_mos_closed_J,e_sbd_closed_J\n";
    for (const auto* r : results)
        for (const auto& s : r->stages) {
            out += s.label;
            for (double v : {s.t_start, s.t_end, s.e_mos, s.e_sbd}) out += "," + format_double(v);
            for (double v : {s.e_mos_closed, s.e_sbd_closed}) out += "," + (std::isnan(v) ? "" : format_double(v));
            out += '\n';
        }
    return out;
}

void describe(std::ostringstream& o, const char* name, const TransientResult& r, double e_mos, double e_sbd) {
    const auto& m = r.markers;
    o << name << ": E_mos = " << fixed(e_mos * 1e6, 3) << " uJ, E_sbd = " << fixed(e_sbd * 1e6, 3)
      << " uJ, duration = " << fixed((r.t_finish() - r.t_begin()) * 1e9, 3) << " ns\n";
    for (const auto& s : r.stages)
        o << "  " << s.label << "  " << fixed(s.duration() * 1e9, 3) << " ns  E_mos " << fixed(s.e_mos * 1e6, 3)
          << " uJ  E_sbd " << fixed(s.e_sbd * 1e6, 3) << " uJ\n";
    o << "  V_th " << fixed(m.v_th, 3) << " V, V_miller " << fixed(m.v_miller, 3) << " V";
    if (m.i_peak > 0.0) o << ", I_peak " << fixed(m.i_peak, 3) << " A";
    if (m.v_peak > 0.0) o << ", V_peak " << fixed(m.v_peak, 2) << " V";
    o << ", ring " << fixed(r.osc.omega / (2.0 * M_PI) * 1e-6, 2) << " MHz\n";
    for (const auto& w : r.warnings) o << "  warning: " << w << "\n";
    for (const auto& n : r.notes) o << "  note: " << n << "\n";
}

void write_manifest(Outputs& out, const CliRequest& req, const std::string& mode, const std::string& normalized) {
    json j;
    j["tool"] = "switchcell";
    j["version"] = version();
    j["command"] = req.command;
    j["input"] = req.input;
    j["mode"] = mode;
    j["kernels"] = kernels::name(kernels::active().backend);
    if (req.dt) j["dt_override_s"] = *req.dt;
    if (!normalized.empty()) j["config_normalized"] = normalized;
    j["outputs"] = out.files;
    write_file((out.dir / "manifest.json").string(), j.dump(2) + "\n");
}

void run_dpt(const LoadedConfig& cfg, Outputs& out, std::ostream& log) {
    const auto& run = cfg.run;
    const DeviceSet hot = at_temperature(cfg.set, run.op.t_j);
    std::ostringstream sum;
    sum << "V_DC " << fixed(run.op.v_dc, 2) << " V, I_L " << fixed(run.op.i_l, 3) << " A, T_j "
        << fixed(run.op.t_j - 273.15, 2) << " C\n";
    std::vector<const TransientResult*> done;
    std::optional<TransientResult> on, off;
    const bool want_on = run.mode != "dpt-off", want_off = run.mode != "dpt-on";
    if (want_on) {
        on = simulate_turn_on(hot, run.op);
        out.put("trace_on.csv", trace_csv(sample_trace(*on, pick_dt(*on, run.dt))));
        describe(sum, "turn-on", *on, on->e_on_mos, on->e_on_sbd);
        done.push_back(&*on);
    }
    if (want_off) {
        off = simulate_turn_off(hot, run.op);
        out.put("trace_off.csv", trace_csv(sample_trace(*off, pick_dt(*off, run.dt))));
        describe(sum, "turn-off", *off, off->e_off_mos, off->e_off_sbd);
        done.push_back(&*off);
    }
    if (on && off)
        sum << "E_total = " << fixed((on->e_on_mos + off->e_off_mos) * 1e6, 3) << " uJ\n";

    if (run.mode == "oracle") {
        OracleOptions o;
        o.dt = run.oracle_dt;
        o.horizon = run.oracle_horizon;
        const double edge = run.oracle_edge;
        const double v_cc = hot.drive.v_cc, v_ee = hot.drive.v_ee;
        const OracleRun ron = integrate_dpt(hot, run.op, {{0.0, v_ee}, {edge, v_cc}}, o);
        const OracleRun roff = integrate_dpt(hot, run.op, {{0.0, v_cc}, {edge, v_ee}}, o);
        out.put("oracle_on.csv", trace_csv(ron.trace));
        out.put("oracle_off.csv", trace_csv(roff.trace));
        const auto e_on = settled_energies(ron.trace, edge, edge + (on->t_finish() - on->t_begin()),
                                           2.0 * M_PI / on->osc.omega);
        const auto e_off = settled_energies(roff.trace, edge, edge + (off->t_finish() - off->t_begin()),
                                            2.0 * M_PI / off->osc.omega);
        sum << "oracle (dt " << fixed(o.dt * 1e12, 1) << " ps):\n"
            << "  E_on " << fixed(e_on.first * 1e6, 3) << " uJ (segmented "
            << fixed((on->e_on_mos / e_on.first - 1.0) * 100.0, 2) << " %), I_peak " << fixed(ron.peak_i_d, 3)
            << " A\n"
            << "  E_off " << fixed(e_off.first * 1e6, 3) << " uJ (segmented "
            << fixed((off->e_off_mos / e_off.first - 1.0) * 100.0, 2) << " %), V_peak "
            << fixed(roff.peak_v_ds, 2) << " V\n";
        for (const auto* r : {&ron, &roff}) {
            const double lhs = r->e_supply - r->e_load - r->e_stored, rhs = r->e_mos + r->e_sbd;
            sum << "  audit: supply - load - stored = " << fixed(lhs * 1e6, 4) << " uJ, losses = "
                << fixed(rhs * 1e6, 4) << " uJ; max KCL residual " << r->max_kcl_residual << " A\n";
        }
    }
    out.put("stages.csv", stages_csv(done));
    out.put("summary.txt", sum.str());
    log << sum.str();
}

void run_sweep_cmd(const LoadedConfig& cfg, Outputs& out, std::ostream& log) {
    const auto rows = run_sweep(cfg);
    out.put("sweep.csv", sweep_csv(rows, cfg.run.sweep_axis));
    const std::string txt = sweep_text(rows, cfg.run.sweep_axis);
    out.put("sweep.txt", txt);
    log << txt;
    int failed = 0;
    for (const auto& r : rows) failed += r.ok ? 0 : 1;
    if (failed) log << failed << " of " << rows.size() << " rows failed\n";
}

void run_mission(const LoadedConfig& cfg, Outputs& out, std::ostream& log) {
    const auto& run = cfg.run;
    Scenario sc;
    sc.set = cfg.set;
    sc.v_dc = run.op.v_dc;
    sc.f_sw = run.f_sw;
    sc.schedule = run.schedule;
    sc.r_load = run.r_load;
    sc.l_load = run.l_load;
    sc.t_amb = run.t_amb;
    sc.horizon = run.horizon;
    const auto tr = run_electrothermal(sc, run.coupler);
    out.put("trajectory.csv", trajectory_csv(tr));
    out.put("dt_th.csv", step_size_csv(tr));
    double peak_m = 0.0, peak_d = 0.0;
    for (const auto& s : tr.samples) {
        peak_m = std::max(peak_m, s.tj_mos);
        peak_d = std::max(peak_d, s.tj_sbd);
    }
    std::ostringstream sum;
    const auto& last = tr.samples.back();
    sum << "horizon " << format_double(sc.horizon) << " s, " << tr.exchange_count << " exchanges ("
        << tr.electrical_evaluations << " electrical evaluations)\n"
        << "final T_j MOSFET " << fixed(last.tj_mos - 273.15, 2) << " C, SBD " << fixed(last.tj_sbd - 273.15, 2)
        << " C, case " << fixed(last.tc - 273.15, 2) << " C\n"
        << "peak T_j MOSFET " << fixed(peak_m - 273.15, 2) << " C, SBD " << fixed(peak_d - 273.15, 2) << " C\n";
    out.put("summary.txt", sum.str());
    log << sum.str();
}

void run_extract(const CliRequest& req, Outputs& out, std::ostream& log) {
    std::ostringstream frag;
    if (req.kind == "transfer") {
        const auto fit = fit_transfer_curve(read_curve_csv(req.input));
        frag << "# transfer fit over " << fit.used << " samples, rms residual " << format_double(fit.residual)
             << " A\n[mosfet]\n"
             << format_key("k_fs", fit.k_fs) << format_key("v_th0", fit.v_th0);
    } else if (req.kind == "capacitance") {
        const auto cap = segment_capacitance_curve(read_curve_csv(req.input), req.breakpoints);
        // carry the unit of the capacitance column over ("c_rss_pF" -> pF)
        std::istringstream in(read_file(req.input));
        std::string header;
        std::getline(in, header);
        while (!header.empty() && (header.back() == ' ' || header.back() == '\r')) header.pop_back();
        std::string unit;
        for (const char* u : {"_pF", "_nF", "_uF", "_F"})
            if (header.size() > std::strlen(u) && header.compare(header.size() - std::strlen(u), std::strlen(u), u) == 0) {
                unit = u + 1;
                break;
            }
        frag << "# segment means, " << (unit.empty() ? "in the units of the input column" : unit) << "\n";
        std::string vals, bps;
        for (double v : cap.values()) vals += (vals.empty() ? "" : ", ") + format_double(v);
        if (!unit.empty()) vals += " " + unit;
        for (double v : cap.breakpoints()) bps += (bps.empty() ? "" : ", ") + format_double(v);
        frag << "values = " << vals << "\ncap_breakpoints = " << bps << "\n"
             << format_key("v_max", cap.v_max());
    } else if (req.kind == "thermal-coeff") {
        // columns: temperature, v_th, k_fs, R_ds(on); a header ending in "_C" means Celsius
        std::istringstream in(read_file(req.input));
        std::string header;
        std::getline(in, header);
        const auto comma = header.find(',');
        std::string first = header.substr(0, comma);
        while (!first.empty() && (first.back() == ' ' || first.back() == '\r')) first.pop_back();
        const double offset = first.size() > 2 && first.compare(first.size() - 2, 2, "_C") == 0 ? 273.15 : 0.0;
        CurveSamples vth, k, r;
        std::string line;
        int lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
            std::istringstream ls(line);
            std::string cell;
            std::vector<double> v;
            while (std::getline(ls, cell, ',')) v.push_back(parse_quantity(cell, Dim::None));
            if (v.size() != 4)
                throw ValidationError(req.input + ":" + std::to_string(lineno) + ": expected 4 columns");
            const double t = v[0] + offset;
            vth.points.emplace_back(t, v[1]);
            k.points.emplace_back(t, v[2]);
            r.points.emplace_back(t, v[3]);
        }
        const auto fit = fit_temperature_coeffs(vth, k, r, req.t_ref);
        frag << "# temperature fit at t_ref = " << format_double(req.t_ref) << " K: v_th " << format_double(fit.v_th_at_ref)
             << " V, k_fs " << format_double(fit.k_at_ref) << " A/V2, rms " << format_double(fit.rms_vth) << " / "
             << format_double(fit.rms_k) << " / " << format_double(fit.rms_rdson) << "\n[mosfet]\n"
             << format_key("t_ref", req.t_ref) << format_key("temp_a", fit.coeffs.a)
             << format_key("temp_b", fit.coeffs.b) << format_key("temp_c", fit.coeffs.c)
             << format_key("temp_d", fit.coeffs.d) << format_key("temp_e", fit.coeffs.e);
    } else {
        throw ValidationError("extract: --kind must be transfer, capacitance or thermal-coeff");
    }
    out.put("extract.ini", frag.str());
    log << frag.str();
}

}  // namespace

const char* version() { return SWITCHCELL_VERSION; }

void run_request(const CliRequest& req, std::ostream& log) {
    Outputs out;
    out.dir = req.out_dir;
    std::error_code ec;
    fs::create_directories(out.dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + req.out_dir + ": " + ec.message());
    if (req.dt && !(*req.dt > 0.0)) throw ValidationError("--dt must be > 0");

    if (req.command == "extract") {
        run_extract(req, out, log);
        write_manifest(out, req, "extract:" + req.kind, "");
        return;
    }
    LoadedConfig cfg = load_config(req.input);
    if (req.dt) {
        cfg.run.dt = *req.dt;
        if (cfg.run.mode == "oracle") cfg.run.oracle_dt = *req.dt;
    }
    std::string mode = cfg.run.mode;
    if (req.command == "sweep") mode = "sweep";
    else if (req.command == "mission") mode = "mission";
    else if (req.command != "run") throw ValidationError("unknown command '" + req.command + "'");
    if (mode != cfg.run.mode) {
        // the subcommand decides; re-check what that mode needs
        cfg.run.mode = mode;
        cfg = parse_config(serialize_config(cfg), req.input, fs::path(req.input).parent_path().string());
    }
    if (mode == "sweep") run_sweep_cmd(cfg, out, log);
    else if (mode == "mission") run_mission(cfg, out, log);
    else run_dpt(cfg, out, log);
    write_manifest(out, req, mode, serialize_config(cfg));
}

int exit_code_for(std::exception_ptr e) {
    if (!e) return 0;
    try {
        std::rethrow_exception(e);
    } catch (const ValidationError&) {
        return 1;
    } catch (const fs::filesystem_error&) {
        return 1;
    } catch (const NumericError&) {
        return 2;
    } catch (...) {
        return 2;
    }
}

}  // namespace switchcell
