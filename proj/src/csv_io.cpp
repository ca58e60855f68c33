#include "switchcell/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "switchcell/config.hpp"
#include "switchcell/errors.hpp"

namespace switchcell {

namespace {

void row(std::string& out, std::initializer_list<double> vals) {
    bool first = true;
    for (double v : vals) {
        if (!first) out += ',';
        first = false;
        out += format_double(v);
    }
    out += '\n';
}

constexpr double kKelvin = 273.15;

}  // namespace

std::string trace_csv(const WaveformTrace& tr) {
    std::string out = kTraceHeader;
    out += '\n';
    out.reserve(out.size() + tr.size() * 160);
    for (std::size_t i = 0; i < tr.size(); ++i)
        row(out, {tr.t[i], tr.v_gs[i], tr.v_ds[i], tr.i_d[i], tr.v_F[i], tr.i_F[i], tr.p_mos[i], tr.p_sbd[i]});
    return out;
}

WaveformTrace parse_trace_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        throw ValidationError("trace csv: header must be " + std::string(kTraceHeader));
    WaveformTrace tr;
    std::vector<double>* cols[] = {&tr.t, &tr.v_gs, &tr.v_ds, &tr.i_d, &tr.v_F, &tr.i_F, &tr.p_mos, &tr.p_sbd};
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const char* p = line.data();
        const char* end = p + line.size();
        for (int c = 0; c < 8; ++c) {
            double v;
            const auto r = std::from_chars(p, end, v);
            if (r.ec != std::errc{}) throw ValidationError("trace csv: bad number on line " + std::to_string(lineno));
            cols[c]->push_back(v);
            p = r.ptr;
            if (c < 7) {
                if (p == end || *p != ',')
                    throw ValidationError("trace csv: expected 8 columns on line " + std::to_string(lineno));
                ++p;
            }
        }
        if (p != end) throw ValidationError("trace csv: trailing data on line " + std::to_string(lineno));
    }
    return tr;
}

std::string trajectory_csv(const TemperatureTrajectory& tr) {
    std::string out = "time_s,p_mos_W,p_sbd_W,tj_mos_C,tj_sbd_C,tc_C\n";
    for (const auto& s : tr.samples)
        row(out, {s.t, s.p_mos, s.p_sbd, s.tj_mos - kKelvin, s.tj_sbd - kKelvin, s.tc - kKelvin});
    return out;
}

std::string step_size_csv(const TemperatureTrajectory& tr) {
    std::string out = "time_s,dt_th_s\n";
    for (std::size_t i = 1; i < tr.samples.size(); ++i) row(out, {tr.samples[i].t, tr.samples[i].dt_th});
    return out;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + path);
    f << text;
    if (!f) throw ValidationError("write failed for " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace switchcell
