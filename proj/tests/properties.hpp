#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fixture.hpp"
#include "switchcell/extraction.hpp"
#include "switchcell/transient_engine.hpp"
#include "switchcell/waveform.hpp"

// Invariants checked on one random parameter set. Each returns a description
// of the first violation, or an empty string.

namespace props {

using namespace switchcell;

inline double rel_gap(double a, double b, double scale) { return std::abs(a - b) / std::max(std::abs(scale), 1e-300); }

inline std::string continuity(const TransientResult& r, double v_scale, double i_scale) {
    for (std::size_t i = 1; i < r.stages.size(); ++i) {
        const auto& a = r.stages[i - 1];
        const auto& b = r.stages[i];
        const double t = a.t_end;
        if (a.t_end != b.t_start) return b.label + ": stages not contiguous";
        const double gaps[] = {rel_gap(a.v_gs.eval(t), b.v_gs.eval(t), 20.0),
                               rel_gap(a.v_ds.eval(t), b.v_ds.eval(t), v_scale),
                               rel_gap(a.i_d.eval(t), b.i_d.eval(t), i_scale),
                               rel_gap(a.i_F.eval(t), b.i_F.eval(t), i_scale)};
        for (double g : gaps)
            if (!(g <= 1e-6)) return b.label + ": jump of " + std::to_string(g) + " (relative) at the knot";
    }
    return {};
}

inline std::string kirchhoff(const TransientResult& r) {
    for (const auto& s : r.stages)
        for (int k = 0; k <= 8; ++k) {
            const double t = s.t_start + s.duration() * k / 8.0;
            if (std::abs(s.i_F.eval(t) + s.i_d.eval(t) - r.i_l) > 1e-9 * r.i_l)
                return s.label + ": i_F + i_d != I_L";
        }
    return {};
}

inline std::string markers(const TransientResult& on, const TransientResult& off, const DeviceSet& s,
                           const OperatingPoint& op) {
    const auto& m = on.markers;
    if (!(m.v_th < m.v_gs_t3 && m.v_gs_t3 < m.v_miller && m.v_miller < s.drive.v_cc))
        return "gate markers out of order: v_th < v_gs_t3 < v_miller < v_cc";
    if (!(m.i_peak >= op.i_l)) return "I_peak below I_L";
    if (!(m.v_ds0 < op.v_dc + s.sbd.v_f0)) return "v_ds0 not below the blocking level";
    if (!(off.markers.v_peak >= op.v_dc + s.sbd.v_f0)) return "V_peak below the clamp level";
    if (!(off.markers.i_t4 <= op.i_l && off.markers.i_t4 >= 0.0)) return "i_t4 outside [0, I_L]";
    for (const auto* r : {&on, &off})
        for (const auto& st : r->stages)
            if (!(st.duration() >= 0.0)) return st.label + ": negative duration";
    return {};
}

inline std::string hermite(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double t0 = 1e-9 * u(rng), t1 = t0 + 1e-9 * (0.1 + std::abs(u(rng)));
    const double y0 = 10 * u(rng), y1 = 10 * u(rng), s0 = 1e10 * u(rng), s1 = 1e10 * u(rng);
    const auto w = Waveform::cubic(t0, cubic_bridge(t0, t1, y0, y1, s0, s1));
    if (rel_gap(w.eval(t0), y0, 10.0) > 1e-9 || rel_gap(w.eval(t1), y1, 10.0) > 1e-9) return "bridge misses an end value";
    if (rel_gap(w.slope(t0), s0, 1e10) > 1e-9 || rel_gap(w.slope(t1), s1, 1e10) > 1e-9) return "bridge misses an end slope";
    return {};
}

// synthesize a transfer curve from the set's own k_fs and v_th0 and fit it back
inline std::string extraction_round_trip(const DeviceSet& s) {
    CurveSamples c;
    const double k = s.mosfet.k_fs, v0 = s.mosfet.v_th0;
    for (double v = v0 - 1.0; v <= v0 + 8.0; v += 0.25) c.points.emplace_back(v, v > v0 ? k * (v - v0) * (v - v0) : 0.0);
    const auto fit = fit_transfer_curve(c);
    if (rel_gap(fit.k_fs, k, k) > 1e-6 || rel_gap(fit.v_th0, v0, v0) > 1e-6)
        return "transfer fit round trip off by more than 1e-6";
    return {};
}

struct Outcome {
    int sets = 0;
    std::vector<std::string> failures;
};

inline Outcome run_suite(int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    Outcome out;
    const OperatingPoint base{400.0, 15.0, 298.15};
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (int i = 0; i < count; ++i) {
        const DeviceSet s = fixture::random_set(rng);
        const OperatingPoint op{base.v_dc * u(rng), base.i_l * u(rng), base.t_j};
        ++out.sets;
        const std::string tag = "set " + std::to_string(i) + ": ";
        try {
            const auto on = simulate_turn_on(s, op);
            const auto off = simulate_turn_off(s, op);
            for (const auto& msg : {continuity(on, op.v_dc, op.i_l), continuity(off, op.v_dc, op.i_l), kirchhoff(on),
                                    kirchhoff(off), markers(on, off, s, op), hermite(rng), extraction_round_trip(s)})
                if (!msg.empty()) out.failures.push_back(tag + msg);
        } catch (const std::exception& e) {
            out.failures.push_back(tag + e.what());
        }
    }
    return out;
}

}  // namespace props
