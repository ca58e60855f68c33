#include "switchcell/transient_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "switchcell/errors.hpp"
#include "switchcell/kernels.hpp"

namespace switchcell {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Quantities shared by both edges.
struct Context {
    LinearizedChannel ch;
    double v_dc, i_l, v_f0, v_cc, v_ee;
    double r_g, l_s, l_stray, c_iss, c_oss_hv, c_f_eq_hv, c_l, c_gd_ext, r_loop;
    double v_ds_on;
    const PiecewiseCapacitance* c_gd;
    const PiecewiseCapacitance* c_f;

    // gate-drain charge between two drain voltages (segment values plus external cap)
    double q_gd(double v_lo, double v_hi) const {
        return c_gd->charge(v_hi) - c_gd->charge(v_lo) + c_gd_ext * (v_hi - v_lo);
    }
    // diode + load capacitance charge when the reverse voltage goes 0 -> dv
    double q_f(double dv) const { return c_f->charge(dv) + c_l * dv; }
};

Context make_context(const DeviceSet& set, const OperatingPoint& op) {
    validate(op);
    Context c{};
    c.ch = linearize_channel(set.mosfet, op.i_l);
    const auto lo = aggregate_equivalents(set, 0.0);
    const auto hv = aggregate_equivalents(set, op.v_dc);
    c.v_dc = op.v_dc;
    c.i_l = op.i_l;
    c.v_f0 = set.sbd.v_f0;
    c.v_cc = set.drive.v_cc;
    c.v_ee = set.drive.v_ee;
    c.r_g = lo.r_g_total;
    c.l_s = set.mosfet.l_s;
    c.l_stray = lo.l_stray;
    c.c_iss = lo.c_iss;
    c.c_oss_hv = hv.c_oss;
    c.c_f_eq_hv = hv.c_f_eq;
    c.c_l = set.circuit.c_l;
    c.c_gd_ext = set.drive.c_gd_ext;
    c.r_loop = set.circuit.r_damp > 0.0 ? set.circuit.r_damp : set.mosfet.r_ds_on;
    c.v_ds_on = on_state_voltage(set.mosfet, op.i_l);
    c.c_gd = &set.mosfet.c_gd;
    c.c_f = &set.sbd.c_f;
    return c;
}

// Drain-voltage swing v_from -> v_to at constant gate current. Time on each
// capacitance segment is proportional to the gate-drain charge it needs.
// Returns knots (t, v) starting at t0.
std::vector<std::pair<double, double>> miller_knots(const Context& c, double t0, double v_from,
                                                    double v_to, double duration) {
    const double lo = std::min(v_from, v_to), hi = std::max(v_from, v_to);
    std::vector<double> pts{lo};
    for (double b : c.c_gd->breakpoints())
        if (b > lo && b < hi) pts.push_back(b);
    pts.push_back(hi);
    if (v_from > v_to) std::reverse(pts.begin(), pts.end());
    const double q_total = c.q_gd(lo, hi);
    std::vector<std::pair<double, double>> knots{{t0, pts.front()}};
    double t = t0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double q = c.q_gd(std::min(pts[i - 1], pts[i]), std::max(pts[i - 1], pts[i]));
        t = i + 1 == pts.size() ? t0 + duration : t + duration * q / q_total;
        knots.emplace_back(t, pts[i]);
    }
    return knots;
}

// Positive root of a T^2 + b T + c = 0 (a > 0, c <= 0).
double positive_root(double a, double b, double c, const char* what) {
    const double disc = b * b - 4.0 * a * c;
    if (!(disc >= 0.0) || !(a > 0.0))
        throw NumericError(std::string(what) + ": no real positive duration (a=" + fmt(a) + ", b=" + fmt(b) +
                           ", c=" + fmt(c) + ")");
    return (-b + std::sqrt(disc)) / (2.0 * a);
}

Waveform overlay(double t0, double base, double amp, const OscillationParams& o) {
    if (!(o.omega > 0.0) || amp == 0.0) return Waveform::constant(base + amp);
    return Waveform::damped_cosine(t0, base, amp, 0.0, o.alpha, o.omega);
}

Waveform overlay_rate(double t0, double scale, double amp, const OscillationParams& o) {
    // scale * d/dt [amp e^{-a tau} cos(w tau)]
    if (!(o.omega > 0.0) || amp == 0.0) return Waveform::constant(0.0);
    return Waveform::damped_cosine(t0, 0.0, -scale * o.alpha * amp, -scale * o.omega * amp, o.alpha, o.omega);
}

// =============================================================================
// Turn-on
// =============================================================================

struct OnPlan {
    StagePlan plan;
    double t21, t32, t43, t54, t65, t76, t87, s3, v5_end;
};

OnPlan plan_on(const Context& c) {
    const auto& ch = c.ch;
    if (!(c.v_cc > ch.v_th))
        throw NumericError("turn-on: v_cc = " + fmt(c.v_cc) + " V does not exceed v_th = " + fmt(ch.v_th) +
                           " V; the device never turns on");
    if (!(c.v_cc > ch.v_miller))
        throw NumericError("turn-on: v_cc = " + fmt(c.v_cc) + " V does not exceed the plateau level " +
                           fmt(ch.v_miller) + " V");
    OnPlan p{};
    auto& m = p.plan.markers;
    m.v_th = ch.v_th;
    m.v_miller = ch.v_miller;
    m.v_gs_t3 = ch.v_gs_t3;
    m.v_ds_on = c.v_ds_on;

    const double rc = c.r_g * c.c_iss;
    p.t21 = rc * std::log((c.v_cc - c.v_ee) / (c.v_cc - ch.v_th));

    // second half of the current rise: linear ramp, source inductance in the gate loop
    p.t43 = (rc * (ch.v_miller - ch.v_gs_t3) + c.l_s * c.i_l / 2.0) /
            (c.v_cc - (ch.v_miller + ch.v_gs_t3) / 2.0);
    p.s3 = c.i_l / (2.0 * p.t43);
    m.v_drop = c.l_stray * p.s3;
    m.v_ds0 = c.v_dc + c.v_f0 - m.v_drop;

    // first half: A T^2 - B T - C = 0
    const double A = c.v_cc - (ch.v_gs_t3 + ch.v_th) / 2.0;
    const double B = rc * (ch.v_gs_t3 - ch.v_th) + c.l_s * c.i_l / 2.0;
    const double C = c.r_g * (c.c_gd->at_clamped(c.v_dc) + c.c_gd_ext) * c.l_stray * c.i_l / 2.0;
    const double disc = B * B + 4.0 * A * C;
    if (!(disc >= 0.0) || !(A > 0.0))
        throw NumericError("turn-on: current-rise quadratic has no real root (A=" + fmt(A) + ", B=" + fmt(B) +
                           ", C=" + fmt(C) + ", discriminant=" + fmt(disc) + ")");
    p.t32 = (B + std::sqrt(disc)) / (2.0 * A);

    // overshoot: diode + load capacitance charged through the drop the loop inductance held
    const double q_f = c.q_f(m.v_drop);
    const double g = ch.g_fs;
    if (q_f > 0.0) {
        p.t54 = positive_root(c.v_cc - ch.v_miller, -q_f / g, -2.0 * (rc / g + c.l_s) * q_f, "turn-on overshoot");
        m.i_peak = c.i_l + 2.0 * q_f / p.t54;
    } else {
        p.t54 = 0.0;
        m.i_peak = c.i_l;
    }
    m.v_gs_peak = m.i_peak / g + ch.v_th;

    const double v_knee = ch.v_miller - ch.v_th;
    if (!(m.v_ds0 > v_knee))
        throw NumericError("turn-on: v_ds0 = " + fmt(m.v_ds0) + " V already below v_miller - v_th = " +
                           fmt(v_knee) + " V; loop inductance too large for this operating point");
    const double i_g = (c.v_cc - ch.v_miller) / c.r_g;
    p.v5_end = std::max(v_knee, c.v_ds_on);
    p.t65 = c.q_gd(p.v5_end, m.v_ds0) / i_g;
    p.t76 = c.q_gd(c.v_ds_on, p.v5_end) / i_g;
    p.t87 = 2.0 * rc;

    OscillationParams& o = p.plan.osc;
    if (c.l_stray > 0.0) {
        o.omega = 1.0 / std::sqrt(c.l_stray * c.c_f_eq_hv);
        o.alpha = c.r_loop / (2.0 * c.l_stray);
    }
    o.amplitude = m.i_peak - c.i_l;

    p.plan.labels = {"on-1", "on-2", "on-3", "on-4", "on-5", "on-6", "on-7"};
    p.plan.durations = {p.t21, p.t32, p.t43, p.t54, p.t65, p.t76, p.t87};
    return p;
}

// =============================================================================
// Turn-off
// =============================================================================

struct OffPlan {
    StagePlan plan;
    double t21, t32, t43, t76, t87, v0, v_gs1;
};

OffPlan plan_off(const Context& c) {
    const auto& ch = c.ch;
    if (!(c.v_cc > ch.v_th))
        throw NumericError("turn-off: v_cc = " + fmt(c.v_cc) + " V does not exceed v_th; device was never on");
    OffPlan p{};
    auto& m = p.plan.markers;
    m.v_th = ch.v_th;
    m.v_miller = ch.v_miller;
    m.v_gs_t3 = ch.v_gs_t3;
    m.v_ds_on = c.v_ds_on;
    const double rc = c.r_g * c.c_iss;
    const double g = ch.g_fs;

    p.t21 = rc * std::log((c.v_cc - c.v_ee) / (c.v_cc - ch.v_th));
    p.v_gs1 = c.v_ee + (c.v_cc - c.v_ee) * std::exp(-p.t21 / rc);

    const double i_g = (ch.v_miller - c.v_ee) / c.r_g;
    p.v0 = std::max(ch.v_miller - ch.v_th, c.v_ds_on);
    p.t32 = c.q_gd(c.v_ds_on, p.v0) / i_g;

    const double dv1 = c.v_dc - p.v0;
    if (!(dv1 > 0.0))
        throw NumericError("turn-off: v_dc = " + fmt(c.v_dc) + " V not above the plateau knee " + fmt(p.v0) + " V");
    const double q_gd = c.q_gd(p.v0, c.v_dc);
    const double q_f = c.q_f(dv1);
    p.t43 = positive_root(ch.v_miller - c.v_ee, -(q_f / (2.0 * g) + c.r_g * q_gd),
                          -(rc / g + c.l_s) * q_f, "turn-off voltage rise");
    m.i_t4 = c.i_l - q_f / p.t43;
    if (m.i_t4 < 0.0) {
        p.plan.warnings.push_back("capacitive desaturation: i_t4 = " + fmt(m.i_t4) + " A clamped to 0");
        m.i_t4 = 0.0;
    }

    // current fall; the gate level at its start depends on the overshoot it causes
    m.i_t6 = m.i_t4;
    double v_gs6 = m.i_t6 / g + ch.v_th;
    double t76 = 0.0;
    double v_peak = c.v_dc + c.v_f0;
    if (m.i_t6 > 0.0) {
        for (int pass = 0; pass < 3; ++pass) {
            t76 = (m.i_t6 * c.l_s + rc * (v_gs6 - ch.v_th)) / (0.5 * ch.v_miller + 0.5 * v_gs6 - c.v_ee);
            v_peak = c.v_dc + c.v_f0 + c.l_stray * m.i_t6 / t76;
            v_gs6 = std::max(ch.v_th, (m.i_t6 - c.c_oss_hv * (v_peak - c.v_dc) / t76) / g + ch.v_th);
        }
    } else {
        v_gs6 = ch.v_th;
    }
    p.t76 = t76;
    m.v_gs_t6 = v_gs6;
    m.v_peak = v_peak;
    p.t87 = 2.0 * rc;

    OscillationParams& o = p.plan.osc;
    if (c.l_stray > 0.0) {
        o.omega = 1.0 / std::sqrt(c.l_stray * c.c_oss_hv);
        o.alpha = c.r_loop / (2.0 * c.l_stray);
    }
    o.amplitude = m.v_peak - c.v_dc - c.v_f0;

    p.plan.labels = {"off-1", "off-2", "off-3", "off-4", "off-5"};
    p.plan.durations = {p.t21, p.t32, p.t43, p.t76, p.t87};
    return p;
}

// =============================================================================
// Energy integration
// =============================================================================

void integrate_stage(StageRecord& s) {
    const std::size_t n = kStagePoints;
    const double h = s.duration() / static_cast<double>(n - 1);
    std::vector<double> v(n), i(n), vf(n), iF(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = k + 1 == n ? s.t_end : s.t_start + h * static_cast<double>(k);
        v[k] = s.v_ds.eval(t);
        i[k] = s.i_d.eval(t);
        vf[k] = s.v_F.eval(t);
        iF[k] = s.i_F.eval(t);
    }
    const auto& K = kernels::active();
    s.e_mos = K.simpson_product(v.data(), i.data(), n, h);
    s.e_sbd = K.simpson_product(vf.data(), iF.data(), n, h);
}

void push_stage(TransientResult& r, StageRecord s) {
    if (!(s.t_end > s.t_start)) return;  // degenerate stage, nothing to integrate
    integrate_stage(s);
    r.stages.push_back(std::move(s));
}

double cubic_integral(const std::array<double, 4>& k, double T) {
    return T * (k[0] + T * (k[1] / 2.0 + T * (k[2] / 3.0 + T * k[3] / 4.0)));
}

}  // namespace

// =============================================================================
// Public API
// =============================================================================

void validate(const OperatingPoint& op) {
    if (!(op.v_dc > 0.0)) throw ValidationError("operating point: v_dc must be > 0 (got " + fmt(op.v_dc) + ")");
    if (!(op.i_l > 0.0)) throw ValidationError("operating point: i_l must be > 0 (got " + fmt(op.i_l) + ")");
    if (!(op.t_j > 0.0)) throw ValidationError("operating point: t_j must be > 0 K");
}

double StagePlan::total() const {
    double s = 0.0;
    for (double d : durations) s += d;
    return s;
}

void WaveformTrace::reserve(std::size_t n) {
    for (auto* v : {&t, &v_gs, &v_ds, &i_d, &v_F, &i_F, &p_mos, &p_sbd}) v->reserve(n);
}

StagePlan turn_on_stage_plan(const DeviceSet& set, const OperatingPoint& op) {
    return plan_on(make_context(set, op)).plan;
}

StagePlan turn_off_stage_plan(const DeviceSet& set, const OperatingPoint& op) {
    return plan_off(make_context(set, op)).plan;
}

OscillationParams oscillation_params(const DeviceSet& set, const OperatingPoint& op, Edge edge,
                                     const Markers& markers) {
    const auto c = make_context(set, op);
    if (!(c.l_stray > 0.0)) throw DomainError("oscillation_params: l_stray must be > 0");
    OscillationParams o;
    o.alpha = c.r_loop / (2.0 * c.l_stray);
    if (edge == Edge::On) {
        o.omega = 1.0 / std::sqrt(c.l_stray * c.c_f_eq_hv);
        o.amplitude = markers.i_peak - op.i_l;
    } else {
        o.omega = 1.0 / std::sqrt(c.l_stray * c.c_oss_hv);
        o.amplitude = markers.v_peak - op.v_dc - set.sbd.v_f0;
    }
    return o;
}

TransientResult simulate_turn_on(const DeviceSet& set, const OperatingPoint& op) {
    const Context c = make_context(set, op);
    const OnPlan p = plan_on(c);
    const auto& m = p.plan.markers;
    const auto& o = p.plan.osc;
    const double rc = c.r_g * c.c_iss;
    const double L = c.l_stray;

    TransientResult r;
    r.markers = m;
    r.osc = o;
    r.i_l = c.i_l;
    r.warnings = p.plan.warnings;

    double t = 0.0;
    {
        StageRecord s;
        s.label = "on-1";
        s.t_start = t;
        s.t_end = t += p.t21;
        s.v_gs = Waveform::exp_approach(s.t_start, c.v_ee, c.v_cc, rc);
        s.v_ds = Waveform::constant(c.v_dc + c.v_f0);
        s.i_d = Waveform::constant(0.0);
        s.v_F = Waveform::constant(c.v_f0);
        s.i_F = Waveform::constant(c.i_l);
        s.e_mos_closed = 0.0;
        s.e_sbd_closed = c.i_l * c.v_f0 * p.t21;
        push_stage(r, std::move(s));
    }
    {
        StageRecord s;
        s.label = "on-2";
        s.t_start = t;
        s.t_end = t += p.t32;
        const auto k = cubic_bridge(s.t_start, s.t_end, 0.0, c.i_l / 2.0, 0.0, p.s3);
        s.v_gs = Waveform::linear(s.t_start, c.ch.v_th, (c.ch.v_gs_t3 - c.ch.v_th) / p.t32);
        s.i_d = Waveform::cubic(s.t_start, k);
        // v_ds = V_DC + v_F0 - L di/dt
        s.v_ds = Waveform::cubic(s.t_start, {c.v_dc + c.v_f0 - L * k[1], -2.0 * L * k[2], -3.0 * L * k[3], 0.0});
        s.v_F = Waveform::constant(c.v_f0);
        s.i_F = s.i_d.affine(-1.0, c.i_l);
        const double q = cubic_integral(k, p.t32);
        const double i_end = c.i_l / 2.0;
        s.e_mos_closed = (c.v_dc + c.v_f0) * q - 0.5 * L * i_end * i_end;
        s.e_sbd_closed = c.v_f0 * c.i_l * p.t32 - c.v_f0 * q;
        push_stage(r, std::move(s));
    }
    {
        StageRecord s;
        s.label = "on-3";
        s.t_start = t;
        s.t_end = t += p.t43;
        s.v_gs = Waveform::linear(s.t_start, c.ch.v_gs_t3, (c.ch.v_miller - c.ch.v_gs_t3) / p.t43);
        s.i_d = Waveform::linear(s.t_start, c.i_l / 2.0, p.s3);
        s.v_ds = Waveform::constant(m.v_ds0);
        s.v_F = Waveform::constant(c.v_f0);
        s.i_F = s.i_d.affine(-1.0, c.i_l);
        s.e_mos_closed = 0.75 * m.v_ds0 * c.i_l * p.t43;
        push_stage(r, std::move(s));
    }
    {
        StageRecord s;
        s.label = "on-4";
        s.t_start = t;
        s.t_end = t += p.t54;
        if (p.t54 > 0.0) {
            const auto k = cubic_bridge(s.t_start, s.t_end, c.i_l, m.i_peak, p.s3, 0.0);
            s.v_gs = Waveform::linear(s.t_start, c.ch.v_miller, (m.v_gs_peak - c.ch.v_miller) / p.t54);
            s.i_d = Waveform::cubic(s.t_start, k);
            s.v_ds = Waveform::constant(m.v_ds0);
            s.v_F = Waveform::cubic(s.t_start, {m.v_ds0 - c.v_dc + L * k[1], 2.0 * L * k[2], 3.0 * L * k[3], 0.0});
            s.i_F = s.i_d.affine(-1.0, c.i_l);
        }
        push_stage(r, std::move(s));
    }
    const double t5 = t;
    const Waveform i_osc = overlay(t5, c.i_l, o.amplitude, o);
    const Waveform l_di = overlay_rate(t5, L, o.amplitude, o);
    {
        StageRecord s;
        s.label = "on-5";
        s.t_start = t;
        s.t_end = t += p.t65;
        if (p.t65 > 0.0) {
            s.v_gs = Waveform::linear(s.t_start, m.v_gs_peak, (c.ch.v_miller - m.v_gs_peak) / p.t65);
            s.v_ds = Waveform::piecewise(miller_knots(c, s.t_start, m.v_ds0, p.v5_end, p.t65));
            s.i_d = i_osc;
            s.v_F = s.v_ds.affine(1.0, -c.v_dc) + l_di;
            s.i_F = s.i_d.affine(-1.0, c.i_l);
        }
        push_stage(r, std::move(s));
    }
    {
        StageRecord s;
        s.label = "on-6";
        s.t_start = t;
        s.t_end = t += p.t76;
        if (p.t76 > 0.0) {
            s.v_gs = Waveform::constant(c.ch.v_miller);
            s.v_ds = Waveform::piecewise(miller_knots(c, s.t_start, p.v5_end, c.v_ds_on, p.t76));
            s.i_d = i_osc;
            s.v_F = s.v_ds.affine(1.0, -c.v_dc) + l_di;
            s.i_F = s.i_d.affine(-1.0, c.i_l);
        }
        push_stage(r, std::move(s));
    }
    {
        StageRecord s;
        s.label = "on-7";
        s.t_start = t;
        s.t_end = t += p.t87;
        s.v_gs = Waveform::exp_approach(s.t_start, c.ch.v_miller, c.v_cc, rc);
        s.v_ds = Waveform::constant(c.v_ds_on);
        s.i_d = i_osc;
        s.v_F = Waveform::constant(c.v_ds_on - c.v_dc) + l_di;
        s.i_F = s.i_d.affine(-1.0, c.i_l);
        push_stage(r, std::move(s));
    }
    for (const auto& s : r.stages) {
        r.e_on_mos += s.e_mos;
        r.e_on_sbd += s.e_sbd;
    }
    return r;
}

TransientResult simulate_turn_off(const DeviceSet& set, const OperatingPoint& op) {
    const Context c = make_context(set, op);
    const OffPlan p = plan_off(c);
    const auto& m = p.plan.markers;
    const auto& o = p.plan.osc;
    const double rc = c.r_g * c.c_iss;
    const double L = c.l_stray;

    TransientResult r;
    r.markers = m;
    r.osc = o;
    r.i_l = c.i_l;
    r.warnings = p.plan.warnings;
    r.notes.push_back("turn-off stages off-1..off-5 are: gate discharge, voltage rise I, "
                      "voltage rise II, current fall, ring-down");
    r.notes.push_back("gate level during the current fall is taken as v_gs at its start (v_gs_t6)");

    double t = 0.0;
    {
        StageRecord s;
        s.label = "off-1";
        s.t_start = t;
        s.t_end = t += p.t21;
        s.v_gs = Waveform::exp_approach(s.t_start, c.v_cc, c.v_ee, rc);
        s.v_ds = Waveform::constant(c.v_ds_on);
        s.i_d = Waveform::constant(c.i_l);
        s.v_F = Waveform::constant(c.v_ds_on - c.v_dc);
        s.i_F = Waveform::constant(0.0);
        s.e_mos_closed = c.i_l * c.v_ds_on * p.t21;
        s.e_sbd_closed = 0.0;
        push_stage(r, std::move(s));
    }
    {
        StageRecord s;
        s.label = "off-2";
        s.t_start = t;
        s.t_end = t += p.t32;
        if (p.t32 > 0.0) {
            s.v_gs = Waveform::linear(s.t_start, p.v_gs1, (c.ch.v_miller - p.v_gs1) / p.t32);
            const auto knots = miller_knots(c, s.t_start, c.v_ds_on, p.v0, p.t32);
            s.v_ds = Waveform::piecewise(knots);
            s.i_d = Waveform::constant(c.i_l);
            s.v_F = s.v_ds.affine(1.0, -c.v_dc);
            s.i_F = Waveform::constant(0.0);
            if (knots.size() == 2)  // straight line, the trapezoid form is exact
                s.e_mos_closed = (p.v0 + c.v_ds_on) / 2.0 * c.i_l * p.t32;
            s.e_sbd_closed = 0.0;
        }
        push_stage(r, std::move(s));
    }
    {
        StageRecord s;
        s.label = "off-3";
        s.t_start = t;
        s.t_end = t += p.t43;
        const double di = (m.i_t4 - c.i_l) / p.t43;
        s.v_gs = Waveform::linear(s.t_start, c.ch.v_miller, (m.v_gs_t6 - c.ch.v_miller) / p.t43);
        s.v_ds = Waveform::piecewise(miller_knots(c, s.t_start, p.v0, c.v_dc, p.t43));
        s.i_d = Waveform::linear(s.t_start, c.i_l, di);
        s.v_F = s.v_ds.affine(1.0, -c.v_dc + L * di);
        s.i_F = s.i_d.affine(-1.0, c.i_l);
        push_stage(r, std::move(s));
    }
    {
        StageRecord s;
        s.label = "off-4";
        s.t_start = t;
        s.t_end = t += p.t76;
        if (p.t76 > 0.0) {
            const double di = -m.i_t6 / p.t76;
            s.v_gs = Waveform::linear(s.t_start, m.v_gs_t6, (c.ch.v_th - m.v_gs_t6) / p.t76);
            s.v_ds = Waveform::cosine_rise(s.t_start, m.v_peak, m.v_peak - c.v_dc,
                                           std::numbers::pi / (2.0 * p.t76));
            s.i_d = Waveform::linear(s.t_start, m.i_t6, di);
            s.v_F = s.v_ds.affine(1.0, -c.v_dc + L * di);
            s.i_F = s.i_d.affine(-1.0, c.i_l);
        }
        push_stage(r, std::move(s));
    }
    {
        StageRecord s;
        s.label = "off-5";
        s.t_start = t;
        s.t_end = t += p.t87;
        const double v_os = o.amplitude;
        s.v_gs = Waveform::exp_approach(s.t_start, p.t76 > 0.0 ? c.ch.v_th : m.v_gs_t6, c.v_ee, rc);
        if (o.omega > 0.0 && v_os != 0.0) {
            // sine term makes the ring start with zero current, matching the end of the fall
            const double a = o.alpha, w = o.omega;
            s.v_ds = Waveform::damped_cosine(s.t_start, c.v_dc + c.v_f0, v_os, v_os * a / w, a, w);
            s.i_d = Waveform::damped_cosine(s.t_start, 0.0, 0.0, -c.c_oss_hv * v_os * (a * a + w * w) / w, a, w);
        } else {
            s.v_ds = Waveform::constant(m.v_peak);
            s.i_d = Waveform::constant(0.0);
        }
        s.v_F = Waveform::constant(c.v_f0);
        s.i_F = s.i_d.affine(-1.0, c.i_l);
        push_stage(r, std::move(s));
    }
    for (const auto& s : r.stages) {
        r.e_off_mos += s.e_mos;
        r.e_off_sbd += s.e_sbd;
    }
    return r;
}

ConductionLoss conduction_loss(const DeviceSet& set, double i, double duty) {
    if (duty < 0.0 || duty > 1.0) throw DomainError("conduction_loss: duty must be in [0, 1]");
    if (i < 0.0) throw DomainError("conduction_loss: current must be >= 0");
    return {duty * i * i * set.mosfet.r_ds_on, (1.0 - duty) * i * set.sbd.v_f0};
}

WaveformTrace sample_trace(const TransientResult& result, double dt) {
    if (!(dt > 0.0)) throw ValidationError("sample_trace: dt must be > 0");
    WaveformTrace tr;
    if (result.stages.empty()) return tr;
    double shortest = result.stages.front().duration();
    for (const auto& s : result.stages) shortest = std::min(shortest, s.duration());
    if (!(dt < shortest))
        throw ValidationError("sample_trace: dt = " + fmt(dt) + " s is not below the shortest stage (" +
                              fmt(shortest) + " s)");
    const double t0 = result.t_begin(), t1 = result.t_finish();
    const auto n_full = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9));
    tr.reserve(n_full + 2);
    std::size_t si = 0;
    auto push = [&](double t) {
        while (si + 1 < result.stages.size() && t >= result.stages[si].t_end) ++si;
        const auto& s = result.stages[si];
        tr.t.push_back(t);
        tr.v_gs.push_back(s.v_gs.eval(t));
        tr.v_ds.push_back(s.v_ds.eval(t));
        tr.i_d.push_back(s.i_d.eval(t));
        tr.v_F.push_back(s.v_F.eval(t));
        tr.i_F.push_back(s.i_F.eval(t));
    };
    for (std::size_t k = 0; k <= n_full; ++k) {
        const double t = t0 + dt * static_cast<double>(k);
        if (t >= t1 - 1e-6 * dt) break;
        push(t);
    }
    push(t1);
    const auto& K = kernels::active();
    tr.p_mos.resize(tr.size());
    tr.p_sbd.resize(tr.size());
    K.multiply(tr.v_ds.data(), tr.i_d.data(), tr.p_mos.data(), tr.size());
    K.multiply(tr.v_F.data(), tr.i_F.data(), tr.p_sbd.data(), tr.size());
    return tr;
}

std::pair<double, double> trace_energies(const WaveformTrace& tr) {
    const std::size_t n = tr.size();
    if (n < 2) return {0.0, 0.0};
    const auto& K = kernels::active();
    // uniform body plus a possibly shorter final interval
    const double h = tr.t[1] - tr.t[0];
    const std::size_t body = n - 1;
    double e_mos = 0.0, e_sbd = 0.0;
    if (body >= 2) {
        e_mos = K.trapezoid_product(tr.v_ds.data(), tr.i_d.data(), body, h);
        e_sbd = K.trapezoid_product(tr.v_F.data(), tr.i_F.data(), body, h);
    }
    const double hl = tr.t[n - 1] - tr.t[n - 2];
    e_mos += 0.5 * hl * (tr.p_mos[n - 2] + tr.p_mos[n - 1]);
    e_sbd += 0.5 * hl * (tr.p_sbd[n - 2] + tr.p_sbd[n - 1]);
    return {e_mos, e_sbd};
}

}  // namespace switchcell
