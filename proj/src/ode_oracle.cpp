#include "switchcell/ode_oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
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

struct Cell {
    double v_dc, i_l, v_f0, r_g, l_s, l_stray, c_gs, c_gd_ext, c_l, r_on, g_fs, v_th;
    const PiecewiseCapacitance* c_gd;
    const PiecewiseCapacitance* c_ds;
    const PiecewiseCapacitance* c_f;

    // C_gd is a function of the drain-gate voltage; odd extension below zero
    // charge() extends the first segment linearly below zero, so the slope does too
    static double slope(const PiecewiseCapacitance& c, double v) { return v < 0.0 ? c.values().front() : c.at_clamped(v); }
    double q_gd(double v_dg) const { return c_gd->charge(v_dg) + c_gd_ext * v_dg; }
    double cap_gd(double v_dg) const { return slope(*c_gd, v_dg) + c_gd_ext; }
    double q_ds(double v) const { return c_ds->charge(v); }
    double cap_ds(double v) const { return slope(*c_ds, v); }
    // diode charge as a function of reverse voltage v_r = -v_F
    double q_f(double v_r) const { return c_f->charge(v_r) + c_l * v_r; }
    double cap_f(double v_r) const { return slope(*c_f, v_r) + c_l; }

    // channel current and its partials
    void channel(double v_gs, double v_ds, double& i, double& di_dvgs, double& di_dvds) const {
        i = di_dvgs = di_dvds = 0.0;
        if (v_gs <= v_th) return;
        const double sat = g_fs * (v_gs - v_th);
        const double lin = v_ds / r_on;
        if (sat <= lin) {
            i = sat;
            di_dvgs = g_fs;
        } else {
            i = lin;
            di_dvds = 1.0 / r_on;
        }
    }
};

// State plus the companion history the trapezoidal rule carries.
struct Node {
    double v_gs = 0, v_ds = 0, i_d = 0, v_F = 0;
    bool diode_on = true;
    double i_gs = 0, i_gd = 0, i_ds = 0, i_cf = 0, u = 0;  // capacitor currents, di/dt
};

class Stepper {
public:
    Stepper(const Cell& c, const OracleOptions& o) : c_(c), o_(o) {}

    // One implicit step of size h with drive level vd. theta = 0.5 trapezoidal, 1 backward Euler.
    bool step(const Node& n, double h, double vd, double theta, Node& out) const {
        const double a = 1.0 / (theta * h);
        const double k = (1.0 - theta) / theta;
        const double q_gd_n = c_.q_gd(n.v_ds - n.v_gs);
        const double q_ds_n = c_.q_ds(n.v_ds);
        const double q_f_n = c_.q_f(-n.v_F);
        const double vs = std::max(1.0, vd - n.v_gs);

        Eigen::Vector4d x(n.v_gs, n.v_ds, n.i_d, n.v_F);
        const bool blocking = !n.diode_on;
        if (!blocking) x[3] = c_.v_f0;
        Eigen::Vector4d r;
        Eigen::Matrix4d J;
        for (int it = 0; it < o_.newton_max_iter; ++it) {
            const double v_gs = x[0], v_ds = x[1], i_d = x[2], v_F = x[3];
            const double v_dg = v_ds - v_gs;
            const double i_gs = c_.c_gs * (v_gs - n.v_gs) * a - k * n.i_gs;
            const double i_gd = (c_.q_gd(v_dg) - q_gd_n) * a - k * n.i_gd;
            const double i_ds = (c_.q_ds(v_ds) - q_ds_n) * a - k * n.i_ds;
            const double u = (i_d - n.i_d) * a - k * n.u;
            const double i_g = i_gs - i_gd;
            double i_ch, dch_g, dch_d;
            c_.channel(v_gs, v_ds, i_ch, dch_g, dch_d);
            const double cgd = c_.cap_gd(v_dg), cds = c_.cap_ds(v_ds);

            r[0] = vd - c_.r_g * i_g - v_gs - c_.l_s * u;
            r[1] = i_d - i_ch - i_gd - i_ds;
            r[2] = c_.l_stray * u - (c_.v_dc + v_F - v_ds);
            J.setZero();
            J(0, 0) = -c_.r_g * (c_.c_gs + cgd) * a - 1.0;
            J(0, 1) = c_.r_g * cgd * a;
            J(0, 2) = -c_.l_s * a;
            J(1, 0) = -dch_g + cgd * a;
            J(1, 1) = -dch_d - (cgd + cds) * a;
            J(1, 2) = 1.0;
            J(2, 1) = 1.0;
            J(2, 2) = c_.l_stray * a;
            J(2, 3) = -1.0;
            if (blocking) {
                const double i_cf = -(c_.q_f(-v_F) - q_f_n) * a - k * n.i_cf;
                r[3] = i_cf - (c_.i_l - i_d);
                J(3, 2) = 1.0;
                J(3, 3) = c_.cap_f(-v_F) * a;
            } else {
                r[3] = v_F - c_.v_f0;
                J(3, 3) = 1.0;
            }
            const double scaled = std::max({std::abs(r[0]) / vs, std::abs(r[1]) / c_.i_l,
                                            std::abs(r[2]) / c_.v_dc, std::abs(r[3]) / (blocking ? c_.i_l : 1.0)});
            if (scaled < o_.newton_tol && it > 0) {
                out = n;
                out.v_gs = v_gs;
                out.v_ds = v_ds;
                out.i_d = i_d;
                out.v_F = v_F;
                out.i_gs = i_gs;
                out.i_gd = i_gd;
                out.i_ds = i_ds;
                out.u = u;
                out.i_cf = blocking ? -(c_.q_f(-v_F) - q_f_n) * a - k * n.i_cf : 0.0;
                return true;
            }
            const Eigen::Vector4d dx = J.partialPivLu().solve(-r);
            if (!dx.allFinite()) return false;
            x += dx;
        }
        return false;
    }

    // Step with automatic halving on Newton failure.
    bool robust_step(const Node& n, double h, double vd, double theta, Node& out, int depth, int& failures) const {
        if (step(n, h, vd, theta, out)) return true;
        ++failures;
        if (depth >= o_.max_halvings) return false;
        Node mid;
        return robust_step(n, h / 2, vd, theta, mid, depth + 1, failures) &&
               robust_step(mid, h / 2, vd, theta, out, depth + 1, failures);
    }

private:
    const Cell& c_;
    const OracleOptions& o_;
};

CircuitState derive(const Cell& c, const Node& n) {
    CircuitState s;
    s.v_gs = n.v_gs;
    s.v_ds = n.v_ds;
    s.i_d = n.i_d;
    s.v_F = n.v_F;
    s.diode_on = n.diode_on;
    double d1, d2;
    c.channel(n.v_gs, n.v_ds, s.i_ch, d1, d2);
    s.i_gd = n.i_gd;
    s.i_ds = n.i_ds;
    s.i_g = n.i_gs - n.i_gd;
    s.i_F = n.diode_on ? c.i_l - n.i_d : n.i_cf;
    return s;
}

}  // namespace

double fastest_resonance(const DeviceSet& set, const OperatingPoint& op) {
    const auto hv = aggregate_equivalents(set, op.v_dc);
    const double l = hv.l_stray;
    if (!(l > 0.0)) return 0.0;
    const double c_min = std::min(hv.c_f_eq, hv.c_oss);
    return 1.0 / std::sqrt(l * c_min);
}

OracleRun integrate_dpt(const DeviceSet& set, const OperatingPoint& op, const std::vector<GateEvent>& gate,
                        const OracleOptions& opts) {
    validate(op);
    if (gate.empty()) throw ValidationError("integrate_dpt: gate sequence is empty");
    for (std::size_t i = 1; i < gate.size(); ++i)
        if (!(gate[i].time > gate[i - 1].time))
            throw ValidationError("integrate_dpt: gate event times must be increasing");
    if (!(opts.dt > 0.0) || !(opts.horizon > 0.0)) throw ValidationError("integrate_dpt: dt and horizon must be > 0");
    const double w = fastest_resonance(set, op);
    if (w > 0.0 && opts.dt > 1.0 / (20.0 * w))
        throw ValidationError("integrate_dpt: dt = " + fmt(opts.dt) + " s exceeds 1/(20 w_max) = " +
                              fmt(1.0 / (20.0 * w)) + " s");
    if (gate.back().time >= opts.horizon) throw ValidationError("integrate_dpt: horizon must cover the gate sequence");

    const auto ch = linearize_channel(set.mosfet, op.i_l);
    const auto eq = aggregate_equivalents(set, 0.0);
    const Cell c{op.v_dc, op.i_l, set.sbd.v_f0, eq.r_g_total, set.mosfet.l_s, eq.l_stray, set.mosfet.c_gs,
                 set.drive.c_gd_ext, set.circuit.c_l, set.mosfet.r_ds_on, ch.g_fs, ch.v_th,
                 &set.mosfet.c_gd, &set.mosfet.c_ds, &set.sbd.c_f};
    Stepper st(c, opts);

    // steady state for the first gate level
    Node n;
    const double v0 = gate.front().level;
    n.v_gs = v0;
    if (v0 <= ch.v_th) {
        n.v_ds = op.v_dc + c.v_f0;
        n.i_d = 0.0;
        n.v_F = c.v_f0;
        n.diode_on = true;
    } else {
        if (ch.g_fs * (v0 - ch.v_th) < op.i_l)
            throw NumericError("integrate_dpt: gate level " + fmt(v0) + " V cannot carry the load current");
        n.i_d = op.i_l;
        n.v_ds = op.i_l * c.r_on;
        n.v_F = n.v_ds - op.v_dc;
        n.diode_on = false;
    }

    OracleRun run;
    const auto n_steps = static_cast<std::size_t>(std::llround(opts.horizon / opts.dt));
    run.trace.reserve(n_steps + 1);
    auto level_at = [&](double t) {
        double lv = gate.front().level;
        for (const auto& g : gate)
            if (g.time <= t) lv = g.level;
        return lv;
    };
    auto record = [&](double t, const Node& s) {
        const CircuitState d = derive(c, s);
        run.trace.t.push_back(t);
        run.trace.v_gs.push_back(d.v_gs);
        run.trace.v_ds.push_back(d.v_ds);
        run.trace.i_d.push_back(d.i_d);
        run.trace.v_F.push_back(d.v_F);
        run.trace.i_F.push_back(d.i_F);
        run.trace.p_mos.push_back(d.v_ds * d.i_d);
        run.trace.p_sbd.push_back(d.v_F * d.i_F);
        run.max_kcl_residual = std::max(run.max_kcl_residual, std::abs(d.i_d - d.i_ch - d.i_gd - d.i_ds));
        run.max_kirchhoff_residual = std::max(run.max_kirchhoff_residual, std::abs(op.i_l - d.i_F - d.i_d));
        run.peak_i_d = std::max(run.peak_i_d, d.i_d);
        run.peak_v_ds = std::max(run.peak_v_ds, d.v_ds);
    };
    const double i_start = n.i_d;
    auto accumulate = [&](const Node& a, const Node& b, double h) {
        const CircuitState da = derive(c, a), db = derive(c, b);
        run.e_supply += 0.5 * h * op.v_dc * (da.i_d + db.i_d);
        run.e_load += 0.5 * h * (-(da.v_F) - db.v_F) * op.i_l;
        run.e_mos += 0.5 * h * (da.v_ds * da.i_d + db.v_ds * db.i_d);
        run.e_sbd += 0.5 * h * (da.v_F * da.i_F + db.v_F * db.i_F);
    };
    // event function: positive while the current diode mode is consistent
    auto event_value = [&](const Node& s) { return s.diode_on ? (op.i_l - s.i_d) : (c.v_f0 - s.v_F); };

    // advance from time t by h (no breakpoint inside), handling diode events
    double t = 0.0;
    auto advance = [&](double h, double vd) {
        double remaining = h;
        int guard = 0;
        while (remaining > 1e-18) {
            if (++guard > 1000) throw NumericError("integrate_dpt: diode chatter near t = " + fmt(t) + " s");
            Node next;
            if (!st.robust_step(n, remaining, vd, 0.5, next, 0, run.newton_failures))
                throw NumericError("integrate_dpt: Newton failed at t = " + fmt(t) +
                                   " s after step halving; try a smaller dt");
            if (event_value(next) >= 0.0) {
                accumulate(n, next, remaining);
                n = next;
                t += remaining;
                remaining = 0.0;
                break;
            }
            // bisect the crossing
            double lo = 0.0, hi = remaining;
            Node at_hi = next;
            while (hi - lo > opts.event_resolution) {
                const double mid = 0.5 * (lo + hi);
                Node trial;
                if (!st.robust_step(n, mid, vd, 0.5, trial, 0, run.newton_failures))
                    throw NumericError("integrate_dpt: Newton failed while locating a diode event");
                if (event_value(trial) >= 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                    at_hi = trial;
                }
            }
            accumulate(n, at_hi, hi);
            n = at_hi;
            t += hi;
            remaining -= hi;
            ++run.diode_events;
            if (n.diode_on) {
                n.diode_on = false;
                n.i_cf = op.i_l - n.i_d;
            } else {
                n.diode_on = true;
                n.v_F = c.v_f0;
                n.i_cf = 0.0;
            }
        }
    };
    // backward-Euler micro step so the trapezoidal history matches the new drive level
    auto reinit = [&](double vd) {
        Node next;
        const double h = std::min(1e-13, 1e-2 * opts.dt);  // smaller loses the charge differences to roundoff
        if (!st.robust_step(n, h, vd, 1.0, next, 0, run.newton_failures))
            throw NumericError("integrate_dpt: could not re-initialise after a gate transition");
        accumulate(n, next, h);
        n = next;
        t += h;
    };

    record(0.0, n);
    std::size_t next_gate = 1;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        const double t_grid = opts.dt * static_cast<double>(k);
        while (t < t_grid - 1e-18) {
            double t_stop = t_grid;
            bool at_gate = false;
            if (next_gate < gate.size() && gate[next_gate].time <= t_grid && gate[next_gate].time > t) {
                t_stop = gate[next_gate].time;
                at_gate = true;
            }
            advance(t_stop - t, level_at(t));
            t = t_stop;
            if (at_gate) {
                reinit(gate[next_gate].level);
                ++next_gate;
            }
            if (t_grid - t < 2e-15) break;
        }
        t = t_grid;
        record(t_grid, n);
        if (!std::isfinite(n.v_ds) || std::abs(n.v_ds) > 1e3 * op.v_dc)
            throw NumericError("integrate_dpt: state diverged at t = " + fmt(t) + " s; use a smaller dt");
    }
    run.e_stored = 0.5 * c.l_stray * (n.i_d * n.i_d - i_start * i_start);
    run.final_state = derive(c, n);
    return run;
}

std::pair<double, double> energies_from_trace(const WaveformTrace& tr, double t_a, double t_b) {
    if (!(t_b > t_a)) throw DomainError("energies_from_trace: empty window");
    if (tr.size() < 2 || t_a < tr.t.front() - 1e-15 || t_b > tr.t.back() + 1e-15)
        throw DomainError("energies_from_trace: window outside the trace");
    auto interp = [&](const std::vector<double>& y, double t) {
        auto it = std::upper_bound(tr.t.begin(), tr.t.end(), t);
        std::size_t i = it == tr.t.begin() ? 0 : static_cast<std::size_t>(it - tr.t.begin()) - 1;
        i = std::min(i, tr.size() - 2);
        const double f = (t - tr.t[i]) / (tr.t[i + 1] - tr.t[i]);
        return y[i] + f * (y[i + 1] - y[i]);
    };
    // first and last sample strictly inside the window
    const auto first = static_cast<std::size_t>(std::lower_bound(tr.t.begin(), tr.t.end(), t_a) - tr.t.begin());
    const auto last_it = std::upper_bound(tr.t.begin(), tr.t.end(), t_b);
    const auto last = static_cast<std::size_t>(last_it - tr.t.begin());  // one past
    double e_mos = 0.0, e_sbd = 0.0;
    const auto& K = kernels::active();
    if (last > first + 1) {
        const double h = tr.t[first + 1] - tr.t[first];
        e_mos = K.trapezoid_product(tr.v_ds.data() + first, tr.i_d.data() + first, last - first, h);
        e_sbd = K.trapezoid_product(tr.v_F.data() + first, tr.i_F.data() + first, last - first, h);
    }
    auto edge = [&](double ta, double tb) {
        if (!(tb > ta)) return;
        const double pa = interp(tr.p_mos, ta), pb = interp(tr.p_mos, tb);
        const double sa = interp(tr.p_sbd, ta), sb = interp(tr.p_sbd, tb);
        e_mos += 0.5 * (tb - ta) * (pa + pb);
        e_sbd += 0.5 * (tb - ta) * (sa + sb);
    };
    if (last > first) {
        edge(t_a, tr.t[first]);
        edge(tr.t[last - 1], t_b);
    } else {
        edge(t_a, t_b);
    }
    return {e_mos, e_sbd};
}

std::pair<double, double> settled_energies(const WaveformTrace& tr, double t_a, double t_b, double period,
                                           int samples) {
    if (!(period > 0.0) || samples < 1) throw DomainError("settled_energies: period must be > 0");
    double m = 0.0, s = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = t_b + period * (k + 0.5) / samples;
        const auto [em, es] = energies_from_trace(tr, t_a, t);
        m += em;
        s += es;
    }
    return {m / samples, s / samples};
}

}  // namespace switchcell
