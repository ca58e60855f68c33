#include "switchcell/multirate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "switchcell/errors.hpp"

namespace switchcell {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

constexpr double kBucket = 0.1;  // K, memo granularity for the electrical model

}  // namespace

void validate(const CouplerConfig& c) {
    if (!(c.dt_min > 0.0)) throw ValidationError("coupler: dt_min must be > 0");
    if (!(c.dt_max >= c.dt_min)) throw ValidationError("coupler: dt_max must be >= dt_min");
    if (!(c.delta_t > 0.0)) throw ValidationError("coupler: delta_t must be > 0");
    if (!(c.xi > 0.0)) throw ValidationError("coupler: xi must be > 0");
}

CouplerState coupler_start(const CouplerConfig& cfg) {
    validate(cfg);
    CouplerState s;
    s.cfg = cfg;
    s.dt_th = cfg.dt_min;
    return s;
}

CouplerState coupler_next_step(const CouplerState& s, double dT_now) {
    CouplerState n = s;
    const auto& c = s.cfg;
    Direction dir = s.direction;
    if (dT_now > 0.0) dir = Direction::Rising;
    else if (dT_now < 0.0) dir = Direction::Falling;

    if (!c.adaptive) {
        n.dt_th = c.dt_min;
    } else if (s.direction == Direction::Rising && dir == Direction::Falling) {
        n.dt_th = c.dt_min;
    } else {
        // rising compares signed changes, falling compares magnitudes
        const double diff = dir == Direction::Rising ? std::abs(dT_now - s.last_dT)
                                                     : std::abs(std::abs(dT_now) - std::abs(s.last_dT));
        if (diff <= c.delta_t) n.dt_th = std::min(s.dt_th + c.xi, c.dt_max);
    }
    n.last_dT = dT_now;
    n.direction = dir;
    return n;
}

void validate(const Scenario& s) {
    validate(s.set);
    if (!(s.v_dc > 0.0)) throw ValidationError("scenario: v_dc must be > 0");
    if (!(s.f_sw > 0.0)) throw ValidationError("scenario: f_sw must be > 0");
    if (!(s.r_load > 0.0)) throw ValidationError("scenario: r_load must be > 0");
    if (s.l_load < 0.0) throw ValidationError("scenario: l_load must be >= 0");
    if (!(s.t_amb > 0.0)) throw ValidationError("scenario: t_amb must be > 0 K");
    if (!(s.horizon > 0.0)) throw ValidationError("scenario: horizon must be > 0");
    if (s.schedule.empty()) throw ValidationError("scenario: duty schedule is empty");
    for (std::size_t i = 0; i < s.schedule.size(); ++i) {
        const auto& w = s.schedule[i];
        if (!(w.t_end > w.t_start))
            throw ValidationError("scenario: duty window " + std::to_string(i + 1) + " has t_end <= t_start");
        if (w.duty < 0.0 || w.duty > 1.0)
            throw ValidationError("scenario: duty " + fmt(w.duty) + " outside [0, 1]");
        if (i == 0 && std::abs(w.t_start) > 1e-12) throw ValidationError("scenario: schedule must start at t = 0");
        if (i > 0 && std::abs(w.t_start - s.schedule[i - 1].t_end) > 1e-12)
            throw ValidationError("scenario: duty windows must be contiguous and non-overlapping");
    }
    if (s.schedule.back().t_end < s.horizon - 1e-12)
        throw ValidationError("scenario: schedule ends at " + fmt(s.schedule.back().t_end) + " s, before the horizon");
}

double duty_at(const std::vector<DutyWindow>& schedule, double t) {
    for (const auto& w : schedule)
        if (t >= w.t_start && t < w.t_end) return w.duty;
    if (!schedule.empty() && std::abs(t - schedule.back().t_end) <= 1e-12) return schedule.back().duty;
    throw DomainError("duty_at: t = " + fmt(t) + " s outside the schedule");
}

CyclePower average_cycle_power(const DeviceSet& set, const OperatingPoint& op, double duty, double f_sw) {
    if (!(f_sw > 0.0)) throw ValidationError("average_cycle_power: f_sw must be > 0");
    if (duty < 0.0 || duty > 1.0) throw ValidationError("average_cycle_power: duty must be in [0, 1]");
    if (duty == 0.0 || op.i_l <= 0.0) return {};
    const auto on = simulate_turn_on(set, op);
    const auto off = simulate_turn_off(set, op);
    const double span = (on.t_finish() - on.t_begin()) + (off.t_finish() - off.t_begin());
    if (span > 1.0 / f_sw)
        throw ValidationError("average_cycle_power: transients last " + fmt(span) +
                              " s, longer than the switching period " + fmt(1.0 / f_sw) + " s");
    const auto cond = conduction_loss(set, op.i_l, duty);
    CyclePower p;
    p.p_mos = (on.e_on_mos + off.e_off_mos) * f_sw + cond.p_mos;
    // SBD switching energy can come out slightly negative (capacitive exchange); no power flows back in
    p.p_sbd = std::max(0.0, (on.e_on_sbd + off.e_off_sbd) * f_sw + cond.p_sbd);
    return p;
}

TemperatureTrajectory run_electrothermal(const Scenario& sc, const CouplerConfig& cfg) {
    validate(sc);
    CouplerState cs = coupler_start(cfg);
    ThermalState th_m = initial_state(sc.set.thermal_mos, sc.t_amb);
    ThermalState th_d = initial_state(sc.set.thermal_sbd, sc.t_amb);

    TemperatureTrajectory out;
    std::map<std::pair<long long, double>, CyclePower> memo;
    auto power = [&](double t_j, double duty) {
        const double i_l = duty * sc.v_dc / sc.r_load;
        const long long key = std::llround(t_j / kBucket);
        auto it = memo.find({key, duty});
        if (it != memo.end()) return it->second;
        double t_eval = static_cast<double>(key) * kBucket;
        // bucket rounding must not push an in-range temperature out of the validity window
        const auto& m = sc.set.mosfet;
        if (t_j >= m.t_min && t_j <= m.t_max) t_eval = std::clamp(t_eval, m.t_min, m.t_max);
        else t_eval = t_j;
        CyclePower p;
        if (duty > 0.0 && i_l > 0.0) {
            const DeviceSet hot = at_temperature(sc.set, t_eval);
            p = average_cycle_power(hot, {sc.v_dc, i_l, t_eval}, duty, sc.f_sw);
        }
        ++out.electrical_evaluations;
        memo.emplace(std::make_pair(key, duty), p);
        return p;
    };

    double t = 0.0;
    const CyclePower p0 = power(th_m.t_j(), duty_at(sc.schedule, 0.0));
    out.samples.push_back({0.0, th_m.t_j(), th_d.t_j(), th_m.t_c(), p0.p_mos, p0.p_sbd, 0.0});
    std::size_t wi = 0;
    while (t < sc.horizon - 1e-12) {
        while (wi + 1 < sc.schedule.size() && t >= sc.schedule[wi].t_end - 1e-12) ++wi;
        double dt = cs.dt_th;
        // land on duty-window edges so power stays piecewise constant per step
        const double edge = std::min(sc.schedule[wi].t_end, sc.horizon);
        if (t + dt > edge - 1e-12) dt = edge - t;
        const CyclePower p = power(th_m.t_j(), sc.schedule[wi].duty);
        const double tj_before = th_m.t_j();
        th_m = foster_advance(th_m, sc.set.thermal_mos, p.p_mos, dt);
        th_d = foster_advance(th_d, sc.set.thermal_sbd, p.p_sbd, dt);
        t = std::abs(t + dt - edge) < 1e-12 ? edge : t + dt;
        out.samples.push_back({t, th_m.t_j(), th_d.t_j(), th_m.t_c(), p.p_mos, p.p_sbd, dt});
        cs = coupler_next_step(cs, th_m.t_j() - tj_before);
    }
    out.exchange_count = static_cast<int>(out.samples.size()) - 1;
    return out;
}

double interpolate_tj(const TemperatureTrajectory& tr, double t) {
    const auto& s = tr.samples;
    if (s.empty()) throw DomainError("interpolate_tj: empty trajectory");
    if (t <= s.front().t) return s.front().tj_mos;
    if (t >= s.back().t) return s.back().tj_mos;
    auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const TrajectorySample& x) { return v < x.t; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    return a.tj_mos + (b.tj_mos - a.tj_mos) * (t - a.t) / (b.t - a.t);
}

}  // namespace switchcell
