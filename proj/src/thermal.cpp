#include "switchcell/thermal.hpp"

#include <cmath>
#include <string>

#include "switchcell/errors.hpp"

namespace switchcell {

void validate(const FosterLadder& ladder, const char* what) {
    if (ladder.stages.empty())
        throw ValidationError(std::string(what) + ": needs at least one junction-to-case stage");
    auto check = [&](const std::vector<RcStage>& v, const char* part) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i].r_th > 0.0) || !(v[i].c_th > 0.0))
                throw ValidationError(std::string(what) + "." + part + "[" + std::to_string(i) +
                                      "]: r_th and c_th must be > 0");
        }
    };
    check(ladder.stages, "r/c");
    check(ladder.case_to_ambient, "case_r/case_c");
}

double ThermalState::t_c() const {
    double t = t_amb;
    for (double d : case_drops) t += d;
    return t;
}

double ThermalState::t_j() const {
    double t = t_c();
    for (double d : junction_drops) t += d;
    return t;
}

ThermalState initial_state(const FosterLadder& ladder, double t_amb) {
    ThermalState s;
    s.junction_drops.assign(ladder.stages.size(), 0.0);
    s.case_drops.assign(ladder.case_to_ambient.size(), 0.0);
    s.t_amb = t_amb;
    return s;
}

namespace {

void advance_chain(std::vector<double>& drops, const std::vector<RcStage>& chain, double p, double dt) {
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const double x = -dt / chain[i].tau();
        // expm1 keeps the (1 - e^x) term accurate for dt << tau
        drops[i] = drops[i] * std::exp(x) - p * chain[i].r_th * std::expm1(x);
    }
}

}  // namespace

ThermalState foster_advance(const ThermalState& state, const FosterLadder& ladder,
                            double p_loss, double dt) {
    if (!(dt > 0.0)) throw DomainError("foster_advance: dt must be > 0");
    if (p_loss < 0.0) throw DomainError("foster_advance: p_loss must be >= 0");
    ThermalState next = state;
    next.junction_drops.resize(ladder.stages.size(), 0.0);
    next.case_drops.resize(ladder.case_to_ambient.size(), 0.0);
    advance_chain(next.junction_drops, ladder.stages, p_loss, dt);
    advance_chain(next.case_drops, ladder.case_to_ambient, p_loss, dt);
    return next;
}

double junction_to_case_rise(const FosterLadder& ladder, double p_loss) {
    double r = 0.0;
    for (const auto& s : ladder.stages) r += s.r_th;
    return p_loss * r;
}

double steady_state_rise(const FosterLadder& ladder, double p_loss) {
    double r = 0.0;
    for (const auto& s : ladder.stages) r += s.r_th;
    for (const auto& s : ladder.case_to_ambient) r += s.r_th;
    return p_loss * r;
}

}  // namespace switchcell
