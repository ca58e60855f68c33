#include "switchcell/device_model.hpp"

#include <algorithm>
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

}  // namespace

// =============================================================================
// PiecewiseCapacitance
// =============================================================================

PiecewiseCapacitance::PiecewiseCapacitance(std::vector<CapSegment> segments)
    : segments_(std::move(segments)) {
    if (segments_.empty()) throw ValidationError("capacitance: no segments");
    if (segments_.front().v_low != 0.0) throw ValidationError("capacitance: first segment must start at 0 V");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[i];
        if (!(s.v_high > s.v_low))
            throw ValidationError("capacitance: segment " + std::to_string(i) + " has v_high <= v_low");
        if (!(s.value > 0.0))
            throw ValidationError("capacitance: segment " + std::to_string(i) + " value must be > 0");
        if (i > 0) {
            if (s.v_low != segments_[i - 1].v_high)
                throw ValidationError("capacitance: segments " + std::to_string(i - 1) + " and " +
                                      std::to_string(i) + " are not contiguous");
            if (s.value > segments_[i - 1].value)
                throw ValidationError("capacitance: values must be non-increasing with voltage (segment " +
                                      std::to_string(i) + ")");
        }
    }
}

PiecewiseCapacitance PiecewiseCapacitance::from_values(const std::vector<double>& values,
                                                       const std::vector<double>& breakpoints,
                                                       double v_max) {
    if (values.size() != breakpoints.size() + 1)
        throw ValidationError("capacitance: need exactly one more value than breakpoints (got " +
                              std::to_string(values.size()) + " values, " +
                              std::to_string(breakpoints.size()) + " breakpoints)");
    std::vector<CapSegment> segs;
    double lo = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double hi = i < breakpoints.size() ? breakpoints[i] : v_max;
        segs.push_back({lo, hi, values[i]});
        lo = hi;
    }
    return PiecewiseCapacitance(std::move(segs));
}

std::vector<double> PiecewiseCapacitance::values() const {
    std::vector<double> v;
    for (const auto& s : segments_) v.push_back(s.value);
    return v;
}

std::vector<double> PiecewiseCapacitance::breakpoints() const {
    std::vector<double> b;
    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) b.push_back(segments_[i].v_high);
    return b;
}

double PiecewiseCapacitance::at(double v) const {
    if (segments_.empty()) throw DomainError("capacitance: empty");
    if (!(v >= 0.0) || v > v_max())
        throw DomainError("capacitance: voltage " + fmt(v) + " V outside [0, " + fmt(v_max()) + "] V");
    for (const auto& s : segments_)
        if (v <= s.v_high) return s.value;
    return segments_.back().value;
}

double PiecewiseCapacitance::at_clamped(double v) const {
    if (v <= 0.0) return segments_.front().value;
    for (const auto& s : segments_)
        if (v <= s.v_high) return s.value;
    return segments_.back().value;
}

double PiecewiseCapacitance::charge(double v) const {
    if (v <= 0.0) return segments_.front().value * v;
    double q = 0.0;
    for (const auto& s : segments_) {
        if (v <= s.v_high) return q + s.value * (v - s.v_low);
        q += s.value * (s.v_high - s.v_low);
    }
    return q + segments_.back().value * (v - segments_.back().v_high);
}

double capacitance_at(const PiecewiseCapacitance& cap, double v) { return cap.at(v); }

// =============================================================================
// Validation
// =============================================================================

double rdson_factor(const TempCoeffs& tc, double t) { return (tc.c * t + tc.d) * t + tc.e; }

void validate(const MosfetParams& p) {
    if (!(p.k_fs > 0.0)) throw ValidationError("mosfet.k_fs must be > 0 (got " + fmt(p.k_fs) + ")");
    if (!(p.r_ds_on > 0.0)) throw ValidationError("mosfet.r_ds_on must be > 0 (got " + fmt(p.r_ds_on) + ")");
    if (!(p.c_gs > 0.0)) throw ValidationError("mosfet.c_gs must be > 0 (got " + fmt(p.c_gs) + ")");
    if (p.l_d < 0.0) throw ValidationError("mosfet.l_d must be >= 0");
    if (p.l_s < 0.0) throw ValidationError("mosfet.l_s must be >= 0");
    if (p.c_gd.segments().empty()) throw ValidationError("mosfet.c_gd missing");
    if (p.c_ds.segments().empty()) throw ValidationError("mosfet.c_ds missing");
    if (!(p.t_ref > 0.0)) throw ValidationError("mosfet.t_ref must be > 0 K");
    if (!(p.t_max > p.t_min)) throw ValidationError("mosfet temperature window is empty");
    const double f = rdson_factor(p.temp, p.t_ref);
    if (std::abs(f - 1.0) > 1e-9)
        throw ValidationError("mosfet.temp_c/d/e: c*T0^2 + d*T0 + e must equal 1 at t_ref (got " + fmt(f) + ")");
}

void validate(const SbdParams& p) {
    if (!(p.v_f0 > 0.0)) throw ValidationError("sbd.v_f0 must be > 0 (got " + fmt(p.v_f0) + ")");
    if (p.l_sd < 0.0) throw ValidationError("sbd.l_sd must be >= 0");
    if (p.c_f.segments().empty()) throw ValidationError("sbd.c_f missing");
}

void validate(const GateDrive& p) {
    if (!(p.v_cc > p.v_ee)) throw ValidationError("drive.v_cc must exceed drive.v_ee");
    if (!(p.r_g_int + p.r_g_ext > 0.0)) throw ValidationError("drive.r_g_int + drive.r_g_ext must be > 0");
    if (p.c_gd_ext < 0.0) throw ValidationError("drive.c_gd_ext must be >= 0");
}

void validate(const CircuitParams& p) {
    if (p.l_p < 0.0) throw ValidationError("circuit.l_p must be >= 0");
    if (p.c_l < 0.0) throw ValidationError("circuit.c_l must be >= 0");
    if (p.r_damp < 0.0) throw ValidationError("circuit.r_damp must be >= 0");
}

void validate(const DeviceSet& s) {
    validate(s.mosfet);
    validate(s.sbd);
    validate(s.drive);
    validate(s.circuit);
    validate(s.thermal_mos, "thermal.mosfet");
    validate(s.thermal_sbd, "thermal.sbd");
}

// =============================================================================
// Derived quantities
// =============================================================================

double tangent_gain_factor() {
    const double l = std::sqrt(6.0);
    return 2.0 * (l * l + 3.0 * l + 3.0) / (3.0 * l * (1.0 + l));
}

EquivalentElements aggregate_equivalents(const DeviceSet& set, double v_ds_regime) {
    const auto& m = set.mosfet;
    const double cgd = m.c_gd.at_clamped(v_ds_regime);
    EquivalentElements eq;
    eq.c_iss = m.c_gs + cgd + set.drive.c_gd_ext;
    eq.c_oss = cgd + m.c_ds.at_clamped(v_ds_regime) + set.drive.c_gd_ext;
    eq.c_f_eq = set.sbd.c_f.at_clamped(v_ds_regime) + set.circuit.c_l;
    eq.l_stray = m.l_s + m.l_d + set.circuit.l_p;
    eq.r_g_total = set.drive.r_g_int + set.drive.r_g_ext;
    return eq;
}

MosfetParams apply_temperature(const MosfetParams& params, double t_j) {
    // small slack so values round-tripped through Celsius still count as inside
    const double slack = 1e-9;
    if (t_j < params.t_min - slack || t_j > params.t_max + slack)
        throw DomainError("apply_temperature: t_j = " + fmt(t_j - 273.15) + " C outside validity window [" +
                          fmt(params.t_min - 273.15) + ", " + fmt(params.t_max - 273.15) + "] C");
    MosfetParams out = params;
    const double dt = t_j - params.t_ref;
    out.v_th0 = params.v_th0 + params.temp.a * dt;
    out.k_fs = params.k_fs + params.temp.b * dt;
    out.r_ds_on = params.r_ds_on * rdson_factor(params.temp, t_j);
    if (!(out.k_fs > 0.0))
        throw ValidationError("apply_temperature: corrected k_fs <= 0 at " + fmt(t_j - 273.15) + " C");
    if (!(out.r_ds_on > 0.0))
        throw ValidationError("apply_temperature: corrected r_ds_on <= 0 at " + fmt(t_j - 273.15) + " C");
    return out;
}

DeviceSet at_temperature(const DeviceSet& set, double t_j) {
    DeviceSet out = set;
    out.mosfet = apply_temperature(set.mosfet, t_j);
    return out;
}

LinearizedChannel linearize_channel(const MosfetParams& params, double i_l) {
    if (!(i_l > 0.0)) throw DomainError("linearize_channel: i_l must be > 0 (got " + fmt(i_l) + ")");
    if (!(params.k_fs > 0.0)) throw DomainError("linearize_channel: k_fs must be > 0");
    LinearizedChannel ch;
    const double k = params.k_fs;
    ch.g_fs = tangent_gain_factor() * std::sqrt(k * i_l);
    // threshold shift uses (1 + k) as given; dimensionally odd but kept
    ch.v_th = std::sqrt(i_l / k) / (1.0 + k) + params.v_th0;
    ch.v_miller = i_l / ch.g_fs + ch.v_th;
    ch.v_gs_t3 = i_l / (2.0 * ch.g_fs) + ch.v_th;
    return ch;
}

double on_state_voltage(const MosfetParams& params, double i_l) {
    if (i_l < 0.0) throw DomainError("on_state_voltage: i_l must be >= 0");
    return i_l * params.r_ds_on;
}

}  // namespace switchcell
