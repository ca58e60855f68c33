#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "switchcell/thermal.hpp"

namespace switchcell {

// All values SI: V, A, F, H, s, K, J, W.

// =============================================================================
// Piecewise-constant capacitance
// =============================================================================

struct CapSegment {
    double v_low;
    double v_high;
    double value;
    bool operator==(const CapSegment&) const = default;
};

class PiecewiseCapacitance {
public:
    PiecewiseCapacitance() = default;
    /// Throws ValidationError if the segments break an invariant.
    explicit PiecewiseCapacitance(std::vector<CapSegment> segments);

    /// values.size() == breakpoints.size() + 1; last segment ends at v_max.
    static PiecewiseCapacitance from_values(const std::vector<double>& values,
                                            const std::vector<double>& breakpoints,
                                            double v_max);

    const std::vector<CapSegment>& segments() const { return segments_; }
    double v_max() const { return segments_.empty() ? 0.0 : segments_.back().v_high; }
    std::vector<double> values() const;
    std::vector<double> breakpoints() const;

    /// Segment value at v; a boundary belongs to the lower segment.
    /// Throws DomainError outside [0, v_max].
    double at(double v) const;

    /// Same lookup but clamps v into range. Negative voltages use the first
    /// segment. For solvers that may poke slightly outside.
    double at_clamped(double v) const;

    /// Stored charge from 0 to v (integral of C). Linear extension outside
    /// the covered range with the end segment values.
    double charge(double v) const;

    bool operator==(const PiecewiseCapacitance&) const = default;

private:
    std::vector<CapSegment> segments_;
};

// =============================================================================
// Parameter sets
// =============================================================================

/// v_th(T) = v_th0 + a (T - T0); k(T) = k0 + b (T - T0); r(T) = r0 (c T^2 + d T + e)
struct TempCoeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double e = 1.0;
    bool operator==(const TempCoeffs&) const = default;
};

struct MosfetParams {
    double v_th0 = 0.0;
    double k_fs = 0.0;
    double r_ds_on = 0.0;
    double c_gs = 0.0;
    PiecewiseCapacitance c_gd;
    PiecewiseCapacitance c_ds;
    double l_d = 0.0;
    double l_s = 0.0;
    TempCoeffs temp;
    double t_ref = 298.15;
    double t_min = 298.15;  // validity window for apply_temperature
    double t_max = 423.15;
    bool operator==(const MosfetParams&) const = default;
};

struct SbdParams {
    double v_f0 = 0.0;
    PiecewiseCapacitance c_f;
    double l_sd = 0.0;
    bool operator==(const SbdParams&) const = default;
};

struct GateDrive {
    double v_cc = 0.0;
    double v_ee = 0.0;
    double r_g_int = 0.0;
    double r_g_ext = 0.0;
    double c_gd_ext = 0.0;
    bool operator==(const GateDrive&) const = default;
};

struct CircuitParams {
    double l_p = 0.0;
    double c_l = 0.0;
    /// Loop resistance for ring-down damping; <= 0 means "use r_ds_on".
    double r_damp = 0.0;
    bool operator==(const CircuitParams&) const = default;
};

struct DeviceSet {
    MosfetParams mosfet;
    SbdParams sbd;
    GateDrive drive;
    CircuitParams circuit;
    FosterLadder thermal_mos;
    FosterLadder thermal_sbd;
    bool operator==(const DeviceSet&) const = default;
};

/// Throws ValidationError naming the first broken invariant ("mosfet.k_fs", ...).
void validate(const MosfetParams& p);
void validate(const SbdParams& p);
void validate(const GateDrive& p);
void validate(const CircuitParams& p);
void validate(const DeviceSet& s);

// =============================================================================
// Derived quantities
// =============================================================================

/// 2(l^2+3l+3)/(3l(1+l)) with l = sqrt(6); about 1.2901.
double tangent_gain_factor();

struct LinearizedChannel {
    double g_fs = 0.0;
    double v_th = 0.0;
    double v_miller = 0.0;
    double v_gs_t3 = 0.0;  // gate voltage at half load current
    double lambda = std::sqrt(6.0);
};

struct EquivalentElements {
    double c_iss = 0.0;
    double c_oss = 0.0;
    double c_f_eq = 0.0;
    double l_stray = 0.0;
    double r_g_total = 0.0;
};

double capacitance_at(const PiecewiseCapacitance& cap, double v);

EquivalentElements aggregate_equivalents(const DeviceSet& set, double v_ds_regime);

/// Temperature-corrected copy. Throws DomainError outside [t_min, t_max]
/// and ValidationError if k_fs or r_ds_on end up non-positive.
MosfetParams apply_temperature(const MosfetParams& params, double t_j);

/// DeviceSet with the MOSFET corrected to t_j.
DeviceSet at_temperature(const DeviceSet& set, double t_j);

/// Tangent linearization of the square-law channel at half the load current.
LinearizedChannel linearize_channel(const MosfetParams& params, double i_l);

double on_state_voltage(const MosfetParams& params, double i_l);

/// c T0^2 + d T0 + e; must be 1 for a usable coefficient set.
double rdson_factor(const TempCoeffs& tc, double t);

}  // namespace switchcell
