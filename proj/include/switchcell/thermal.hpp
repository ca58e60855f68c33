#pragma once

#include <vector>

namespace switchcell {

struct RcStage {
    double r_th;  // K/W
    double c_th;  // J/K
    double tau() const { return r_th * c_th; }
    bool operator==(const RcStage&) const = default;
};

/// Junction-to-case Foster stages plus an optional case-to-ambient chain.
struct FosterLadder {
    std::vector<RcStage> stages;
    std::vector<RcStage> case_to_ambient;
    bool operator==(const FosterLadder&) const = default;
};

/// Throws ValidationError when a value is not positive or there are no stages.
void validate(const FosterLadder& ladder, const char* what = "thermal");

struct ThermalState {
    std::vector<double> junction_drops;  // one per junction stage, K
    std::vector<double> case_drops;      // one per case-path stage, K
    double t_amb = 298.15;

    double t_c() const;
    double t_j() const;
};

ThermalState initial_state(const FosterLadder& ladder, double t_amb);

/// Exact update for power held constant over dt:
/// dT_i <- dT_i e^{-dt/tau_i} + p r_i (1 - e^{-dt/tau_i}).
ThermalState foster_advance(const ThermalState& state, const FosterLadder& ladder,
                            double p_loss, double dt);

/// p times the sum of every r_th (junction and case path).
double steady_state_rise(const FosterLadder& ladder, double p_loss);

/// p times the sum of the junction-to-case r_th only.
double junction_to_case_rise(const FosterLadder& ladder, double p_loss);

}  // namespace switchcell
