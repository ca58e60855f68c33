#pragma once

#include <string>
#include <utility>
#include <vector>

#include "switchcell/device_model.hpp"

namespace switchcell {

/// Digitized datasheet curve. x strictly increasing.
struct CurveSamples {
    std::vector<std::pair<double, double>> points;
    std::size_t size() const { return points.size(); }
};

/// Throws ValidationError unless x is finite and strictly increasing.
void validate(const CurveSamples& c, const char* what = "curve");

/// Two-column CSV with a header row. Throws ValidationError naming the line.
CurveSamples read_curve_csv(const std::string& path);
CurveSamples parse_curve_csv(const std::string& text, const std::string& origin = "<text>");

struct TransferFit {
    double k_fs = 0.0;
    double v_th0 = 0.0;
    double residual = 0.0;  // rms, A
    std::size_t used = 0;   // samples inside the monotone region
};

/// Least squares i = k (v - v_th0)^2 over the monotone-increasing prefix of the
/// curve. Samples below v_th0 count against a zero prediction.
/// FitError with fewer than 3 positive samples or a non-positive k.
TransferFit fit_transfer_curve(const CurveSamples& samples);

/// Mean of the samples in each segment; a sample on a breakpoint belongs to the
/// lower segment. The last segment ends at the last sample. FitError on an empty
/// segment or a result that is not a valid PiecewiseCapacitance.
PiecewiseCapacitance segment_capacitance_curve(const CurveSamples& samples, const std::vector<double>& breakpoints);

struct TempFit {
    TempCoeffs coeffs;
    double v_th_at_ref = 0.0;
    double k_at_ref = 0.0;
    double rdson_at_ref = 0.0;  // in the units of the input curve
    double rms_vth = 0.0, rms_k = 0.0, rms_rdson = 0.0;
};

/// a, b: slopes of the linear fits of v_th and k against T.
/// c, d, e: quadratic fit of R_ds(on) against T, scaled to equal 1 at t_ref.
TempFit fit_temperature_coeffs(const CurveSamples& vth, const CurveSamples& k, const CurveSamples& rdson,
                               double t_ref);

}  // namespace switchcell
