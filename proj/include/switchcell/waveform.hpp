#pragma once

#include <array>
#include <string_view>
#include <utility>
#include <vector>

namespace switchcell {

/// Closed-form shapes a stage signal can take. tau = t - t0 throughout.
enum class Shape {
    Constant,      // c0
    Linear,        // c0 + c1 tau
    ExpApproach,   // c0 + (c1 - c0) exp(-tau / c2)     (final c0, start c1, time constant c2)
    Cubic,         // c0 + c1 tau + c2 tau^2 + c3 tau^3
    DampedCosine,  // c0 + exp(-c2 tau) (c1 cos(c3 tau) + c4 sin(c3 tau))
    CosineRise,    // c0 - c1 cos(c2 tau)
    Piecewise,     // linear interpolation through knots (t, y), absolute time
};

std::string_view shape_name(Shape s);

struct Term {
    Shape shape = Shape::Constant;
    double t0 = 0.0;
    std::array<double, 5> c{};
    std::vector<std::pair<double, double>> knots;

    double eval(double t) const;
    double slope(double t) const;
};

/// Sum of terms. Most stage signals are a single term; a few (diode voltage
/// during ringing) need two.
class Waveform {
public:
    Waveform() = default;
    explicit Waveform(Term t) { terms_.push_back(std::move(t)); }

    static Waveform constant(double v);
    static Waveform linear(double t0, double y0, double slope);
    static Waveform exp_approach(double t0, double y_start, double y_final, double tau);
    static Waveform cubic(double t0, const std::array<double, 4>& coeffs);
    static Waveform damped_cosine(double t0, double offset, double amp_cos, double amp_sin,
                                  double alpha, double omega);
    static Waveform cosine_rise(double t0, double center, double amplitude, double omega);
    static Waveform piecewise(std::vector<std::pair<double, double>> knots);

    double eval(double t) const;
    double slope(double t) const;

    /// gain * w(t) + offset
    Waveform affine(double gain, double offset) const;
    Waveform operator+(const Waveform& other) const;

    const std::vector<Term>& terms() const { return terms_; }
    /// Shape of the dominant (first) term, for reporting.
    Shape primary_shape() const { return terms_.empty() ? Shape::Constant : terms_.front().shape; }

private:
    std::vector<Term> terms_;
};

/// Hermite cubic on [t0, t1] matching value and slope at both ends.
/// Returns power-basis coefficients in tau = t - t0: {d, c, b, a} for
/// d + c tau + b tau^2 + a tau^3.
std::array<double, 4> cubic_bridge(double t0, double t1, double y0, double y1, double s0, double s1);

}  // namespace switchcell
