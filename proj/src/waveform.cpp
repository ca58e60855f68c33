#include "switchcell/waveform.hpp"

#include <algorithm>
#include <cmath>

#include "switchcell/errors.hpp"

namespace switchcell {

std::string_view shape_name(Shape s) {
    switch (s) {
        case Shape::Constant: return "constant";
        case Shape::Linear: return "linear";
        case Shape::ExpApproach: return "exponential-approach";
        case Shape::Cubic: return "cubic";
        case Shape::DampedCosine: return "damped-cosine";
        case Shape::CosineRise: return "cosine-rise";
        case Shape::Piecewise: return "piecewise-linear";
    }
    return "?";
}

namespace {

// index of the knot interval containing t (clamped)
std::size_t knot_index(const std::vector<std::pair<double, double>>& k, double t) {
    auto it = std::upper_bound(k.begin(), k.end(), t,
                               [](double v, const std::pair<double, double>& p) { return v < p.first; });
    std::size_t i = it == k.begin() ? 0 : static_cast<std::size_t>(it - k.begin()) - 1;
    return std::min(i, k.size() - 2);
}

}  // namespace

double Term::eval(double t) const {
    const double tau = t - t0;
    switch (shape) {
        case Shape::Constant: return c[0];
        case Shape::Linear: return c[0] + c[1] * tau;
        case Shape::ExpApproach: return c[0] + (c[1] - c[0]) * std::exp(-tau / c[2]);
        case Shape::Cubic: return c[0] + tau * (c[1] + tau * (c[2] + tau * c[3]));
        case Shape::DampedCosine: {
            const double e = std::exp(-c[2] * tau);
            return c[0] + e * (c[1] * std::cos(c[3] * tau) + c[4] * std::sin(c[3] * tau));
        }
        case Shape::CosineRise: return c[0] - c[1] * std::cos(c[2] * tau);
        case Shape::Piecewise: {
            if (knots.size() == 1) return knots[0].second;
            const std::size_t i = knot_index(knots, t);
            const auto& [ta, ya] = knots[i];
            const auto& [tb, yb] = knots[i + 1];
            if (t <= ta) return ya;
            if (t >= tb) return i + 2 == knots.size() ? yb : ya + (yb - ya) * (t - ta) / (tb - ta);
            return ya + (yb - ya) * (t - ta) / (tb - ta);
        }
    }
    return 0.0;
}

double Term::slope(double t) const {
    const double tau = t - t0;
    switch (shape) {
        case Shape::Constant: return 0.0;
        case Shape::Linear: return c[1];
        case Shape::ExpApproach: return -(c[1] - c[0]) / c[2] * std::exp(-tau / c[2]);
        case Shape::Cubic: return c[1] + tau * (2.0 * c[2] + 3.0 * tau * c[3]);
        case Shape::DampedCosine: {
            const double e = std::exp(-c[2] * tau);
            const double cs = std::cos(c[3] * tau), sn = std::sin(c[3] * tau);
            return e * (-c[2] * (c[1] * cs + c[4] * sn) + c[3] * (-c[1] * sn + c[4] * cs));
        }
        case Shape::CosineRise: return c[1] * c[2] * std::sin(c[2] * tau);
        case Shape::Piecewise: {
            if (knots.size() < 2) return 0.0;
            const std::size_t i = knot_index(knots, t);
            const auto& [ta, ya] = knots[i];
            const auto& [tb, yb] = knots[i + 1];
            return (yb - ya) / (tb - ta);
        }
    }
    return 0.0;
}

Waveform Waveform::constant(double v) {
    Term t;
    t.shape = Shape::Constant;
    t.c[0] = v;
    return Waveform(t);
}

Waveform Waveform::linear(double t0, double y0, double slope) {
    Term t;
    t.shape = Shape::Linear;
    t.t0 = t0;
    t.c[0] = y0;
    t.c[1] = slope;
    return Waveform(t);
}

Waveform Waveform::exp_approach(double t0, double y_start, double y_final, double tau) {
    if (!(tau > 0.0)) throw DomainError("exp_approach: time constant must be > 0");
    Term t;
    t.shape = Shape::ExpApproach;
    t.t0 = t0;
    t.c[0] = y_final;
    t.c[1] = y_start;
    t.c[2] = tau;
    return Waveform(t);
}

Waveform Waveform::cubic(double t0, const std::array<double, 4>& k) {
    Term t;
    t.shape = Shape::Cubic;
    t.t0 = t0;
    for (int i = 0; i < 4; ++i) t.c[i] = k[i];
    return Waveform(t);
}

Waveform Waveform::damped_cosine(double t0, double offset, double amp_cos, double amp_sin,
                                 double alpha, double omega) {
    Term t;
    t.shape = Shape::DampedCosine;
    t.t0 = t0;
    t.c = {offset, amp_cos, alpha, omega, amp_sin};
    return Waveform(t);
}

Waveform Waveform::cosine_rise(double t0, double center, double amplitude, double omega) {
    Term t;
    t.shape = Shape::CosineRise;
    t.t0 = t0;
    t.c[0] = center;
    t.c[1] = amplitude;
    t.c[2] = omega;
    return Waveform(t);
}

Waveform Waveform::piecewise(std::vector<std::pair<double, double>> knots) {
    if (knots.empty()) throw DomainError("piecewise waveform needs at least one knot");
    Term t;
    t.shape = Shape::Piecewise;
    t.t0 = knots.front().first;
    t.knots = std::move(knots);
    return Waveform(t);
}

double Waveform::eval(double t) const {
    double s = 0.0;
    for (const auto& term : terms_) s += term.eval(t);
    return s;
}

double Waveform::slope(double t) const {
    double s = 0.0;
    for (const auto& term : terms_) s += term.slope(t);
    return s;
}

Waveform Waveform::affine(double gain, double offset) const {
    Waveform out = *this;
    bool absorbed = false;
    for (auto& term : out.terms_) {
        switch (term.shape) {
            case Shape::Constant:
            case Shape::Linear:
            case Shape::Cubic:
                for (auto& c : term.c) c *= gain;
                break;
            case Shape::ExpApproach:
                term.c[0] *= gain;
                term.c[1] *= gain;
                if (!absorbed) {
                    term.c[0] += offset;
                    term.c[1] += offset;
                    absorbed = true;
                }
                continue;
            case Shape::DampedCosine:
                term.c[0] *= gain;
                term.c[1] *= gain;
                term.c[4] *= gain;
                break;
            case Shape::CosineRise:
                term.c[0] *= gain;
                term.c[1] *= gain;
                break;
            case Shape::Piecewise:
                for (auto& k : term.knots) k.second = gain * k.second + (absorbed ? 0.0 : offset);
                if (!absorbed) absorbed = true;
                continue;
        }
        if (!absorbed) {
            term.c[0] += offset;
            absorbed = true;
        }
    }
    if (!absorbed) out.terms_.push_back(constant(offset).terms_.front());
    return out;
}

Waveform Waveform::operator+(const Waveform& other) const {
    Waveform out = *this;
    out.terms_.insert(out.terms_.end(), other.terms_.begin(), other.terms_.end());
    return out;
}

std::array<double, 4> cubic_bridge(double t0, double t1, double y0, double y1, double s0, double s1) {
    const double T = t1 - t0;
    if (!(T > 0.0)) throw DomainError("cubic_bridge: t1 must be > t0");
    const double dy = y1 - y0;
    const double b = (3.0 * dy / T - 2.0 * s0 - s1) / T;
    const double a = (s0 + s1 - 2.0 * dy / T) / (T * T);
    return {y0, s0, b, a};
}

}  // namespace switchcell
