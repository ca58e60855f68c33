#include "switchcell/extraction.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
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

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stod(t, &pos);
    } catch (const std::exception&) {
        return false;
    }
    return pos == t.size() && std::isfinite(out);
}

// sum of squared residuals of i = k (v - v0)^2 with the best k for this v0
struct TransferObjective {
    const std::vector<std::pair<double, double>>& pts;

    std::pair<double, double> operator()(double v0) const {
        double sww = 0.0, swy = 0.0, below = 0.0;
        for (const auto& [v, y] : pts) {
            if (v > v0) {
                const double w = (v - v0) * (v - v0);
                sww += w * w;
                swy += w * y;
            } else {
                below += y * y;
            }
        }
        const double k = sww > 0.0 ? swy / sww : 0.0;
        double s = below;
        for (const auto& [v, y] : pts)
            if (v > v0) {
                const double r = y - k * (v - v0) * (v - v0);
                s += r * r;
            }
        return {s, k};
    }
};

struct LineFit {
    double slope, intercept_at_ref, rms;
};

LineFit fit_line(const CurveSamples& c, double t_ref, const char* what) {
    if (c.size() < 2) throw FitError(std::string(what) + ": a linear fit needs at least 2 points");
    double xm = 0.0, ym = 0.0;
    for (const auto& [x, y] : c.points) {
        xm += x;
        ym += y;
    }
    xm /= c.size();
    ym /= c.size();
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : c.points) {
        sxx += (x - xm) * (x - xm);
        sxy += (x - xm) * (y - ym);
    }
    if (!(sxx > 0.0)) throw FitError(std::string(what) + ": all temperatures are equal");
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (const auto& [x, y] : c.points) {
        const double r = y - (ym + slope * (x - xm));
        ss += r * r;
    }
    return {slope, ym + slope * (t_ref - xm), std::sqrt(ss / c.size())};
}

void check_ref_in_range(const CurveSamples& c, double t_ref, const char* what) {
    const double lo = c.points.front().first, hi = c.points.back().first;
    const double slack = 1e-9 * std::max(1.0, std::abs(t_ref));
    if (t_ref < lo - slack || t_ref > hi + slack)
        throw ValidationError(std::string(what) + ": t_ref = " + fmt(t_ref) + " K outside the sample range [" +
                              fmt(lo) + ", " + fmt(hi) + "] K");
}

}  // namespace

void validate(const CurveSamples& c, const char* what) {
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        const auto& [x, y] = c.points[i];
        if (!std::isfinite(x) || !std::isfinite(y))
            throw ValidationError(std::string(what) + ": non-finite value at point " + std::to_string(i + 1));
        if (i > 0 && !(x > c.points[i - 1].first))
            throw ValidationError(std::string(what) + ": x must be strictly increasing (point " +
                                  std::to_string(i + 1) + ")");
    }
}

CurveSamples parse_curve_csv(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    CurveSamples c;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        const auto comma = t.find(',');
        double x, y;
        if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos ||
            !parse_double(t.substr(0, comma), x) || !parse_double(t.substr(comma + 1), y))
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected two numeric columns, got '" +
                                  t + "'");
        c.points.emplace_back(x, y);
    }
    if (!header) throw ValidationError(origin + ": missing header row");
    validate(c, origin.c_str());
    return c;
}

CurveSamples read_curve_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open curve file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_curve_csv(ss.str(), path);
}

TransferFit fit_transfer_curve(const CurveSamples& samples) {
    validate(samples, "transfer curve");
    for (const auto& [v, i] : samples.points)
        if (i < 0.0) throw ValidationError("transfer curve: currents must be >= 0 (got " + fmt(i) + " A)");
    // keep the monotone-increasing prefix; past it the curve is usually self-heating or saturation
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : samples.points) {
        if (!pts.empty() && p.second < pts.back().second) break;
        pts.push_back(p);
    }
    std::size_t positive = 0;
    double x_pos = 0.0;
    for (const auto& [v, i] : pts)
        if (i > 0.0 && positive++ == 0) x_pos = v;
    if (positive < 3)
        throw FitError("transfer curve: need at least 3 samples with i > 0 in the monotone region (have " +
                       std::to_string(positive) + ")");

    const TransferObjective f{pts};
    const double span = pts.back().first - pts.front().first;
    const double lo = x_pos - 3.0 * span - 1.0, hi = x_pos;
    constexpr int kScan = 400;
    double best = f(hi).first;
    int best_i = kScan;
    for (int i = 0; i < kScan; ++i) {
        const double s = f(lo + (hi - lo) * i / kScan).first;
        if (s < best) {
            best = s;
            best_i = i;
        }
    }
    double a = lo + (hi - lo) * std::max(0, best_i - 1) / kScan;
    double b = lo + (hi - lo) * std::min(kScan, best_i + 1) / kScan;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c).first, fd = f(d).first;
    for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c).first;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d).first;
        }
    }
    const double v0 = 0.5 * (a + b);
    const auto [ss, k] = f(v0);
    TransferFit out{k, v0, std::sqrt(ss / pts.size()), pts.size()};
    if (!(k > 0.0) || !std::isfinite(k))
        throw FitError("transfer curve: fit gave k_fs = " + fmt(k) + " (rms residual " + fmt(out.residual) + " A)");
    return out;
}

PiecewiseCapacitance segment_capacitance_curve(const CurveSamples& samples, const std::vector<double>& breakpoints) {
    validate(samples, "capacitance curve");
    if (samples.size() == 0) throw FitError("capacitance curve: no samples");
    const double x_lo = samples.points.front().first, x_hi = samples.points.back().first;
    if (x_lo < 0.0) throw ValidationError("capacitance curve: voltages must be >= 0");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        if (i > 0 && !(breakpoints[i] > breakpoints[i - 1]))
            throw ValidationError("capacitance breakpoints must be strictly increasing");
        if (!(breakpoints[i] > 0.0))
            throw ValidationError("capacitance breakpoints must be > 0");
    }
    std::vector<double> sum(breakpoints.size() + 1, 0.0);
    std::vector<int> count(sum.size(), 0);
    for (const auto& [v, c] : samples.points) {
        const auto seg = static_cast<std::size_t>(std::lower_bound(breakpoints.begin(), breakpoints.end(), v) -
                                                  breakpoints.begin());
        sum[seg] += c;
        ++count[seg];
    }
    std::vector<double> values(sum.size());
    for (std::size_t s = 0; s < sum.size(); ++s) {
        if (count[s] == 0) {
            const double a = s == 0 ? 0.0 : breakpoints[s - 1];
            const double b = s < breakpoints.size() ? breakpoints[s] : x_hi;
            throw FitError("capacitance curve: no samples in segment " + std::to_string(s + 1) + " (" + fmt(a) +
                           " V to " + fmt(b) + " V)");
        }
        values[s] = sum[s] / count[s];
        // equal plateaus can average a rounding step apart
        if (s > 0 && values[s] > values[s - 1] && values[s] - values[s - 1] <= 1e-12 * values[s - 1])
            values[s] = values[s - 1];
    }
    if (!breakpoints.empty() && !(x_hi > breakpoints.back()))
        throw FitError("capacitance curve: last breakpoint is not below the last sample");
    try {
        return PiecewiseCapacitance::from_values(values, breakpoints, x_hi);
    } catch (const ValidationError& e) {
        throw FitError(std::string("capacitance curve: segment means do not form a valid capacitance: ") + e.what());
    }
}

TempFit fit_temperature_coeffs(const CurveSamples& vth, const CurveSamples& k, const CurveSamples& rdson,
                               double t_ref) {
    validate(vth, "v_th(T) curve");
    validate(k, "k_fs(T) curve");
    validate(rdson, "R_ds(on)(T) curve");
    const LineFit lv = fit_line(vth, t_ref, "v_th(T) curve");
    const LineFit lk = fit_line(k, t_ref, "k_fs(T) curve");
    if (rdson.size() < 3) throw FitError("R_ds(on)(T) curve: a quadratic fit needs at least 3 points");
    check_ref_in_range(vth, t_ref, "v_th(T) curve");
    check_ref_in_range(k, t_ref, "k_fs(T) curve");
    check_ref_in_range(rdson, t_ref, "R_ds(on)(T) curve");

    // quadratic in a centred, scaled variable to keep the normal equations well conditioned
    const std::size_t n = rdson.size();
    const double xm = 0.5 * (rdson.points.front().first + rdson.points.back().first);
    const double xs = 0.5 * (rdson.points.back().first - rdson.points.front().first);
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (rdson.points[i].first - xm) / xs;
        A(i, 0) = 1.0;
        A(i, 1) = u;
        A(i, 2) = u * u;
        y(i) = rdson.points[i].second;
    }
    const Eigen::Vector3d q = A.colPivHouseholderQr().solve(y);
    const double rms = std::sqrt((A * q - y).squaredNorm() / n);
    // expand to powers of T
    const double c2 = q(2) / (xs * xs);
    const double c1 = q(1) / xs - 2.0 * q(2) * xm / (xs * xs);
    const double c0 = q(0) - q(1) * xm / xs + q(2) * xm * xm / (xs * xs);
    const double at_ref = (c2 * t_ref + c1) * t_ref + c0;
    if (!(at_ref > 0.0)) throw FitError("R_ds(on)(T) curve: fitted value at t_ref is not positive");

    TempFit out;
    out.coeffs = {lv.slope, lk.slope, c2 / at_ref, c1 / at_ref, c0 / at_ref};
    out.v_th_at_ref = lv.intercept_at_ref;
    out.k_at_ref = lk.intercept_at_ref;
    out.rdson_at_ref = at_ref;
    out.rms_vth = lv.rms;
    out.rms_k = lk.rms;
    out.rms_rdson = rms;
    return out;
}

}  // namespace switchcell
