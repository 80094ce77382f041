#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace forkwatch {

inline double rmse(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || a.size() != b.size())
        throw std::invalid_argument("rmse: need equal-size non-empty vectors");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

// Polynomial in a centered/scaled coordinate u = (x - x0) / xscale; the
// transform keeps the Vandermonde solve well conditioned at degree 7.
struct PolyFit {
    std::vector<double> coeffs;  // coeffs[k] multiplies u^k
    double x0 = 0.0;
    double xscale = 1.0;

    double eval(double x) const {
        double u = (x - x0) / xscale;
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * u + coeffs[k];
        return acc;
    }
};

// Least-squares polynomial fit via Householder QR. The requested degree is
// capped at points-1 so the system stays determined (7 sample points admit at
// most an exact degree-6 interpolant).
inline PolyFit fit_poly(const std::vector<double>& xs, const std::vector<double>& ys, int degree) {
    if (xs.empty() || xs.size() != ys.size())
        throw std::invalid_argument("fit_poly: need equal-size non-empty vectors");
    if (degree < 0) throw std::invalid_argument("fit_poly: degree must be >= 0");
    int m = static_cast<int>(xs.size());
    int deg = std::min(degree, m - 1);
    int k = deg + 1;

    PolyFit fit;
    auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    fit.x0 = 0.5 * (*mn + *mx);
    fit.xscale = (*mx - *mn) > 0 ? 0.5 * (*mx - *mn) : 1.0;

    // column-major Vandermonde in u
    std::vector<double> A(static_cast<std::size_t>(m) * k);
    std::vector<double> b(ys);
    for (int i = 0; i < m; ++i) {
        double u = (xs[i] - fit.x0) / fit.xscale;
        double p = 1.0;
        for (int j = 0; j < k; ++j) {
            A[static_cast<std::size_t>(j) * m + i] = p;
            p *= u;
        }
    }

    auto col = [&](int j) { return A.data() + static_cast<std::size_t>(j) * m; };
    std::vector<double> hv(m);
    for (int j = 0; j < k; ++j) {
        double* cj = col(j);
        double norm = 0.0;
        for (int i = j; i < m; ++i) norm += cj[i] * cj[i];
        norm = std::sqrt(norm);
        if (norm == 0.0) throw std::invalid_argument("fit_poly: singular system (duplicate x values?)");
        double alpha = cj[j] > 0 ? -norm : norm;
        double vnorm2 = 0.0;
        for (int i = j; i < m; ++i) {
            hv[i] = cj[i] - (i == j ? alpha : 0.0);
            vnorm2 += hv[i] * hv[i];
        }
        if (vnorm2 == 0.0) continue;
        for (int c = j; c < k; ++c) {
            double* cc = col(c);
            double dot = 0.0;
            for (int i = j; i < m; ++i) dot += hv[i] * cc[i];
            double f = 2.0 * dot / vnorm2;
            for (int i = j; i < m; ++i) cc[i] -= f * hv[i];
        }
        double dot = 0.0;
        for (int i = j; i < m; ++i) dot += hv[i] * b[i];
        double f = 2.0 * dot / vnorm2;
        for (int i = j; i < m; ++i) b[i] -= f * hv[i];
    }

    fit.coeffs.assign(k, 0.0);
    for (int j = k - 1; j >= 0; --j) {
        double acc = b[j];
        for (int c = j + 1; c < k; ++c) acc -= col(c)[j] * fit.coeffs[c];
        double diag = col(j)[j];
        if (diag == 0.0) throw std::invalid_argument("fit_poly: singular system");
        fit.coeffs[j] = acc / diag;
    }
    return fit;
}

struct Crossing {
    double x = 0.0;
    bool used_linear_fallback = false;  // fitted curve disagreed with the raw bracket
};

// Smallest x within the sampled hull where y crosses `level` upward. The
// bracketing interval comes from the raw samples; the refined position comes
// from bisecting the fitted polynomial inside that bracket. If the fit does
// not straddle the level there (oscillation), fall back to linear
// interpolation between the raw bracket points. No crossing => nullopt; no
// extrapolation beyond the hull ever.
inline std::optional<Crossing> threshold_crossing(const PolyFit& fit, const std::vector<double>& xs,
                                                  const std::vector<double>& ys, double level) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("threshold_crossing: need >= 2 aligned samples");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (!(xs[i] < xs[i + 1]))
            throw std::invalid_argument("threshold_crossing: x values must be strictly increasing");
        if (ys[i] <= level && ys[i + 1] > level) {
            double lo = xs[i], hi = xs[i + 1];
            double flo = fit.eval(lo) - level, fhi = fit.eval(hi) - level;
            Crossing c;
            if (flo <= 0.0 && fhi > 0.0) {
                for (int it = 0; it < 200 && (hi - lo) > 1e-13; ++it) {
                    double mid = 0.5 * (lo + hi);
                    if (fit.eval(mid) - level <= 0.0) lo = mid;
                    else hi = mid;
                }
                c.x = 0.5 * (lo + hi);
            } else {
                double dy = ys[i + 1] - ys[i];
                c.x = xs[i] + (level - ys[i]) / dy * (xs[i + 1] - xs[i]);
                c.used_linear_fallback = true;
            }
            return c;
        }
    }
    return std::nullopt;
}

// Raw piecewise-linear upward crossing, no fit involved; companion estimate
// to threshold_crossing so both can be reported side by side.
inline std::optional<double> linear_crossing(const std::vector<double>& xs,
                                             const std::vector<double>& ys, double level) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("linear_crossing: need >= 2 aligned samples");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (!(xs[i] < xs[i + 1]))
            throw std::invalid_argument("linear_crossing: x values must be strictly increasing");
        if (ys[i] <= level && ys[i + 1] > level)
            return xs[i] + (level - ys[i]) / (ys[i + 1] - ys[i]) * (xs[i + 1] - xs[i]);
    }
    return std::nullopt;
}

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::int64_t> counts;
};

// Equal-width histogram over [min, max]; the max value lands in the last bin.
inline Histogram rmg_histogram(const std::vector<double>& values, int bins = 40) {
    if (values.empty()) throw std::invalid_argument("rmg_histogram: need at least one value");
    if (bins < 1) throw std::invalid_argument("rmg_histogram: need at least one bin");
    Histogram h;
    auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    h.lo = *mn;
    h.hi = *mx;
    h.counts.assign(bins, 0);
    double width = h.hi - h.lo;
    for (double v : values) {
        int idx = 0;
        if (width > 0.0) {
            idx = static_cast<int>((v - h.lo) / width * bins);
            idx = std::clamp(idx, 0, bins - 1);
        }
        ++h.counts[idx];
    }
    return h;
}

}  // namespace forkwatch
