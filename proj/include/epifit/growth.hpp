#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "epifit/error.hpp"

namespace epifit {

/// Saturating growth laws for the expected cumulative count. All express the
/// daily increment as a function of the previous cumulative total:
///   logistic:    r C (1 - C/K)
///   richards:    r C (1 - (C/K)^a)
///   gompertz:    r C log(K/C)
///   rosenzweig:  r C ((C/K)^a - 1)   — negative below K as written; usable in
///                a likelihood only behind an explicit opt-in flag.
enum class GrowthFamily { logistic, richards, gompertz, rosenzweig };

inline const char* to_string(GrowthFamily f) {
    switch (f) {
        case GrowthFamily::logistic: return "logistic";
        case GrowthFamily::richards: return "richards";
        case GrowthFamily::gompertz: return "gompertz";
        case GrowthFamily::rosenzweig: return "rosenzweig";
    }
    return "?";
}

inline GrowthFamily growth_family_from_string(const std::string& s) {
    if (s == "logistic") return GrowthFamily::logistic;
    if (s == "richards") return GrowthFamily::richards;
    if (s == "gompertz") return GrowthFamily::gompertz;
    if (s == "rosenzweig") return GrowthFamily::rosenzweig;
    throw_config("unknown growth family '" + s + "'");
}

/// True when the family has a free shape exponent a.
inline bool has_shape_param(GrowthFamily f) {
    return f == GrowthFamily::richards || f == GrowthFamily::rosenzweig;
}

struct GrowthParams {
    GrowthFamily family = GrowthFamily::richards;
    double r = 0.2;   ///< intrinsic growth rate per day
    double K = 1e5;   ///< final size (carrying capacity)
    double a = 1.0;   ///< shape exponent (families without one ignore it)

    void validate() const {
        if (!(r > 0.0)) throw_domain("growth rate r must be positive");
        if (!(K > 0.0)) throw_domain("final size K must be positive");
        if (has_shape_param(family) && !(a > 0.0)) throw_domain("shape exponent a must be positive");
    }
};

/// Unchecked increment evaluation for hot loops; the caller guarantees
/// cum_prev > 0 and interprets a nonpositive result as zero likelihood.
inline double mean_incidence_raw(const GrowthParams& p, double cum_prev) noexcept {
    const double frac = cum_prev / p.K;
    switch (p.family) {
        case GrowthFamily::logistic: return p.r * cum_prev * (1.0 - frac);
        case GrowthFamily::richards: return p.r * cum_prev * (1.0 - std::pow(frac, p.a));
        case GrowthFamily::gompertz: return p.r * cum_prev * std::log(1.0 / frac);
        case GrowthFamily::rosenzweig: return p.r * cum_prev * (std::pow(frac, p.a) - 1.0);
    }
    return 0.0;
}

/// Expected daily increment given the previous cumulative total. For the
/// saturating families cum_prev must lie in (0, K]; tiny negative results from
/// rounding are clamped to zero, while the genuinely negative rosenzweig
/// branch is returned as written.
inline double mean_incidence(const GrowthParams& p, double cum_prev) {
    p.validate();
    if (!(cum_prev > 0.0)) throw_domain("mean_incidence: previous cumulative total must be positive");
    if (p.family != GrowthFamily::rosenzweig && cum_prev > p.K) {
        throw_domain("mean_incidence: cumulative total exceeds final size K");
    }
    double v = mean_incidence_raw(p, cum_prev);
    if (v < 0.0 && v > -1e-12 * p.r * p.K) v = 0.0;
    return v;
}

/// Closed-form cumulative curve C(t) = K / (1 + exp(-r (t - tau)))^(1/a),
/// available for the logistic and richards families.
inline double richards_cumulative(const GrowthParams& p, double t, double tau) {
    p.validate();
    if (p.family != GrowthFamily::logistic && p.family != GrowthFamily::richards) {
        throw_domain("richards_cumulative: closed form exists only for logistic/richards");
    }
    const double a = p.family == GrowthFamily::logistic ? 1.0 : p.a;
    // log1p(exp(x)) evaluated stably for large |x|.
    const double x = -p.r * (t - tau);
    const double log1pexp = x > 35.0 ? x : std::log1p(std::exp(x));
    return p.K * std::exp(-log1pexp / a);
}

/// Cumulative level at which the daily increment peaks: K (1+a)^(-1/a) for the
/// shape families, its a -> 0 limit K/e for gompertz.
inline double peak_threshold(const GrowthParams& p) {
    p.validate();
    if (p.family == GrowthFamily::gompertz) return p.K * std::exp(-1.0);
    const double a = p.family == GrowthFamily::logistic ? 1.0 : p.a;
    return p.K * std::pow(1.0 + a, -1.0 / a);
}

struct TurningPoint {
    double tau = 0.0;          ///< interpolated day the cumulative curve crosses the peak threshold
    double threshold = 0.0;    ///< that cumulative level
    bool reached = false;      ///< false when the trajectory never crosses; tau is then last day + 1
    int argmax_day = 0;        ///< first day with the largest daily increment (day >= 2)
};

/// Locates the turning point on a cumulative trajectory (entry i = day i+1).
/// The crossing day is linearly interpolated between the bracketing days.
inline TurningPoint turning_point(const GrowthParams& p, const Eigen::Ref<const Eigen::ArrayXd>& cum) {
    if (cum.size() < 2) throw_domain("turning_point: trajectory needs at least 2 days");
    TurningPoint out;
    out.threshold = peak_threshold(p);

    const Eigen::Index n = cum.size();
    out.argmax_day = 2;
    double best = cum[1] - cum[0];
    for (Eigen::Index i = 2; i < n; ++i) {
        const double d = cum[i] - cum[i - 1];
        if (d > best) {
            best = d;
            out.argmax_day = static_cast<int>(i) + 1;
        }
    }

    if (cum[0] >= out.threshold) {
        out.tau = 1.0;
        out.reached = true;
        return out;
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        if (cum[i] >= out.threshold) {
            const double step = cum[i] - cum[i - 1];
            const double frac = step > 0.0 ? (out.threshold - cum[i - 1]) / step : 1.0;
            out.tau = static_cast<double>(i) + frac;  // day i is index i-1
            out.reached = true;
            return out;
        }
    }
    out.tau = static_cast<double>(n) + 1.0;
    out.reached = false;
    return out;
}

/// Extends an observed cumulative trajectory by the deterministic recursion
/// C_{t+1} = C_t + mean_incidence(C_t) for up to `max_extra` further days,
/// stopping early once the increment falls below `stop_increment`.
inline Eigen::ArrayXd extend_cumulative(const GrowthParams& p, const Eigen::Ref<const Eigen::ArrayXd>& cum,
                                        int max_extra, double stop_increment = 1e-6) {
    p.validate();
    if (cum.size() == 0) throw_domain("extend_cumulative: empty trajectory");
    if (max_extra < 0) throw_domain("extend_cumulative: negative extension length");
    std::vector<double> traj(cum.data(), cum.data() + cum.size());
    double c = traj.back();
    for (int k = 0; k < max_extra; ++k) {
        double inc = c > 0.0 ? mean_incidence_raw(p, c) : 0.0;
        if (!(inc > 0.0)) inc = 0.0;
        c += inc;
        traj.push_back(c);
        if (inc < stop_increment) break;
    }
    return Eigen::Map<const Eigen::ArrayXd>(traj.data(), static_cast<Eigen::Index>(traj.size()));
}

/// Three-point final-size estimate from cumulative totals at days t, t-m and
/// t-2m (1-based). Exact when the trajectory follows a logistic curve.
inline double k_point_estimate(const Eigen::Ref<const Eigen::ArrayXd>& cum, int t, int m) {
    if (m < 1) throw_domain("k_point_estimate: spacing m must be positive");
    if (t - 2 * m < 1) throw_domain("k_point_estimate: need t - 2m >= 1");
    if (t > cum.size()) throw_domain("k_point_estimate: day t beyond trajectory");
    const double c0 = cum[t - 2 * m - 1];
    const double c1 = cum[t - m - 1];
    const double c2 = cum[t - 1];
    const double denom = c1 * c1 - c2 * c0;
    if (std::abs(denom) < 1e-9 * c2 * c2) {
        throw_numeric("k_point_estimate: degenerate geometry (near-exponential or flat trajectory)");
    }
    const double k = c1 * (c0 * c1 - 2.0 * c0 * c2 + c1 * c2) / denom;
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw_numeric("k_point_estimate: estimate is not a positive finite value");
    }
    return k;
}

}  // namespace epifit
