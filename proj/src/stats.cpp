#include "epifit/stats.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace epifit {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-15;

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw_numeric("lower_gamma_regularized: series did not converge");
}

// Continued fraction (modified Lentz) for Q(a, x), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
        }
    }
    throw_numeric("lower_gamma_regularized: continued fraction did not converge");
}

}  // namespace

double lower_gamma_regularized(double a, double x) {
    if (a <= 0.0) throw_domain("lower_gamma_regularized: shape must be positive");
    if (x < 0.0) throw_domain("lower_gamma_regularized: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double gamma_cdf(double x, double shape, double rate) {
    if (shape <= 0.0 || rate <= 0.0) throw_domain("gamma_cdf: shape and rate must be positive");
    if (x <= 0.0) return 0.0;
    return lower_gamma_regularized(shape, rate * x);
}

double gamma_quantile(double p, double shape, double rate) {
    if (shape <= 0.0 || rate <= 0.0) throw_domain("gamma_quantile: shape and rate must be positive");
    if (p < 0.0 || p >= 1.0) throw_domain("gamma_quantile: p must lie in [0, 1)");
    if (p == 0.0) return 0.0;

    // Bracket the root, then bisect. The CDF is strictly increasing, so plain
    // bisection to ~1e-15 relative width is robust and plenty accurate.
    double lo = 0.0;
    double hi = (shape + 1.0) / rate;
    while (gamma_cdf(hi, shape, rate) < p) {
        hi *= 2.0;
        if (!std::isfinite(hi)) throw_numeric("gamma_quantile: failed to bracket quantile");
    }
    for (int i = 0; i < 200 && (hi - lo) > kEps * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (gamma_cdf(mid, shape, rate) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double quantile_sorted(const Eigen::Ref<const Eigen::ArrayXd>& sorted, double p) {
    const Eigen::Index n = sorted.size();
    if (n == 0) throw_domain("quantile: empty sample");
    if (p < 0.0 || p > 1.0) throw_domain("quantile: p must lie in [0, 1]");
    if (n == 1) return sorted[0];
    const double h = static_cast<double>(n - 1) * p;
    const auto lo = static_cast<Eigen::Index>(std::floor(h));
    if (lo >= n - 1) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(const Eigen::Ref<const Eigen::ArrayXd>& values, double p) {
    std::vector<double> tmp(values.data(), values.data() + values.size());
    std::sort(tmp.begin(), tmp.end());
    Eigen::Map<const Eigen::ArrayXd> sorted(tmp.data(), static_cast<Eigen::Index>(tmp.size()));
    return quantile_sorted(sorted, p);
}

double log_sum_exp(const Eigen::Ref<const Eigen::ArrayXd>& x) {
    if (x.size() == 0) throw_domain("log_sum_exp: empty input");
    const double m = x.maxCoeff();
    if (!std::isfinite(m)) return m;  // all -inf (or a stray inf/nan) dominates
    return m + std::log((x - m).exp().sum());
}

Eigen::ArrayXd moving_average(const Eigen::Ref<const Eigen::ArrayXd>& x, int window) {
    const Eigen::Index n = x.size();
    if (window < 1 || window % 2 == 0) throw_domain("moving_average: window must be a positive odd integer");
    if (static_cast<Eigen::Index>(window) > n) throw_domain("moving_average: window exceeds series length");
    const Eigen::Index h = window / 2;
    Eigen::ArrayXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, i - h);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + h);
        out[i] = x.segment(lo, hi - lo + 1).mean();
    }
    return out;
}

}  // namespace epifit
