#include "epifit/rtestim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace epifit {

GammaSI si_from_mean_sd(double mean, double sd) {
    if (!(mean > 0.0)) throw_domain("serial interval mean must be positive");
    if (!(sd > 0.0)) throw_domain("serial interval sd must be positive");
    const double cv = mean / sd;
    return {cv * cv, mean / (sd * sd)};
}

GammaSI si_from_quantiles(double p1, double v1, double p2, double v2) {
    if (!(p1 > 0.0) || !(p2 < 1.0) || !(p1 < p2)) {
        throw_domain("quantile probabilities must satisfy 0 < p1 < p2 < 1");
    }
    if (!(v1 > 0.0) || !(v1 < v2)) throw_domain("quantile values must satisfy 0 < v1 < v2");

    // With the rate chosen so F(v1) = p1 holds exactly for any shape, the CDF
    // at v2 increases monotonically in the shape; bisect on it. Shapes below
    // 0.01 make the reference quantile underflow, so the bracket stops there.
    auto rate_for = [&](double shape) { return gamma_quantile(p1, shape, 1.0) / v1; };
    auto f = [&](double shape) { return gamma_cdf(v2, shape, rate_for(shape)) - p2; };
    double lo = 1e-2, hi = 1e3;
    if (!(f(lo) < 0.0) || !(f(hi) > 0.0)) {
        throw_numeric("quantile pair is not attainable by a gamma distribution in the supported shape range");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    const double shape = 0.5 * (lo + hi);
    const GammaSI out{shape, rate_for(shape)};
    if (std::abs(gamma_quantile(p1, out.shape, out.rate) - v1) > 1e-8
        || std::abs(gamma_quantile(p2, out.shape, out.rate) - v2) > 1e-8) {
        throw_numeric("quantile solver failed to match both quantiles within 1e-8 days");
    }
    return out;
}

GammaSI pool_si(const std::vector<GammaSI>& components, long n_per, std::uint64_t seed) {
    if (components.empty()) throw_domain("pool_si: need at least one component");
    if (n_per < 10000) throw_domain("pool_si: need at least 10000 draws per component");
    Rng rng(mix_seed(seed, 0));
    double sum = 0.0, sumsq = 0.0;
    const double n_total = static_cast<double>(n_per) * static_cast<double>(components.size());
    for (const GammaSI& c : components) {
        if (!(c.shape > 0.0) || !(c.rate > 0.0)) throw_domain("pool_si: component parameters must be positive");
        for (long i = 0; i < n_per; ++i) {
            const double x = draw_gamma(rng, c.shape, c.rate);
            sum += x;
            sumsq += x * x;
        }
    }
    const double mean = sum / n_total;
    const double var = sumsq / n_total - mean * mean;
    if (!(var > 0.0)) throw_numeric("pool_si: pooled sample has no spread");
    return si_from_mean_sd(mean, std::sqrt(var));
}

Eigen::ArrayXd discretize_si(const GammaSI& si, int max_lag, bool include_same_day) {
    if (max_lag < 1) throw_domain("discretize_si: need at least one lag");
    if (!(si.shape > 0.0) || !(si.rate > 0.0)) throw_domain("discretize_si: parameters must be positive");
    Eigen::ArrayXd w(max_lag + 1);
    double prev = gamma_cdf(0.5, si.shape, si.rate);
    w[0] = include_same_day ? prev : 0.0;
    for (int j = 1; j <= max_lag; ++j) {
        const double cur = gamma_cdf(static_cast<double>(j) + 0.5, si.shape, si.rate);
        w[j] = cur - prev;
        prev = cur;
    }
    const double total = w.sum();
    if (!(total > 0.0)) throw_numeric("discretize_si: all weights vanished; distribution lies beyond the lag window");
    return w / total;
}

RtSeries effective_r(const Eigen::MatrixXd& incidence, const Eigen::ArrayXd& weights) {
    const Eigen::Index S = incidence.rows();
    const Eigen::Index T = incidence.cols();
    const Eigen::Index J = weights.size() - 1;
    if (S < 1) throw_domain("effective_r: need at least one trajectory");
    if (J < 1) throw_domain("effective_r: need at least two weights");
    if (T <= J) throw_domain("effective_r: trajectory must be longer than the weight window");
    const double nan = std::numeric_limits<double>::quiet_NaN();

    RtSeries out;
    const Eigen::Index n_days = T - J;
    out.mean.setConstant(n_days, nan);
    out.lo.setConstant(n_days, nan);
    out.hi.setConstant(n_days, nan);
    out.defined.assign(static_cast<size_t>(n_days), 0);
    out.sig_above_1.assign(static_cast<size_t>(n_days), 0);
    out.day.resize(static_cast<size_t>(n_days));

    Eigen::ArrayXd vals(S);
    for (Eigen::Index i = 0; i < n_days; ++i) {
        const Eigen::Index t = J + i;  // 0-based column of day t = J + 1 + i
        out.day[static_cast<size_t>(i)] = static_cast<int>(t) + 1;
        Eigen::Index n_ok = 0;
        for (Eigen::Index s = 0; s < S; ++s) {
            double denom = 0.0;
            for (Eigen::Index j = 0; j <= J; ++j) denom += weights[j] * incidence(s, t - j);
            if (denom > 0.0) vals[n_ok++] = incidence(s, t) / denom;
        }
        if (n_ok == 0) continue;
        out.defined[static_cast<size_t>(i)] = 1;
        const auto head = vals.head(n_ok);
        out.mean[i] = head.mean();
        Eigen::ArrayXd sorted = head;
        std::sort(sorted.data(), sorted.data() + sorted.size());
        out.lo[i] = quantile_sorted(sorted, 0.025);
        out.hi[i] = quantile_sorted(sorted, 0.975);
        out.sig_above_1[static_cast<size_t>(i)] = out.lo[i] > 1.0 ? 1 : 0;
    }

    // Centered 5-day moving average of the mean, skipping undefined days.
    out.ma5.setConstant(n_days, nan);
    for (Eigen::Index i = 0; i < n_days; ++i) {
        double acc = 0.0;
        int n = 0;
        for (Eigen::Index k = std::max<Eigen::Index>(0, i - 2); k <= std::min(n_days - 1, i + 2); ++k) {
            if (out.defined[static_cast<size_t>(k)]) {
                acc += out.mean[k];
                ++n;
            }
        }
        if (n > 0) out.ma5[i] = acc / n;
    }
    return out;
}

}  // namespace epifit
