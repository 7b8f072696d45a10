#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

#include "epifit/error.hpp"

namespace epifit {

/// Random engine used throughout; streams are derived with mix_seed so results
/// are reproducible regardless of thread scheduling.
using Rng = std::mt19937_64;

/// splitmix64-style mixer for deriving independent stream seeds from (seed, id).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double lower_gamma_regularized(double a, double x);

/// CDF of Gamma(shape, rate) at x (rate parameterization, mean = shape/rate).
double gamma_cdf(double x, double shape, double rate);

/// Quantile of Gamma(shape, rate): smallest x with CDF(x) >= p.
double gamma_quantile(double p, double shape, double rate);

// ---------------------------------------------------------------------------
// Log densities (all in rate parameterization where applicable)
// ---------------------------------------------------------------------------

inline double log_gamma_pdf(double x, double shape, double rate) {
    if (shape <= 0.0 || rate <= 0.0) throw_domain("log_gamma_pdf: shape and rate must be positive");
    if (!(x > 0.0) || !std::isfinite(x)) return -std::numeric_limits<double>::infinity();
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

inline double log_exponential_pdf(double x, double mean) {
    if (mean <= 0.0) throw_domain("log_exponential_pdf: mean must be positive");
    if (x < 0.0) return -std::numeric_limits<double>::infinity();
    return -std::log(mean) - x / mean;
}

inline double log_normal_pdf(double x, double mean, double var) {
    if (var <= 0.0) throw_domain("log_normal_pdf: variance must be positive");
    const double d = x - mean;
    return -0.5 * std::log(2.0 * M_PI * var) - 0.5 * d * d / var;
}

inline double log_lognormal_pdf(double x, double log_mean, double log_var) {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    const double lx = std::log(x);
    return log_normal_pdf(lx, log_mean, log_var) - lx;
}

inline double log_beta_pdf(double x, double alpha, double beta) {
    if (alpha <= 0.0 || beta <= 0.0) throw_domain("log_beta_pdf: parameters must be positive");
    if (x <= 0.0 || x >= 1.0) return -std::numeric_limits<double>::infinity();
    return std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta)
        + (alpha - 1.0) * std::log(x) + (beta - 1.0) * std::log1p(-x);
}

inline double log_poisson_pmf(long long count, double rate) {
    if (rate <= 0.0) throw_domain("log_poisson_pmf: rate must be positive");
    if (count < 0) throw_domain("log_poisson_pmf: count must be nonnegative");
    if (count == 0) return -rate;
    return static_cast<double>(count) * std::log(rate) - rate - std::lgamma(static_cast<double>(count) + 1.0);
}

/// Same as log_poisson_pmf but with lgamma(count + 1) supplied by the caller
/// (hot loops precompute it once per data point). A nonpositive or overflowed
/// rate yields -inf instead of throwing, so samplers can treat it as a reject.
inline double log_poisson_pmf_cached(long long count, double rate, double lgamma_count_plus_1) {
    if (!(rate > 0.0) || !std::isfinite(rate)) return -std::numeric_limits<double>::infinity();
    if (count == 0) return -rate;
    return static_cast<double>(count) * std::log(rate) - rate - lgamma_count_plus_1;
}

// ---------------------------------------------------------------------------
// Random draws. Distribution objects are constructed per call so a given
// engine state always yields the same value (no hidden carry-over).
// ---------------------------------------------------------------------------

inline double draw_uniform(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double draw_normal(Rng& rng, double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(rng);
}

/// Gamma(shape, rate) draw, mean shape/rate.
inline double draw_gamma(Rng& rng, double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

inline double draw_exponential(Rng& rng, double mean) {
    return std::exponential_distribution<double>(1.0 / mean)(rng);
}

inline long long draw_poisson(Rng& rng, double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<long long>(mean)(rng);
}

inline double draw_student_t(Rng& rng, double nu) {
    return std::student_t_distribution<double>(nu)(rng);
}

// ---------------------------------------------------------------------------
// Sample summaries
// ---------------------------------------------------------------------------

/// Linear-interpolation quantile (the common statistical-package default) on
/// already-sorted data: h = (n-1)p, interpolate between floor(h) and floor(h)+1.
double quantile_sorted(const Eigen::Ref<const Eigen::ArrayXd>& sorted, double p);

/// Convenience wrapper: copies, sorts, delegates to quantile_sorted.
double quantile(const Eigen::Ref<const Eigen::ArrayXd>& values, double p);

/// log(sum(exp(x))) computed stably.
double log_sum_exp(const Eigen::Ref<const Eigen::ArrayXd>& x);

/// Centered moving average with an odd window; at the edges the window is
/// truncated to the available range (mean over [i-h, i+h] clipped to [0, n-1]).
Eigen::ArrayXd moving_average(const Eigen::Ref<const Eigen::ArrayXd>& x, int window);

}  // namespace epifit
