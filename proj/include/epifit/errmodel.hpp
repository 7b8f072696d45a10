#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "epifit/error.hpp"
#include "epifit/stats.hpp"

namespace epifit {

/// Overdispersed Poisson variants built from a multiplicative daily effect
/// eps_t with unit-centred prior:
///   pg:  eps_t ~ Gamma(lambda, lambda)          (negative binomial marginal)
///   pln: log eps_t ~ Normal(0, sigma_eps^2)
///   pls: log eps_t ~ Student-t(0, sigma_eps^2, nu), represented as a scale
///        mixture of normals with per-day mixing scale mix_t ~ Gamma(nu/2, nu/2).
enum class ErrorFamily { pg, pln, pls };

inline const char* to_string(ErrorFamily f) {
    switch (f) {
        case ErrorFamily::pg: return "pg";
        case ErrorFamily::pln: return "pln";
        case ErrorFamily::pls: return "pls";
    }
    return "?";
}

inline ErrorFamily error_family_from_string(const std::string& s) {
    if (s == "pg") return ErrorFamily::pg;
    if (s == "pln") return ErrorFamily::pln;
    if (s == "pls") return ErrorFamily::pls;
    throw_config("unknown error family '" + s + "' (expected pg, pln or pls)");
}

struct ErrorSpec {
    ErrorFamily family = ErrorFamily::pg;
    double lambda = 10.0;     ///< pg: gamma effect precision
    double sigma_eps = 0.3;   ///< pln/pls: scale of log eps
    double nu = 4.0;          ///< pls: Student-t degrees of freedom (held fixed)

    void validate() const {
        if (family == ErrorFamily::pg && !(lambda > 0.0)) throw_domain("pg effect precision lambda must be positive");
        if (family != ErrorFamily::pg && !(sigma_eps > 0.0)) throw_domain("sigma_eps must be positive");
        if (family == ErrorFamily::pls && !(nu > 0.0)) throw_domain("Student-t degrees of freedom must be positive");
    }

    static ErrorSpec pg(double lambda) { return ErrorSpec{ErrorFamily::pg, lambda, 0.3, 4.0}; }
    static ErrorSpec pln(double sigma) { return ErrorSpec{ErrorFamily::pln, 10.0, sigma, 4.0}; }
    static ErrorSpec pls(double sigma, double nu = 4.0) { return ErrorSpec{ErrorFamily::pls, 10.0, sigma, nu}; }
};

/// Log prior density of one daily effect. For pls the per-day mixing scale
/// must be supplied and its own Gamma(nu/2, nu/2) log density is included.
inline double log_effect_prior(const ErrorSpec& spec, double eps, std::optional<double> mix_scale = {}) {
    spec.validate();
    if (!(eps > 0.0)) return -std::numeric_limits<double>::infinity();
    switch (spec.family) {
        case ErrorFamily::pg:
            return log_gamma_pdf(eps, spec.lambda, spec.lambda);
        case ErrorFamily::pln: {
            const double u = std::log(eps);
            return log_normal_pdf(u, 0.0, spec.sigma_eps * spec.sigma_eps) - u;
        }
        case ErrorFamily::pls: {
            if (!mix_scale) throw_domain("log_effect_prior: pls needs the mixing scale");
            if (!(*mix_scale > 0.0)) return -std::numeric_limits<double>::infinity();
            const double u = std::log(eps);
            const double var = spec.sigma_eps * spec.sigma_eps / *mix_scale;
            return log_normal_pdf(u, 0.0, var) - u + log_gamma_pdf(*mix_scale, spec.nu / 2.0, spec.nu / 2.0);
        }
    }
    return -std::numeric_limits<double>::infinity();
}

/// Log observation density: count ~ Poisson(mu_det * eps).
inline double log_obs(long long count, double mu_det, double eps) {
    const double rate = mu_det * eps;
    if (!(rate > 0.0)) throw_domain("log_obs: Poisson rate must be positive");
    return log_poisson_pmf(count, rate);
}

/// Negative binomial marginal of the pg family (effect integrated out):
/// mean mu, variance mu + mu^2 / lambda.
inline double nb_marginal_logpmf(long long count, double mu, double lambda) {
    if (!(mu > 0.0) || !(lambda > 0.0)) throw_domain("nb_marginal_logpmf: mu and lambda must be positive");
    if (count < 0) throw_domain("nb_marginal_logpmf: count must be nonnegative");
    const double y = static_cast<double>(count);
    // lambda * log(lambda/(lambda+mu)) via log1p for stability at large lambda.
    return std::lgamma(y + lambda) - std::lgamma(lambda) - std::lgamma(y + 1.0)
        - lambda * std::log1p(mu / lambda) + y * std::log(mu / (lambda + mu));
}

struct GammaShapeRate {
    double shape = 0.0;
    double rate = 0.0;
};

/// Full-conditional of the pls mixing scale given u = log eps:
/// Gamma((nu+1)/2, (nu + u^2/sigma^2)/2).
inline GammaShapeRate student_mix_conditional(double u, double sigma_eps, double nu) {
    if (!(sigma_eps > 0.0) || !(nu > 0.0)) throw_domain("student_mix_conditional: sigma_eps and nu must be positive");
    return {(nu + 1.0) / 2.0, (nu + u * u / (sigma_eps * sigma_eps)) / 2.0};
}

inline double update_student_mix_scale(double u, double sigma_eps, double nu, Rng& rng) {
    const GammaShapeRate g = student_mix_conditional(u, sigma_eps, nu);
    return draw_gamma(rng, g.shape, g.rate);
}

/// Draws a fresh daily effect from its prior (forecasting and simulation).
inline double draw_effect(const ErrorSpec& spec, Rng& rng) {
    spec.validate();
    switch (spec.family) {
        case ErrorFamily::pg:
            return draw_gamma(rng, spec.lambda, spec.lambda);
        case ErrorFamily::pln:
            return std::exp(draw_normal(rng, 0.0, spec.sigma_eps));
        case ErrorFamily::pls: {
            const double mix = draw_gamma(rng, spec.nu / 2.0, spec.nu / 2.0);
            return std::exp(draw_normal(rng, 0.0, spec.sigma_eps / std::sqrt(mix)));
        }
    }
    return 1.0;
}

}  // namespace epifit
