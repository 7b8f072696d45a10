#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

#include "epifit/errmodel.hpp"
#include "epifit/error.hpp"
#include "epifit/growth.hpp"
#include "epifit/stats.hpp"

namespace epifit {

struct LognormalParams {
    double log_mean = 0.0;
    double log_var = 1.0;
};

struct BetaParams {
    double alpha = 0.0;
    double beta = 0.0;
};

/// Prior hyperparameters for the bivariate fit.
struct PriorConfig {
    double rate_prior_mean = 1.0;  ///< exponential prior mean for growth rates r and shapes a
    double k_log_mean = std::numeric_limits<double>::quiet_NaN();  ///< lognormal prior on K (cases); NaN = derive from data
    double k_log_var = 1.0;
    double cfr_ref = 0.101;        ///< reference case fatality ratio anchoring the Beta prior on phi
    double cfr_count = 5.0;        ///< Beta prior concentration
    double hyper_shape = 1.0;      ///< Gamma prior shape on lambda (pg) / precision 1/sigma_eps^2 (pln, pls)
    double hyper_rate = 0.001;     ///< Gamma prior rate for the same

    void validate() const {
        if (!(rate_prior_mean > 0.0)) throw_config("rate_prior_mean must be positive");
        if (!(k_log_var > 0.0)) throw_config("k_log_var must be positive");
        if (!(cfr_ref > 0.0) || !(cfr_ref < 1.0)) throw_config("cfr_ref must lie in (0, 1)");
        if (!(cfr_count > 0.0)) throw_config("cfr_count must be positive");
        if (!(hyper_shape > 0.0) || !(hyper_rate > 0.0)) throw_config("hyper prior shape/rate must be positive");
    }
};

/// Centers the lognormal prior on K at the three-point final-size estimate
/// taken from the training window: log-mean log K_e with the supplied log
/// variance. Degenerate trajectories propagate as numeric errors; callers may
/// fall back to a user-supplied log-mean.
inline LognormalParams k_prior_from_series(const Eigen::Ref<const Eigen::ArrayXd>& cum, int t, int m,
                                           double log_var = 1.0) {
    if (!(log_var > 0.0)) throw_config("k prior log variance must be positive");
    const double k_e = k_point_estimate(cum, t, m);
    return {std::log(k_e), log_var};
}

/// Default three-point spacing for a training window ending at day t.
inline int default_k_spacing(int t) { return (t - 1) / 2; }

/// Beta prior on the case fatality ratio phi with mean phi_ref and
/// concentration `count`: Beta(count * phi_ref, count * (1 - phi_ref)).
inline BetaParams cfr_beta_prior(double phi_ref, double count) {
    if (!(phi_ref > 0.0) || !(phi_ref < 1.0)) throw_config("phi reference must lie in (0, 1)");
    if (!(count > 0.0)) throw_config("Beta prior concentration must be positive");
    return {count * phi_ref, count * (1.0 - phi_ref)};
}

/// Scalar parameters of the single-phase bivariate model. err_hyper_* holds
/// lambda for the pg family and sigma_eps for pln/pls (whose Gamma prior is
/// placed on the precision 1/sigma_eps^2).
struct ThetaBivariate {
    double r_c = 0.2;
    double a_c = 1.0;
    double K_c = 1e5;
    double r_d = 0.2;
    double a_d = 1.0;
    double phi = 0.1;
    double err_hyper_c = 10.0;
    double err_hyper_d = 10.0;

    double k_d() const { return phi * K_c; }
};

/// Joint log prior density of the scalar parameters. Out-of-support values
/// give -inf; when `reason` is non-null it names the offending parameter.
inline double log_prior(const ThetaBivariate& th, const PriorConfig& cfg, GrowthFamily growth,
                        ErrorFamily fam_c, ErrorFamily fam_d, std::string* reason = nullptr) {
    cfg.validate();
    if (std::isnan(cfg.k_log_mean)) throw_config("log_prior: k_log_mean has not been resolved");
    const double inf = std::numeric_limits<double>::infinity();
    auto fail = [&](const char* what) {
        if (reason) *reason = what;
        return -inf;
    };
    if (!(th.r_c > 0.0)) return fail("r_c not positive");
    if (!(th.r_d > 0.0)) return fail("r_d not positive");
    if (!(th.K_c > 0.0)) return fail("K_c not positive");
    if (!(th.phi > 0.0) || !(th.phi < 1.0)) return fail("phi outside (0, 1)");
    if (!(th.err_hyper_c > 0.0)) return fail("error hyperparameter (cases) not positive");
    if (!(th.err_hyper_d > 0.0)) return fail("error hyperparameter (deaths) not positive");
    if (has_shape_param(growth) && (!(th.a_c > 0.0) || !(th.a_d > 0.0))) return fail("shape exponent not positive");

    double lp = 0.0;
    lp += log_exponential_pdf(th.r_c, cfg.rate_prior_mean);
    lp += log_exponential_pdf(th.r_d, cfg.rate_prior_mean);
    if (has_shape_param(growth)) {
        lp += log_exponential_pdf(th.a_c, cfg.rate_prior_mean);
        lp += log_exponential_pdf(th.a_d, cfg.rate_prior_mean);
    }
    lp += log_lognormal_pdf(th.K_c, cfg.k_log_mean, cfg.k_log_var);
    const BetaParams bp = cfr_beta_prior(cfg.cfr_ref, cfg.cfr_count);
    lp += log_beta_pdf(th.phi, bp.alpha, bp.beta);
    auto hyper_term = [&cfg](ErrorFamily fam, double h) {
        // pg: prior directly on lambda; pln/pls: prior on the precision.
        const double x = fam == ErrorFamily::pg ? h : 1.0 / (h * h);
        return log_gamma_pdf(x, cfg.hyper_shape, cfg.hyper_rate);
    };
    lp += hyper_term(fam_c, th.err_hyper_c);
    lp += hyper_term(fam_d, th.err_hyper_d);
    return lp;
}

}  // namespace epifit
