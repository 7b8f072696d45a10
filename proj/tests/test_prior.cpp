#include "doctest.h"

#include <cmath>
#include <string>

#include "epifit/prior.hpp"

using namespace epifit;

namespace {

Eigen::ArrayXd logistic_cum(double K, double r, double tau, int days) {
    Eigen::ArrayXd cum(days);
    const GrowthParams p{GrowthFamily::logistic, r, K, 1.0};
    for (int t = 1; t <= days; ++t) cum[t - 1] = richards_cumulative(p, t, tau);
    return cum;
}

}  // namespace

TEST_CASE("fatality-ratio prior matches its mean/concentration form") {
    const BetaParams bp = cfr_beta_prior(0.101, 5.0);
    CHECK(bp.alpha == doctest::Approx(0.505).epsilon(1e-15));
    CHECK(bp.beta == doctest::Approx(4.495).epsilon(1e-15));
    CHECK(bp.alpha / (bp.alpha + bp.beta) == doctest::Approx(0.101).epsilon(1e-14));
    CHECK_THROWS_AS(cfr_beta_prior(0.0, 5.0), Error);
    CHECK_THROWS_AS(cfr_beta_prior(1.0, 5.0), Error);
    CHECK_THROWS_AS(cfr_beta_prior(0.1, 0.0), Error);
}

TEST_CASE("final-size prior centres on the three-point estimate") {
    CHECK(default_k_spacing(61) == 30);
    CHECK(default_k_spacing(60) == 29);
    const Eigen::ArrayXd cum = logistic_cum(1000.0, 0.2, 50.0, 60);
    const LognormalParams lp = k_prior_from_series(cum, 60, 10, 2.0);
    CHECK(lp.log_mean == doctest::Approx(std::log(1000.0)).epsilon(1e-8));
    CHECK(lp.log_var == 2.0);
    // a flat trajectory cannot anchor the prior
    Eigen::ArrayXd flat = Eigen::ArrayXd::Constant(60, 100.0);
    CHECK_THROWS_AS(k_prior_from_series(flat, 60, 10), Error);
    CHECK_THROWS_AS(k_prior_from_series(cum, 60, 10, 0.0), Error);
}

TEST_CASE("prior config validation") {
    PriorConfig cfg;
    cfg.k_log_mean = std::log(1e5);
    cfg.validate();
    PriorConfig bad = cfg;
    bad.rate_prior_mean = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.cfr_ref = 1.2;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.hyper_rate = -1.0;
    CHECK_THROWS_AS(bad.validate(), Error);

    // an unresolved K prior centre must be caught, not silently propagated
    PriorConfig unresolved;
    CHECK_THROWS_AS(log_prior(ThetaBivariate{}, unresolved, GrowthFamily::richards, ErrorFamily::pg, ErrorFamily::pg),
                    Error);
}

TEST_CASE("joint scalar prior composes the individual densities") {
    PriorConfig cfg;
    cfg.k_log_mean = std::log(1e5);
    ThetaBivariate th;
    th.r_c = 0.25;
    th.a_c = 0.8;
    th.K_c = 9e4;
    th.r_d = 0.18;
    th.a_d = 1.3;
    th.phi = 0.12;
    th.err_hyper_c = 8.0;   // pg: lambda
    th.err_hyper_d = 0.4;   // pln: sigma_eps

    const double got = log_prior(th, cfg, GrowthFamily::richards, ErrorFamily::pg, ErrorFamily::pln);
    double want = 0.0;
    want += log_exponential_pdf(th.r_c, 1.0) + log_exponential_pdf(th.r_d, 1.0);
    want += log_exponential_pdf(th.a_c, 1.0) + log_exponential_pdf(th.a_d, 1.0);
    want += log_lognormal_pdf(th.K_c, cfg.k_log_mean, 1.0);
    want += log_beta_pdf(th.phi, 0.505, 4.495);
    want += log_gamma_pdf(8.0, 1.0, 0.001);                     // lambda itself
    want += log_gamma_pdf(1.0 / (0.4 * 0.4), 1.0, 0.001);       // precision for the log-scale family
    CHECK(got == doctest::Approx(want).epsilon(1e-13));
    CHECK(std::isfinite(got));

    // shape exponents drop out for families without one
    const double got_logistic = log_prior(th, cfg, GrowthFamily::logistic, ErrorFamily::pg, ErrorFamily::pln);
    CHECK(got_logistic == doctest::Approx(got - log_exponential_pdf(th.a_c, 1.0) - log_exponential_pdf(th.a_d, 1.0))
                              .epsilon(1e-13));
}

TEST_CASE("out-of-support parameters yield -inf with a named reason") {
    PriorConfig cfg;
    cfg.k_log_mean = std::log(1e5);
    const double inf = std::numeric_limits<double>::infinity();

    auto check_fail = [&](ThetaBivariate th, const std::string& expect) {
        std::string reason;
        const double lp = log_prior(th, cfg, GrowthFamily::richards, ErrorFamily::pg, ErrorFamily::pg, &reason);
        CHECK(lp == -inf);
        CHECK(reason.find(expect) != std::string::npos);
    };
    ThetaBivariate th;
    th.r_c = -0.1;
    check_fail(th, "r_c");
    th = {};
    th.phi = 1.5;
    check_fail(th, "phi");
    th = {};
    th.K_c = 0.0;
    check_fail(th, "K_c");
    th = {};
    th.a_d = -1.0;
    check_fail(th, "shape");
    th = {};
    th.err_hyper_c = 0.0;
    check_fail(th, "cases");

    // a nonpositive shape is fine when the family has no shape parameter
    th = {};
    th.a_c = -1.0;
    CHECK(std::isfinite(log_prior(th, cfg, GrowthFamily::logistic, ErrorFamily::pg, ErrorFamily::pg)));

    CHECK(ThetaBivariate{}.k_d() == doctest::Approx(0.1 * 1e5).epsilon(1e-15));
}
