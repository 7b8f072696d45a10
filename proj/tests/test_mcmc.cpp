#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "epifit/mcmc.hpp"
#include "epifit/mh.hpp"
#include "epifit/simulate.hpp"

using namespace epifit;

namespace {

EpidemicSeries tiny_series() {
    const long long cases[] = {5, 7, 10, 14, 18, 25, 30, 34, 38, 40, 41, 42};
    const long long deaths[] = {0, 0, 1, 1, 2, 3, 4, 4, 5, 5, 6, 6};
    std::vector<RawRecord> recs;
    for (int i = 0; i < 12; ++i) {
        recs.push_back({Date{2020, 3, 1}.plus_days(i), cases[i], deaths[i], ""});
    }
    return build_series(recs);
}

ModelSpec tiny_model(ErrorFamily fam_c = ErrorFamily::pg, ErrorFamily fam_d = ErrorFamily::pg) {
    ModelSpec m;
    m.series = tiny_series();
    m.growth = GrowthFamily::richards;
    m.fam_c = fam_c;
    m.fam_d = fam_d;
    m.prior.k_log_mean = std::log(2000.0);
    return m;
}

EpidemicSeries simulated_series(unsigned long long seed = 42) {
    SimSpec spec;
    spec.cases.phases = {{GrowthFamily::richards, 0.15, 20000.0, 1.0}};
    spec.t_max = 60;
    spec.c1 = 5.0;
    spec.with_deaths = true;
    spec.d1 = 2.0;
    spec.death = {GrowthFamily::richards, 0.12, 2000.0, 1.0};
    spec.seed = seed;
    return simulate_epidemic(spec).series;
}

}  // namespace

TEST_CASE("sampler configuration arithmetic and validation") {
    SamplerConfig cfg;
    CHECK(cfg.resolved_burn_in() == 50000);
    CHECK(cfg.retained_per_chain() == 5000);
    cfg.burn_in = 20000;
    CHECK(cfg.resolved_burn_in() == 20000);
    CHECK(cfg.retained_per_chain() == 8000);
    cfg.validate();

    SamplerConfig bad;
    bad.n_chains = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = SamplerConfig{};
    bad.thin = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = SamplerConfig{};
    bad.burn_in = bad.n_iter;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = SamplerConfig{};
    bad.n_iter = 10;
    bad.burn_in = 9;
    bad.thin = 10;
    CHECK_THROWS_AS(bad.validate(), Error);  // would retain a single draw
    bad = SamplerConfig{};
    bad.target_accept = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("model specification validation") {
    ModelSpec m = tiny_model();
    m.validate();

    ModelSpec bad = m;
    bad.n_phases = 2;  // still bivariate
    CHECK_THROWS_AS(bad.validate(), Error);
    bad.bivariate = false;
    bad.validate();  // cases-only switch-point fit is fine
    bad.n_phases = 4;
    CHECK_THROWS_AS(bad.validate(), Error);

    bad = m;
    bad.growth = GrowthFamily::rosenzweig;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad.allow_negative_mean = true;
    bad.validate();

    bad = m;
    bad.t_max = 200;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = m;
    bad.nu = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("scalar site names depend on model structure") {
    ModelSpec m = tiny_model();
    CHECK(detail::sampled_names(m) ==
          std::vector<std::string>{"r_c", "a_c", "K_c", "r_d", "a_d", "phi", "lambda_c", "lambda_d"});

    m.fam_c = ErrorFamily::pln;
    m.fam_d = ErrorFamily::pls;
    CHECK(detail::sampled_names(m) ==
          std::vector<std::string>{"r_c", "a_c", "K_c", "r_d", "a_d", "phi", "sigma_c", "sigma_d"});

    m = tiny_model();
    m.growth = GrowthFamily::gompertz;
    m.k_link = KLinkMode::independent;
    CHECK(detail::sampled_names(m) == std::vector<std::string>{"r_c", "K_c", "r_d", "K_d", "lambda_c", "lambda_d"});

    m = tiny_model();
    m.bivariate = false;
    CHECK(detail::sampled_names(m) == std::vector<std::string>{"r_1", "a_1", "K_1", "lambda"});

    m.n_phases = 2;
    CHECK(detail::sampled_names(m) ==
          std::vector<std::string>{"r_1", "a_1", "K_1", "r_2", "a_2", "eta_2", "kappa_2", "lambda"});
}

TEST_CASE("first likelihood day conditions on a positive preceding total") {
    Eigen::ArrayXd cum(4);
    cum << 0, 0, 1, 2;
    CHECK(first_likelihood_day(cum, 4) == 4);
    CHECK(first_likelihood_day(cum, 3) == 0);  // nothing accumulated before the window end
    Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(6);
    CHECK(first_likelihood_day(zero, 6) == 0);
    Eigen::ArrayXd pos(3);
    pos << 5, 9, 14;
    CHECK(first_likelihood_day(pos, 3) == 2);
}

namespace {

PosteriorDraws two_chain_draws(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
    PosteriorDraws d;
    d.names = {"x"};
    d.n_sampled = 1;
    d.chains.resize(2);
    d.chains[0].scalars = a.matrix();
    d.chains[1].scalars = b.matrix();
    return d;
}

}  // namespace

TEST_CASE("split scale-reduction diagnostic") {
    const int n = 100;
    Rng rng(5);
    Eigen::ArrayXd half(n / 2);
    for (int i = 0; i < n / 2; ++i) half[i] = draw_normal(rng, 0.0, 0.5);

    // mirrored halves give every half-chain the same mean and variance, so the
    // statistic sits exactly at its deflation floor sqrt((m-1)/m)
    Eigen::ArrayXd mirrored(n);
    mirrored.head(n / 2) = half;
    mirrored.tail(n / 2) = half.reverse();
    auto at_floor = gelman_rubin(two_chain_draws(mirrored, mirrored));
    REQUIRE(at_floor.size() == 1);
    CHECK(!at_floor[0].degenerate);
    CHECK(at_floor[0].sampled);
    CHECK(at_floor[0].rhat == doctest::Approx(std::sqrt(49.0 / 50.0)).epsilon(1e-12));

    // a gross between-chain offset must blow the statistic up
    auto split = gelman_rubin(two_chain_draws(mirrored, mirrored + 10.0));
    CHECK(split[0].rhat > 5.0);

    // constant draws have no within-chain variance to compare against
    auto flat = gelman_rubin(two_chain_draws(Eigen::ArrayXd::Constant(n, 3.0), Eigen::ArrayXd::Constant(n, 3.0)));
    CHECK(flat[0].degenerate);
    CHECK(flat[0].rhat == 1.0);

    PosteriorDraws one;
    one.names = {"x"};
    one.n_sampled = 1;
    one.chains.resize(1);
    one.chains[0].scalars = mirrored.matrix();
    CHECK_THROWS_AS(gelman_rubin(one), Error);

    auto short_draws = two_chain_draws(mirrored.head(8), mirrored.head(8));
    CHECK_THROWS_AS(gelman_rubin(short_draws), Error);
}

TEST_CASE("convergence verdict ignores derived and degenerate columns") {
    std::vector<RhatResult> rs(3);
    rs[0] = {"r_c", 1.01, false, true};
    rs[1] = {"peak_day_c", 3.0, false, false};  // derived: ignored
    rs[2] = {"flat", 1.0, true, true};          // degenerate: ignored
    CHECK(converged(rs, 1.05));
    rs[0].rhat = 1.2;
    CHECK(!converged(rs, 1.05));
    CHECK(converged(rs, 1.3));
}

namespace {

// Builds the transformed coordinate vector for a model from natural-scale
// values keyed by site name. Positive sites enter as logs, the fatality ratio
// as a logit, switch days untransformed.
Eigen::ArrayXd encode_by_name(const ModelSpec& model, const std::vector<std::pair<std::string, double>>& vals) {
    const std::vector<std::string> names = detail::sampled_names(model);
    Eigen::ArrayXd z(static_cast<Eigen::Index>(names.size()));
    for (size_t i = 0; i < names.size(); ++i) {
        double v = std::numeric_limits<double>::quiet_NaN();
        for (const auto& kv : vals) {
            if (kv.first == names[i]) v = kv.second;
        }
        REQUIRE(std::isfinite(v));
        if (names[i] == "phi") {
            z[static_cast<Eigen::Index>(i)] = std::log(v / (1.0 - v));
        } else if (names[i].rfind("kappa_", 0) == 0) {
            z[static_cast<Eigen::Index>(i)] = v;
        } else {
            z[static_cast<Eigen::Index>(i)] = std::log(v);
        }
    }
    return z;
}

// Sum of the change-of-variables terms the transformed-space density carries
// on top of the natural one: +z for every log site, +log(phi (1-phi)) for the
// logit site, nothing for raw switch days.
double jacobian_sum(const ModelSpec& model, const Eigen::ArrayXd& z) {
    const std::vector<std::string> names = detail::sampled_names(model);
    double s = 0.0;
    for (size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "phi") {
            const double phi = 1.0 / (1.0 + std::exp(-z[static_cast<Eigen::Index>(i)]));
            s += std::log(phi) + std::log1p(-phi);
        } else if (names[i].rfind("kappa_", 0) != 0) {
            s += z[static_cast<Eigen::Index>(i)];
        }
    }
    return s;
}

}  // namespace

TEST_CASE("transformed-space target equals natural density plus change of variables") {
    ModelSpec model = tiny_model();
    const int t_max = model.series.days();
    const int nc = t_max - first_likelihood_day(model.series.cum_cases, t_max) + 1;
    const int nd = t_max - first_likelihood_day(model.series.cum_deaths, t_max) + 1;

    ThetaBivariate th;
    th.r_c = 0.3;
    th.a_c = 0.9;
    th.K_c = 2000.0;
    th.r_d = 0.25;
    th.a_d = 1.2;
    th.phi = 0.12;
    th.err_hyper_c = 9.0;
    th.err_hyper_d = 11.0;

    LatentEffects lat_c, lat_d;
    lat_c.eps.resize(nc);
    lat_d.eps.resize(nd);
    Eigen::ArrayXd w_c(nc), w_d(nd);
    for (int i = 0; i < nc; ++i) w_c[i] = 0.1 * std::sin(i + 1.0);
    for (int i = 0; i < nd; ++i) w_d[i] = -0.05 * std::cos(static_cast<double>(i));
    lat_c.eps = w_c.exp();
    lat_d.eps = w_d.exp();

    SUBCASE("gamma effects on both outcomes") {
        const Eigen::ArrayXd z = encode_by_name(model, {{"r_c", th.r_c},
                                                        {"a_c", th.a_c},
                                                        {"K_c", th.K_c},
                                                        {"r_d", th.r_d},
                                                        {"a_d", th.a_d},
                                                        {"phi", th.phi},
                                                        {"lambda_c", th.err_hyper_c},
                                                        {"lambda_d", th.err_hyper_d}});
        const double lt = detail::model_log_target(model, z, w_c, w_d, {}, {});
        const double lp = log_posterior(th, lat_c, lat_d, model.series, model.prior, model.growth, ErrorFamily::pg,
                                        ErrorFamily::pg, t_max);
        REQUIRE(std::isfinite(lt));
        const double expected = lp + jacobian_sum(model, z) + w_c.sum() + w_d.sum();
        CHECK(lt == doctest::Approx(expected).epsilon(1e-11));
    }

    SUBCASE("student effects carry their mixing scales") {
        model.fam_c = ErrorFamily::pls;
        model.nu = 4.0;
        th.err_hyper_c = 0.5;  // sigma_eps; sampled coordinate is the log precision
        lat_c.mix.resize(nc);
        for (int i = 0; i < nc; ++i) lat_c.mix[i] = 0.8 + 0.1 * i;
        const Eigen::ArrayXd z = encode_by_name(model, {{"r_c", th.r_c},
                                                        {"a_c", th.a_c},
                                                        {"K_c", th.K_c},
                                                        {"r_d", th.r_d},
                                                        {"a_d", th.a_d},
                                                        {"phi", th.phi},
                                                        {"sigma_c", 1.0 / (0.5 * 0.5)},
                                                        {"lambda_d", th.err_hyper_d}});
        const double lt = detail::model_log_target(model, z, w_c, w_d, lat_c.mix, {});
        const double lp = log_posterior(th, lat_c, lat_d, model.series, model.prior, model.growth, ErrorFamily::pls,
                                        ErrorFamily::pg, t_max);
        REQUIRE(std::isfinite(lt));
        const double expected = lp + jacobian_sum(model, z) + w_c.sum() + w_d.sum();
        CHECK(lt == doctest::Approx(expected).epsilon(1e-11));
    }

    SUBCASE("a final size below the observed total kills both forms") {
        th.K_c = 250.0;  // cumulative cases reach 304
        const Eigen::ArrayXd z = encode_by_name(model, {{"r_c", th.r_c},
                                                        {"a_c", th.a_c},
                                                        {"K_c", th.K_c},
                                                        {"r_d", th.r_d},
                                                        {"a_d", th.a_d},
                                                        {"phi", th.phi},
                                                        {"lambda_c", th.err_hyper_c},
                                                        {"lambda_d", th.err_hyper_d}});
        const double inf = std::numeric_limits<double>::infinity();
        CHECK(detail::model_log_target(model, z, w_c, w_d, {}, {}) == -inf);
        std::string reason;
        CHECK(log_posterior(th, lat_c, lat_d, model.series, model.prior, model.growth, ErrorFamily::pg,
                            ErrorFamily::pg, t_max, &reason) == -inf);
        CHECK(!reason.empty());
    }
}

TEST_CASE("an inactive later phase only contributes its prior terms") {
    ModelSpec one = tiny_model();
    one.bivariate = false;
    const int t_max = one.series.days();
    const int nc = t_max - first_likelihood_day(one.series.cum_cases, t_max) + 1;
    Eigen::ArrayXd w_c(nc);
    for (int i = 0; i < nc; ++i) w_c[i] = 0.05 * std::sin(2.0 * i);

    ModelSpec two = one;
    two.n_phases = 2;

    const double r2 = 0.2, a2 = 1.1, eta = 1.0, kappa = 200.0;
    const Eigen::ArrayXd z1 = encode_by_name(
        one, {{"r_1", 0.3}, {"a_1", 0.9}, {"K_1", 2000.0}, {"lambda", 9.0}});
    const Eigen::ArrayXd z2 = encode_by_name(two, {{"r_1", 0.3},
                                                   {"a_1", 0.9},
                                                   {"K_1", 2000.0},
                                                   {"r_2", r2},
                                                   {"a_2", a2},
                                                   {"eta_2", eta},
                                                   {"kappa_2", kappa},
                                                   {"lambda", 9.0}});
    const double lt1 = detail::model_log_target(one, z1, w_c, {}, {}, {});
    const double lt2 = detail::model_log_target(two, z2, w_c, {}, {}, {});
    REQUIRE(std::isfinite(lt1));
    REQUIRE(std::isfinite(lt2));

    // switch day 200 lies beyond the 12-day window and the size ratio is 1, so
    // the likelihood is untouched; the difference is the new parameters' priors
    double extra = 0.0;
    extra += log_exponential_pdf(r2, 1.0) + std::log(r2);
    extra += log_exponential_pdf(a2, 1.0) + std::log(a2);
    extra += log_exponential_pdf(eta, 1.0) + std::log(eta);
    extra += log_exponential_pdf(kappa, 150.0);  // untransformed: no change-of-variables term
    CHECK(lt2 - lt1 == doctest::Approx(extra).epsilon(1e-11));

    // a switch day below 1 is outside the support
    Eigen::ArrayXd z_bad = z2;
    const std::vector<std::string> names = detail::sampled_names(two);
    for (size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "kappa_2") z_bad[static_cast<Eigen::Index>(i)] = 0.5;
    }
    CHECK(detail::model_log_target(two, z_bad, w_c, {}, {}, {}) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("fits are reproducible and structurally sound") {
    ModelSpec model;
    model.series = simulated_series();
    model.growth = GrowthFamily::richards;

    SamplerConfig cfg;
    cfg.n_chains = 2;
    cfg.n_iter = 1500;
    cfg.burn_in = 750;
    cfg.thin = 5;
    cfg.seed = 7;

    const PosteriorDraws d1 = run_chains(model, cfg);
    const PosteriorDraws d2 = run_chains(model, cfg);

    REQUIRE(d1.chains.size() == 2);
    const long keep = cfg.retained_per_chain();
    CHECK(d1.chains[0].scalars.rows() == keep);
    CHECK(d1.total_draws() == 2 * keep);

    // exact reproducibility for a fixed (model, config) pair
    for (int c = 0; c < 2; ++c) {
        CHECK((d1.chains[c].scalars.array() == d2.chains[c].scalars.array()).all());
        CHECK((d1.chains[c].log_target == d2.chains[c].log_target).all());
    }
    // ... while distinct chains explore on independent randomness
    CHECK(!(d1.chains[0].scalars.array() == d1.chains[1].scalars.array()).all());

    // resolution filled in the window end and the data-derived prior centre
    CHECK(d1.model.t_max == model.series.days());
    CHECK(std::isfinite(d1.model.prior.k_log_mean));

    const std::vector<std::string> sampled = detail::sampled_names(d1.model);
    CHECK(d1.n_sampled == static_cast<int>(sampled.size()));
    for (size_t i = 0; i < sampled.size(); ++i) CHECK(d1.names[i] == sampled[i]);
    const std::vector<std::string> derived(d1.names.begin() + d1.n_sampled, d1.names.end());
    CHECK(derived == std::vector<std::string>{"K_d", "tau_c", "tau_d", "peak_day_c", "peak_day_d"});

    for (const ChainDraws& c : d1.chains) {
        CHECK(c.iterations.front() == cfg.burn_in);
        CHECK(static_cast<long>(c.iterations.size()) == keep);
        CHECK((c.scales_at_end == c.scales_at_freeze).all());
        CHECK(c.scalars.allFinite());
        CHECK(c.log_target.isFinite().all());
        for (Eigen::Index i = 0; i < c.accept_rate.size(); ++i) {
            CHECK(c.accept_rate[i] > 0.05);
            CHECK(c.accept_rate[i] < 0.95);
        }
        CHECK(c.eps_cases.rows() == keep);
        CHECK(c.eps_deaths.rows() == keep);
        CHECK(c.eps_cases.cols() == d1.model.resolved_t_max() - d1.first_case_day + 1);
    }

    // decoded draws honour the fatality-ratio link
    const int kc = d1.col("K_c"), kd = d1.col("K_d"), phi = d1.col("phi");
    REQUIRE(kc >= 0);
    REQUIRE(kd >= 0);
    REQUIRE(phi >= 0);
    for (int idx : {0, 3, static_cast<int>(keep) - 1}) {
        const DrawParams dp = draw_params(d1, 0, idx);
        CHECK(dp.has_death);
        CHECK(dp.phi == doctest::Approx(d1.chains[0].scalars(idx, phi)).epsilon(1e-14));
        CHECK(dp.death.K ==
              doctest::Approx(d1.chains[0].scalars(idx, phi) * d1.chains[0].scalars(idx, kc)).epsilon(1e-12));
        CHECK(dp.death.K == doctest::Approx(d1.chains[0].scalars(idx, kd)).epsilon(1e-12));
        CHECK(dp.err_c.family == ErrorFamily::pg);
        CHECK(dp.err_c.lambda == doctest::Approx(d1.chains[0].scalars(idx, d1.col("lambda_c"))).epsilon(1e-14));
        CHECK(dp.cases.phases[0].r == doctest::Approx(d1.chains[0].scalars(idx, d1.col("r_c"))).epsilon(1e-14));
    }

    // rhat runs and the verdict responds to the threshold
    const auto rhats = gelman_rubin(d1);
    CHECK(rhats.size() == d1.names.size());
    CHECK(!converged(rhats, 1.0000001));  // the deflation floor keeps values near but not at 1

    // pooled summaries have ordered quantiles around a finite mean
    const SummaryTable tab = summarize(d1);
    CHECK(tab.rows.size() == d1.names.size());
    for (const SummaryRow& row : tab.rows) {
        CHECK(std::isfinite(row.mean));
        REQUIRE(row.quantiles.size() == 3);
        CHECK(row.quantiles[0] <= row.quantiles[1]);
        CHECK(row.quantiles[1] <= row.quantiles[2]);
    }

    // fitted in-sample trajectories: one row per draw, seeded by the first count
    const Eigen::MatrixXd fitted = insample_predicted_cases(d1);
    CHECK(fitted.rows() == d1.total_draws());
    CHECK(fitted.cols() == d1.model.resolved_t_max());
    CHECK((fitted.col(0).array() == d1.model.series.cases[0]).all());
}

TEST_CASE("information criterion collapses to the plain likelihood for identical draws") {
    ModelSpec model;
    model.series = simulated_series(11);
    model.bivariate = false;

    SamplerConfig cfg;
    cfg.n_chains = 1;
    cfg.n_iter = 400;
    cfg.burn_in = 200;
    cfg.thin = 10;
    cfg.seed = 3;
    PosteriorDraws d = run_chains(model, cfg);
    REQUIRE(d.chains.size() == 1);

    // replicate the first retained draw across the whole chain
    ChainDraws& c = d.chains[0];
    for (Eigen::Index k = 1; k < c.scalars.rows(); ++k) {
        c.scalars.row(k) = c.scalars.row(0);
        c.eps_cases.row(k) = c.eps_cases.row(0);
    }

    const int t_max = d.model.resolved_t_max();
    const WaicReport rep = waic(d, d.model.series, t_max);
    CHECK(!rep.has_deaths);
    CHECK(rep.cases.p_waic == doctest::Approx(0.0).epsilon(1e-12));

    // with no between-draw spread the pointwise predictive density is just the
    // single draw's Poisson likelihood
    const DrawParams dp = draw_params(d, 0, 0);
    double ll = 0.0;
    for (int t = d.first_case_day; t <= t_max; ++t) {
        const double mu = multiphase_mean_raw(dp.cases, d.model.series.cum_cases[t - 2], static_cast<double>(t));
        const double eps = c.eps_cases(0, t - d.first_case_day);
        ll += log_poisson_pmf(static_cast<long long>(d.model.series.cases[t - 1]), mu * eps);
    }
    CHECK(rep.cases.lppd == doctest::Approx(ll).epsilon(1e-10));
    CHECK(rep.cases.waic == doctest::Approx(-2.0 * ll).epsilon(1e-10));
    CHECK(rep.waic_total == doctest::Approx(rep.cases.waic).epsilon(1e-12));

    // stored effects that no longer line up with the window are rejected
    c.eps_cases.conservativeResize(c.eps_cases.rows(), c.eps_cases.cols() - 1);
    try {
        waic(d, d.model.series, t_max);
        FAIL("expected a data error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrKind::data);
    }
}

TEST_CASE("scalar random-walk kernel with batched adaptation samples a unit normal") {
    auto log_target = [](double x) { return -0.5 * x * x; };
    detail::AdaptScale sc;
    Rng rng(31);
    double x = 0.0, lt = 0.0;

    int in_batch = 0;
    for (int iter = 0; iter < 6000; ++iter) {
        sc.record(detail::rwm_step(x, lt, sc.scale(), log_target, rng));
        if (++in_batch == 50) {
            sc.end_batch(50, 0.44);
            in_batch = 0;
        }
    }
    sc.frozen = true;
    const double frozen_scale = sc.scale();
    sc.end_batch(50, 0.44);
    CHECK(sc.scale() == frozen_scale);

    long accepted = 0;
    const int n = 50000;
    double sum = 0.0, sumsq = 0.0;
    for (int iter = 0; iter < n; ++iter) {
        if (detail::rwm_step(x, lt, frozen_scale, log_target, rng)) ++accepted;
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sumsq / n - mean * mean);
    const double rate = static_cast<double>(accepted) / n;
    CHECK(rate > 0.3);
    CHECK(rate < 0.6);
    CHECK(mean == doctest::Approx(0.0).scale(1.0).epsilon(0.08));
    CHECK(sd == doctest::Approx(1.0).epsilon(0.08));

    // hand-tuned sites opt out of adaptation entirely
    detail::AdaptScale fixed;
    fixed.adapt = false;
    const double s0 = fixed.scale();
    fixed.record(true);
    fixed.end_batch(1, 0.44);
    CHECK(fixed.scale() == s0);
}
