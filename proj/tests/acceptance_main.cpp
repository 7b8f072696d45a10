// Acceptance harness. Each suite prints one PASS/FAIL line per criterion with
// the measured value and the pinned tolerance, and the process exits nonzero
// if any criterion fails. Select a suite by name:
//
//   oracles      closed-form and Monte-Carlo cross-checks (fast)
//   recovery     parameter recovery on simulated data (minutes)
//   calibration  held-out forecast calibration per error family (minutes)
//   determinism  byte-identical artifacts on repeated runs
//   uk           frozen reference values on an archived UK surveillance
//                snapshot; skipped (exit 77) unless EPIFIT_UK_DATA points at
//                the CSV

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "epifit/errmodel.hpp"
#include "epifit/forecast.hpp"
#include "epifit/growth.hpp"
#include "epifit/mcmc.hpp"
#include "epifit/rtestim.hpp"
#include "epifit/series.hpp"
#include "epifit/simulate.hpp"
#include "epifit/stats.hpp"

namespace fs = std::filesystem;
using namespace epifit;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s: %s (%s)\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// oracles
// ---------------------------------------------------------------------------

double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

void oracle_richards_logistic() {
    // The shape exponent at 1 must reproduce plain logistic growth exactly,
    // both for the incidence mean and for the closed-form trajectory.
    double worst = 0.0;
    for (double r : {0.05, 0.3, 1.0}) {
        for (double K : {100.0, 20000.0}) {
            GrowthParams rich{GrowthFamily::richards, r, K, 1.0};
            GrowthParams logi{GrowthFamily::logistic, r, K, 1.0};
            for (int i = 1; i <= 24; ++i) {
                const double c = K * i / 25.0;
                worst = std::max(worst, rel_diff(mean_incidence(rich, c), mean_incidence(logi, c)));
            }
            const double tau = 40.0;
            for (int t = -20; t <= 100; t += 5) {
                worst = std::max(worst, rel_diff(richards_cumulative(rich, t, tau),
                                                 richards_cumulative(logi, t, tau)));
            }
        }
    }
    report("oracles/shape-one-matches-logistic", worst < 1e-12,
           "max rel diff " + num(worst) + ", tol 1e-12");
}

void oracle_k_point_estimate() {
    // Final size read off three equally spaced points of an exact logistic
    // trajectory must recover K to high relative accuracy.
    const GrowthParams p{GrowthFamily::logistic, 0.2, 1000.0, 1.0};
    Eigen::ArrayXd cum(81);
    for (int t = 1; t <= 81; ++t) cum[t - 1] = richards_cumulative(p, t, 40.0);
    double worst = 0.0;
    for (int m : {10, 25}) {
        const int t = 2 * m + 21;
        worst = std::max(worst, std::abs(k_point_estimate(cum, t, m) - 1000.0) / 1000.0);
    }
    report("oracles/final-size-point-estimate", worst < 1e-8,
           "max rel err " + num(worst) + ", tol 1e-8");
}

/// Log of the gamma-mixed Poisson pmf by brute-force quadrature: Simpson's
/// rule on the integrand Poisson(y; mu*e) * Gamma(e; lam, lam) over a window
/// of +-40 posterior-scale standard deviations around the integrand mode.
double nb_quadrature_log(long long y, double mu, double lam) {
    const double yd = static_cast<double>(y);
    const double estar = (yd + lam >= 1.0) ? (yd + lam - 1.0) / (mu + lam) : 0.0;
    const double sig = std::sqrt(yd + lam) / (mu + lam);
    const double lo = std::max(1e-12, estar - 40.0 * sig);
    const double hi = estar + 40.0 * sig;
    const int n = 20000;  // even
    const double h = (hi - lo) / n;
    auto logf = [&](double e) {
        double v = -mu * e - std::lgamma(yd + 1.0) + lam * std::log(lam) + (lam - 1.0) * std::log(e) -
                   lam * e - std::lgamma(lam);
        if (y > 0) v += yd * std::log(mu * e);
        return v;
    };
    std::vector<double> lw(n + 1);
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        lw[static_cast<size_t>(i)] = logf(lo + i * h);
        m = std::max(m, lw[static_cast<size_t>(i)]);
    }
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        s += w * std::exp(lw[static_cast<size_t>(i)] - m);
    }
    return m + std::log(s * h / 3.0);
}

void oracle_nb_marginal() {
    double worst = 0.0;
    for (long long y : {0LL, 3LL, 10LL, 50LL, 200LL}) {
        for (double mu : {0.5, 2.0, 10.0, 100.0, 1000.0}) {
            for (double lam : {1.0, 5.0, 50.0}) {
                worst = std::max(worst, std::abs(nb_marginal_logpmf(y, mu, lam) - nb_quadrature_log(y, mu, lam)));
            }
        }
    }
    report("oracles/negative-binomial-vs-quadrature", worst < 1e-8,
           "max |log diff| " + num(worst) + " over 75 grid points, tol 1e-8");
}

/// Student-t CDF at 4 degrees of freedom, closed form.
double t4_cdf(double x) {
    const double u = x / std::sqrt(1.0 + x * x / 4.0);
    return 0.5 + (3.0 / 8.0) * u * (1.0 - u * u / 12.0);
}

void oracle_student_mixture() {
    // Drawing a gamma mixing scale and then a conditional normal must produce
    // exactly Student-t log effects; one-sample KS against the exact CDF.
    const long n = 1000000;
    ErrorSpec spec;
    spec.family = ErrorFamily::pls;
    spec.sigma_eps = 1.0;
    spec.nu = 4.0;
    Rng rng(mix_seed(20200808, 77));
    std::vector<double> u(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) u[static_cast<size_t>(i)] = std::log(draw_effect(spec, rng));
    std::sort(u.begin(), u.end());
    double ks = 0.0;
    for (long i = 0; i < n; ++i) {
        const double f = t4_cdf(u[static_cast<size_t>(i)]);
        ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
        ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / n));
    }
    report("oracles/student-mixture-distribution", ks < 0.005,
           "KS distance " + num(ks) + " at 1e6 draws, tol 0.005");
}

void oracle_rt_invariants() {
    const Eigen::ArrayXd w = discretize_si(si_from_mean_sd(4.0, 2.0), 10);

    Eigen::MatrixXd inc(1, 40);
    inc.setConstant(250.0);
    const RtSeries rt = effective_r(inc, w);
    double worst = 0.0;
    bool all_defined = !rt.day.empty();
    for (size_t i = 0; i < rt.day.size(); ++i) {
        all_defined = all_defined && rt.defined[i];
        worst = std::max(worst, std::abs(rt.mean[static_cast<long>(i)] - 1.0));
    }
    report("oracles/reproduction-ratio-constant-incidence", all_defined && worst < 1e-9,
           "max |R - 1| " + num(worst) + ", tol 1e-9");

    // Scaling every count by a power of two must leave the ratios bit-identical.
    Eigen::MatrixXd inc2(2, 40);
    Rng rng(mix_seed(3, 0));
    for (int i = 0; i < inc2.rows(); ++i) {
        for (int j = 0; j < inc2.cols(); ++j) {
            inc2(i, j) = static_cast<double>(draw_poisson(rng, 40.0 + 3.0 * j));
        }
    }
    const RtSeries a = effective_r(inc2, w);
    const RtSeries b = effective_r(4.0 * inc2, w);
    bool same = a.day == b.day;
    for (long i = 0; same && i < a.mean.size(); ++i) {
        auto eq = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
        same = eq(a.mean[i], b.mean[i]) && eq(a.lo[i], b.lo[i]) && eq(a.hi[i], b.hi[i]);
    }
    report("oracles/reproduction-ratio-scale-invariance", same, "trajectories x4: ratios bit-identical");
}

void oracle_si_weights() {
    double worst = 0.0;
    for (double mean : {2.5, 4.0, 6.5}) {
        for (int lag : {8, 16}) {
            worst = std::max(worst, std::abs(discretize_si(si_from_mean_sd(mean, 2.0), lag, true).sum() - 1.0));
            worst = std::max(worst, std::abs(discretize_si(si_from_mean_sd(mean, 2.0), lag, false).sum() - 1.0));
        }
    }
    report("oracles/serial-interval-weights-sum", worst < 1e-12,
           "max |sum - 1| " + num(worst) + ", tol 1e-12");

    const GammaSI g = si_from_mean_sd(4.0, 1.6);
    const GammaSI pooled = pool_si({g, g}, 500000, 7);
    const double dm = std::abs(pooled.mean() - g.mean()) / g.mean();
    const double ds = std::abs(pooled.sd() - g.sd()) / g.sd();
    report("oracles/serial-interval-pooling-idempotent", dm < 0.02 && ds < 0.02,
           "mean off " + num(dm * 100) + "%, sd off " + num(ds * 100) + "%, tol 2%");
}

int suite_oracles() {
    oracle_richards_logistic();
    oracle_k_point_estimate();
    oracle_nb_marginal();
    oracle_student_mixture();
    oracle_rt_invariants();
    oracle_si_weights();
    return g_failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// recovery
// ---------------------------------------------------------------------------

int suite_recovery() {
    const double true_r = 0.25, true_a = 0.5, true_k = 200000.0, true_lambda = 10.0;
    const int n_reps = 20;

    int cover_r = 0, cover_a = 0, cover_k = 0, cover_lambda = 0;
    double worst_rhat = 0.0;

    for (int rep = 0; rep < n_reps; ++rep) {
        SimSpec sim;
        sim.cases.phases = {GrowthParams{GrowthFamily::richards, true_r, true_k, true_a}};
        sim.err_c.family = ErrorFamily::pg;
        sim.err_c.lambda = true_lambda;
        sim.t_max = 120;
        sim.c1 = 5.0;
        sim.seed = 1000 + static_cast<std::uint64_t>(rep);
        const SimOutput data = simulate_epidemic(sim);

        ModelSpec model;
        model.series = data.series;
        model.bivariate = false;
        model.growth = GrowthFamily::richards;
        model.fam_c = ErrorFamily::pg;

        // 20000 retained draws per chain.  Single-site random-walk updates on
        // the latent effects make the raw chain mix slowly (the conditional
        // width of log r given the latents is ~1/50 of its marginal width), so
        // the retained sample is spaced out over a long post-burn span to get
        // an adequate effective sample size per chain.
        SamplerConfig cfg;
        cfg.n_chains = 2;
        cfg.n_iter = 800000;
        cfg.burn_in = 200000;
        cfg.thin = 30;
        cfg.seed = 5000 + static_cast<std::uint64_t>(rep);

        const PosteriorDraws draws = run_chains(model, cfg);
        for (const RhatResult& rr : gelman_rubin(draws)) {
            if (rr.sampled && !rr.degenerate) worst_rhat = std::max(worst_rhat, rr.rhat);
        }

        const SummaryTable tab = summarize(draws);
        auto covers = [&](const std::string& name, double truth) {
            for (const SummaryRow& row : tab.rows) {
                if (row.name == name) return row.quantiles.front() <= truth && truth <= row.quantiles.back();
            }
            return false;
        };
        cover_r += covers("r_1", true_r);
        cover_a += covers("a_1", true_a);
        cover_k += covers("K_1", true_k);
        cover_lambda += covers("lambda", true_lambda);
    }

    auto line = [&](const char* what, int hits) {
        report(std::string("recovery/credible-interval-covers-") + what, hits >= 17,
               std::to_string(hits) + "/20 replicates, need >= 17");
    };
    line("growth-rate", cover_r);
    line("shape", cover_a);
    line("final-size", cover_k);
    line("overdispersion", cover_lambda);
    report("recovery/chains-converged", worst_rhat < 1.05,
           "max split statistic " + num(worst_rhat) + " across 20 fits, tol 1.05");
    return g_failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// calibration
// ---------------------------------------------------------------------------

int suite_calibration() {
    const int n_reps = 20, M = 80, F = 20;

    for (ErrorFamily fam : {ErrorFamily::pg, ErrorFamily::pln, ErrorFamily::pls}) {
        int inside = 0;
        std::string omegas;
        for (int rep = 0; rep < n_reps; ++rep) {
            SimSpec sim;
            sim.cases.phases = {GrowthParams{GrowthFamily::logistic, 0.115, 20000.0, 1.0}};
            sim.with_deaths = true;
            sim.death = GrowthParams{GrowthFamily::logistic, 0.1, 1000.0, 1.0};
            sim.d1 = 2.0;
            sim.c1 = 10.0;
            sim.t_max = M + F;
            sim.err_c.family = sim.err_d.family = fam;
            sim.err_c.lambda = sim.err_d.lambda = 10.0;
            sim.err_c.sigma_eps = sim.err_d.sigma_eps = 0.3;
            sim.seed = 2000 + static_cast<std::uint64_t>(rep);
            const SimOutput data = simulate_epidemic(sim);

            ModelSpec model;
            model.series = data.series;
            model.t_max = M;
            model.growth = GrowthFamily::logistic;
            model.fam_c = model.fam_d = fam;

            SamplerConfig cfg;
            cfg.n_chains = 2;
            cfg.n_iter = 3000;
            cfg.burn_in = 1500;
            cfg.thin = 15;
            cfg.seed = 7000 + static_cast<std::uint64_t>(rep);

            const PosteriorDraws draws = run_chains(model, cfg);
            ForecastOptions fo;
            fo.seed = 9000 + static_cast<std::uint64_t>(rep);
            const CrossValReport cv = crossval(predict_paths(draws, data.series, M, F, fo), data.series, M, F);
            const bool ok = cv.cases.omega > 0.05 && cv.cases.omega < 0.95 && cv.deaths.omega > 0.05 &&
                            cv.deaths.omega < 0.95;
            inside += ok;
            if (!ok) {
                omegas += " [rep " + std::to_string(rep) + ": wc=" + num(cv.cases.omega) +
                          " wd=" + num(cv.deaths.omega) + "]";
            }
        }
        report(std::string("calibration/overprediction-probability-") + to_string(fam), inside >= 18,
               std::to_string(inside) + "/20 replicates with both omegas in (0.05, 0.95), need >= 18" + omegas);
    }
    return g_failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// determinism
// ---------------------------------------------------------------------------

int run_cli(const std::string& args) {
    const std::string cmd = std::string(EPIFIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return status == -1 ? -1 : WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<unreadable:" + path + ">";
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int suite_determinism() {
    const fs::path dir = fs::path("/tmp") / ("epifit_accept_det_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string d = dir.string();

    const std::string sim_args = "simulate --r 0.15 --k 20000 --t 50 --c1 5 --deaths --death-r 0.12 "
                                 "--death-k 2000 --seed 42 -o ";
    bool ok = run_cli(sim_args + d + "/sim1") == 0 && run_cli(sim_args + d + "/sim2") == 0;
    report("determinism/simulate-byte-identical",
           ok && slurp(d + "/sim1/series.csv") == slurp(d + "/sim2/series.csv"),
           "same seed, two runs, series.csv compared");

    const std::string fit_args = "fit --iters 800 --burn 400 --thin 10 --seed 9 --no-rhat-gate -i " + d +
                                 "/sim1/series.csv -o ";
    ok = run_cli(fit_args + d + "/fit1") == 0 && run_cli(fit_args + d + "/fit2") == 0;
    bool same = ok;
    for (const char* f : {"draws.csv", "summary.csv", "waic.csv", "pred_cases.csv"}) {
        same = same && slurp(d + "/fit1/" + f) == slurp(d + "/fit2/" + f);
    }
    report("determinism/fit-byte-identical", same,
           "same seed and data, two runs, draws/summary/waic/pred_cases compared");

    const std::string fc_args = "forecast --fit-dir " + d + "/fit1 -f 10 --seed 4 -o ";
    ok = run_cli(fc_args + d + "/fc1") == 0 && run_cli(fc_args + d + "/fc2") == 0;
    report("determinism/forecast-byte-identical",
           ok && slurp(d + "/fc1/fan.csv") == slurp(d + "/fc2/fan.csv"),
           "same fit and seed, two runs, fan.csv compared");

    const std::string rt_args = "rt --fit-dir " + d + "/fit1 -o ";
    ok = run_cli(rt_args + d + "/rt1") == 0 && run_cli(rt_args + d + "/rt2") == 0;
    report("determinism/reproduction-ratio-byte-identical",
           ok && slurp(d + "/rt1/rt.csv") == slurp(d + "/rt2/rt.csv"),
           "same fit, two runs, rt.csv compared");

    std::error_code ec;
    fs::remove_all(dir, ec);
    return g_failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// uk: frozen reference values on the archived surveillance snapshot
// ---------------------------------------------------------------------------

struct UkFit {
    PosteriorDraws draws;
    WaicReport w;
};

UkFit uk_fit(const EpidemicSeries& series, ErrorFamily fam, int t_max, long n_iter, std::uint64_t seed) {
    ModelSpec model;
    model.series = series;
    model.t_max = t_max;
    model.growth = GrowthFamily::richards;
    model.fam_c = model.fam_d = fam;

    SamplerConfig cfg;
    cfg.n_chains = 2;
    cfg.n_iter = n_iter;
    cfg.thin = 10;
    cfg.seed = seed;

    UkFit out{run_chains(model, cfg), {}};
    out.w = waic(out.draws, series, t_max);
    return out;
}

double posterior_mean(const PosteriorDraws& draws, const std::string& name) {
    const int c = draws.col(name);
    return c < 0 ? std::numeric_limits<double>::quiet_NaN() : draws.pooled(c).mean();
}

int suite_uk() {
    const char* path = std::getenv("EPIFIT_UK_DATA");
    if (!path || !fs::exists(path)) {
        std::printf("SKIP: uk suite needs EPIFIT_UK_DATA pointing at the archived UK daily-count CSV\n");
        std::printf("SKIP: expected columns dateRep (dd/mm/yyyy), cases, deaths, countriesAndTerritories;\n");
        std::printf("SKIP: rows for United_Kingdom from 2020-02-01 through 2020-08-08\n");
        return 77;
    }

    // Day 1 of the reference runs is 2020-02-01. If the snapshot's first
    // positive case lands later, the fit windows and reported day indices are
    // shifted accordingly so the comparisons stay on the reference calendar.
    std::ifstream in(path, std::ios::binary);
    CsvSchema schema;
    schema.date_col = "dateRep";
    schema.region_col = "countriesAndTerritories";
    std::vector<RawRecord> records = parse_csv(in, schema, "United_Kingdom");
    const Date day1{2020, 2, 1};
    const Date last{2020, 8, 8};
    records.erase(std::remove_if(records.begin(), records.end(),
                                 [&](const RawRecord& r) { return r.date < day1 || last < r.date; }),
                  records.end());
    while (!records.empty() && records.front().new_cases <= 0) records.erase(records.begin());
    if (records.size() < 100) {
        report("uk/snapshot-coverage", false, "fewer than 100 usable rows in the window");
        return 1;
    }
    const EpidemicSeries series = build_series(records, NegativePolicy::clamp_zero);
    const long shift = series.origin.serial() - day1.serial();  // calendar day = model day + shift
    auto window = [&](int reference_day) { return static_cast<int>(reference_day - shift); };

    const bool full = std::getenv("EPIFIT_UK_FULL") != nullptr;
    const long iters = full ? 100000 : 20000;
    std::printf("uk: %d days from %s (shift %ld), %ld iterations per chain\n", series.days(),
                series.origin.iso().c_str(), shift, iters);

    // Error-family comparison at three training windows: the heavy-tailed
    // family must win, and its totals must sit near the frozen references.
    const double ref_totals[3] = {914.5, 1358.9, 1773.8};
    const int windows[3] = {80, 100, 120};
    UkFit fits[3][3];  // [window][family: pg, pln, pls]
    for (int wi = 0; wi < 3; ++wi) {
        const ErrorFamily fams[3] = {ErrorFamily::pg, ErrorFamily::pln, ErrorFamily::pls};
        for (int fi = 0; fi < 3; ++fi) {
            fits[wi][fi] = uk_fit(series, fams[fi], window(windows[wi]), iters,
                                  11000 + static_cast<std::uint64_t>(10 * wi + fi));
        }
        const double pg = fits[wi][0].w.waic_total, pln = fits[wi][1].w.waic_total,
                     pls = fits[wi][2].w.waic_total;
        report("uk/error-family-ordering-m" + std::to_string(windows[wi]), pls < pln && pln < pg,
               "totals pg " + num(pg) + ", pln " + num(pln) + ", pls " + num(pls) +
                   "; need pls < pln < pg");
        const double rel = std::abs(pls - ref_totals[wi]) / ref_totals[wi];
        report("uk/heavy-tail-total-m" + std::to_string(windows[wi]), rel < 0.05,
               "total " + num(pls) + " vs reference " + num(ref_totals[wi]) + ", off " +
                   num(rel * 100) + "%, tol 5%");
    }

    if (!full) {
        std::printf("uk: reduced run; set EPIFIT_UK_FULL=1 for the posterior spot checks\n");
        return g_failures == 0 ? 0 : 1;
    }

    // Posterior spot checks against the frozen reference values.
    {
        const double kc = posterior_mean(fits[2][0].draws, "K_c");
        const double rel = std::abs(kc - 302800.0) / 302800.0;
        report("uk/final-size-cases-m120", rel < 0.10,
               "posterior mean " + num(kc) + " vs reference 302800, off " + num(rel * 100) + "%, tol 10%");
    }
    {
        const double kd = posterior_mean(fits[0][2].draws, "K_d");
        const double rel = std::abs(kd - 35780.0) / 35780.0;
        report("uk/final-size-deaths-m80", rel < 0.15,
               "posterior mean " + num(kd) + " vs reference 35780, off " + num(rel * 100) + "%, tol 15%");
    }
    for (int fi = 0; fi < 3; ++fi) {
        const double tau = posterior_mean(fits[2][fi].draws, "tau_d") + static_cast<double>(shift);
        report(std::string("uk/death-turning-point-m120-") + to_string(fits[2][fi].draws.model.fam_c),
               tau >= 75.0 && tau <= 80.0,
               "posterior mean day " + num(tau) + ", reference 77-78, tol +-2");
    }

    // Held-out verdicts at the reference windows.
    auto verdicts = [&](int wi, int fi) {
        const UkFit& f = fits[wi][fi];
        ForecastOptions fo;
        fo.seed = 13000 + static_cast<std::uint64_t>(10 * wi + fi);
        const int M = window(windows[wi]);
        return crossval(predict_paths(f.draws, series, M, 20, fo), series, M, 20);
    };
    report("uk/gamma-underpredicts-m120", verdicts(2, 0).cases.verdict == "underprediction",
           "verdict " + verdicts(2, 0).cases.verdict);
    report("uk/lognormal-underpredicts-m120", verdicts(2, 1).cases.verdict == "underprediction",
           "verdict " + verdicts(2, 1).cases.verdict);
    report("uk/heavy-tail-satisfactory-m100-m120",
           verdicts(1, 2).cases.verdict == "satisfactory" && verdicts(2, 2).cases.verdict == "satisfactory",
           "verdicts " + verdicts(1, 2).cases.verdict + ", " + verdicts(2, 2).cases.verdict);

    // Two-phase switch-point fit over the full window, and the late
    // transmission signal from the fitted trajectories.
    {
        ModelSpec model;
        model.series = series;
        model.t_max = window(190);
        model.growth = GrowthFamily::richards;
        model.bivariate = false;
        model.n_phases = 2;
        model.fam_c = ErrorFamily::pls;

        SamplerConfig cfg;
        cfg.n_chains = 2;
        cfg.n_iter = iters;
        cfg.thin = 10;
        cfg.seed = 15000;

        const PosteriorDraws draws = run_chains(model, cfg);
        const double kappa = posterior_mean(draws, "kappa_2") + static_cast<double>(shift);
        report("uk/switch-day-two-phase", std::abs(kappa - 179.1) <= 2.0,
               "posterior mean day " + num(kappa) + " vs reference 179.1, tol +-2");

        const Eigen::ArrayXd w = discretize_si(si_from_mean_sd(3.5, 3.1), 16);
        const RtSeries rt = effective_r(insample_predicted_cases(draws), w);
        bool hit = false;
        for (size_t i = rt.day.size() >= 14 ? rt.day.size() - 14 : 0; i < rt.day.size(); ++i) {
            hit = hit || (rt.defined[i] && rt.sig_above_1[i] && rt.ma5[static_cast<long>(i)] > 1.0);
        }
        report("uk/late-resurgence-signal", hit,
               "smoothed ratio above 1 with significance in the final 14 days");
    }
    return g_failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s {oracles|recovery|calibration|determinism|uk}\n", argv[0]);
        return 2;
    }
    const std::string suite = argv[1];
    try {
        if (suite == "oracles") return suite_oracles();
        if (suite == "recovery") return suite_recovery();
        if (suite == "calibration") return suite_calibration();
        if (suite == "determinism") return suite_determinism();
        if (suite == "uk") return suite_uk();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "FAIL: %s aborted: %s\n", suite.c_str(), e.what());
        return 1;
    }
    std::fprintf(stderr, "unknown suite '%s'\n", suite.c_str());
    return 2;
}
