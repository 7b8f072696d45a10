// Command-line front end: ingest raw daily counts, fit the growth models,
// forecast, cross-validate, run switch-point fits, estimate reproduction
// ratios and generate synthetic data.
//
// Exit codes: 0 success, 2 configuration problem (bad flags or settings),
// 3 data problem (unreadable or malformed inputs), 4 convergence gate failed.

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "epifit/forecast.hpp"
#include "epifit/io.hpp"
#include "epifit/mcmc.hpp"
#include "epifit/rtestim.hpp"
#include "epifit/series.hpp"
#include "epifit/simulate.hpp"

namespace fs = std::filesystem;
using namespace epifit;

namespace {

int exit_code_for(const Error& e) {
    return e.kind() == ErrKind::data ? 3 : 2;
}

// ---------------------------------------------------------------------------
// Shared option bundles
// ---------------------------------------------------------------------------

struct InputOpts {
    std::string input;
    std::string region;
    CsvSchema schema;
    bool clamp_negatives = false;
};

void add_input_opts(CLI::App* cmd, InputOpts& o, bool required = true) {
    auto* opt = cmd->add_option("-i,--input", o.input, "Daily-count CSV (raw export or canonical series form)");
    if (required) opt->required();
    cmd->add_option("--region", o.region, "Keep only rows matching this region id (raw input only)");
    cmd->add_option("--date-col", o.schema.date_col, "Date column name in raw input")->capture_default_str();
    cmd->add_option("--cases-col", o.schema.cases_col, "Case-count column name")->capture_default_str();
    cmd->add_option("--deaths-col", o.schema.deaths_col, "Death-count column name")->capture_default_str();
    cmd->add_option("--region-col", o.schema.region_col, "Region column name")->capture_default_str();
    cmd->add_flag("--clamp-negatives", o.clamp_negatives, "Replace negative daily counts with zero instead of failing");
}

EpidemicSeries load_series(const InputOpts& o) {
    std::ifstream f(o.input, std::ios::binary);
    if (!f) throw_data("cannot open '" + o.input + "'");
    std::string first_line;
    if (!std::getline(f, first_line)) throw_data("'" + o.input + "' is empty");
    f.clear();
    f.seekg(0);
    if (is_series_csv_header(first_line)) {
        return read_series_csv(f);
    }
    const auto records = parse_csv(f, o.schema, o.region);
    return build_series(records, o.clamp_negatives ? NegativePolicy::clamp_zero : NegativePolicy::error_out);
}

struct ModelOpts {
    std::string growth = "richards";
    std::string fam_c = "pg";
    std::string fam_d;
    bool univariate = false;
    int t_max = 0;
    double nu = 4.0;
    std::string k_link = "phi";
    bool allow_negative_mean = false;
    PriorConfig prior;
    PhasePriors phase_priors;
};

void add_model_opts(CLI::App* cmd, ModelOpts& o, bool with_phase_priors = false) {
    cmd->add_option("--growth", o.growth, "Growth law: richards, logistic, gompertz or rosenzweig")
        ->capture_default_str();
    cmd->add_option("--family", o.fam_c, "Error family for cases: pg, pln or pls")->capture_default_str();
    cmd->add_option("--family-deaths", o.fam_d, "Error family for deaths (defaults to --family)");
    cmd->add_flag("--univariate", o.univariate, "Fit cases only, no death component");
    cmd->add_option("--t-max", o.t_max, "Last day of the training window (0 = full series)");
    cmd->add_option("--nu", o.nu, "Student-t degrees of freedom for the pls family")->capture_default_str();
    cmd->add_option("--k-link", o.k_link, "Death final size: 'phi' (ratio of case K) or 'independent'")
        ->capture_default_str();
    cmd->add_flag("--allow-negative-mean", o.allow_negative_mean,
                  "Permit the rosenzweig form, whose increment is negative below K");
    cmd->add_option("--rate-prior-mean", o.prior.rate_prior_mean, "Exponential prior mean for r and a")
        ->capture_default_str();
    cmd->add_option("--k-log-mean", o.prior.k_log_mean,
                    "Lognormal prior log-mean for the case final size (default: from the data)");
    cmd->add_option("--k-log-var", o.prior.k_log_var, "Lognormal prior log-variance for K")->capture_default_str();
    cmd->add_option("--cfr-ref", o.prior.cfr_ref, "Reference case fatality ratio for the phi prior")
        ->capture_default_str();
    cmd->add_option("--cfr-count", o.prior.cfr_count, "Beta prior concentration for phi")->capture_default_str();
    cmd->add_option("--hyper-shape", o.prior.hyper_shape, "Gamma prior shape on lambda / the log-effect precision")
        ->capture_default_str();
    cmd->add_option("--hyper-rate", o.prior.hyper_rate, "Gamma prior rate on the same")->capture_default_str();
    if (with_phase_priors) {
        cmd->add_option("--kappa-prior-mean", o.phase_priors.kappa_prior_mean, "Exponential prior mean for switch days")
            ->capture_default_str();
        cmd->add_option("--eta-prior-mean", o.phase_priors.eta_prior_mean,
                        "Exponential prior mean for final-size ratios between phases")
            ->capture_default_str();
    }
}

ModelSpec make_model(const ModelOpts& o, EpidemicSeries series, int n_phases) {
    ModelSpec m;
    m.series = std::move(series);
    m.t_max = o.t_max;
    m.growth = growth_family_from_string(o.growth);
    m.bivariate = !o.univariate && n_phases == 1;
    m.n_phases = n_phases;
    m.fam_c = error_family_from_string(o.fam_c);
    m.fam_d = error_family_from_string(o.fam_d.empty() ? o.fam_c : o.fam_d);
    m.nu = o.nu;
    m.prior = o.prior;
    m.phase_priors = o.phase_priors;
    if (o.k_link == "phi") {
        m.k_link = KLinkMode::phi_link;
    } else if (o.k_link == "independent") {
        m.k_link = KLinkMode::independent;
    } else {
        throw_config("--k-link must be 'phi' or 'independent', got '" + o.k_link + "'");
    }
    m.allow_negative_mean = o.allow_negative_mean;
    return m;
}

struct SamplerOpts {
    SamplerConfig cfg;
    bool no_rhat_gate = false;
};

void add_sampler_opts(CLI::App* cmd, SamplerOpts& o) {
    cmd->add_option("--chains", o.cfg.n_chains, "Number of MCMC chains")->capture_default_str();
    cmd->add_option("--iters", o.cfg.n_iter, "Iterations per chain")->capture_default_str();
    cmd->add_option("--burn", o.cfg.burn_in, "Burn-in iterations (-1 = half of --iters)");
    cmd->add_option("--thin", o.cfg.thin, "Thinning interval")->capture_default_str();
    cmd->add_option("--seed", o.cfg.seed, "Random seed")->capture_default_str();
    cmd->add_option("--target-accept", o.cfg.target_accept, "Adaptation target acceptance rate")
        ->capture_default_str();
    cmd->add_option("--adapt-window", o.cfg.adapt_window, "Proposal adaptation batch size")->capture_default_str();
    cmd->add_option("--rhat-threshold", o.cfg.rhat_threshold, "Split-Rhat convergence threshold")
        ->capture_default_str();
    cmd->add_flag("--no-rhat-gate", o.no_rhat_gate, "Report diagnostics but do not fail on the Rhat threshold");
}

// ---------------------------------------------------------------------------
// Artifact writing shared by fit-like commands
// ---------------------------------------------------------------------------

/// Headline ordering for the bivariate summary; everything else follows in
/// sampling order.
SummaryTable reorder_summary(SummaryTable table) {
    static const char* preferred[] = {"K_c", "K_d", "r_c", "r_d", "a_c", "a_d", "phi", "tau_c", "tau_d",
                                      "peak_day_c", "peak_day_d", "lambda_c", "sigma_c", "lambda_d", "sigma_d"};
    std::vector<SummaryRow> rows;
    std::vector<bool> used(table.rows.size(), false);
    for (const char* name : preferred) {
        for (size_t i = 0; i < table.rows.size(); ++i) {
            if (!used[i] && table.rows[i].name == name) {
                rows.push_back(table.rows[i]);
                used[i] = true;
            }
        }
    }
    for (size_t i = 0; i < table.rows.size(); ++i) {
        if (!used[i]) rows.push_back(table.rows[i]);
    }
    table.rows = std::move(rows);
    return table;
}

void print_summary(const SummaryTable& table) {
    std::printf("%-12s %14s %14s %14s %14s\n", "parameter", "mean", "q2.5", "q50", "q97.5");
    for (const SummaryRow& row : table.rows) {
        std::printf("%-12s %14s", row.name.c_str(), fmt_g(row.mean).c_str());
        for (double q : row.quantiles) std::printf(" %14s", fmt_g(q).c_str());
        std::printf("\n");
    }
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw_config("cannot create output directory '" + dir + "': " + ec.message());
}

/// Fits, writes the full artifact set, prints a digest; returns 4 when the
/// convergence gate trips (artifacts are written regardless).
int run_fit_and_write(const ModelSpec& model, const SamplerOpts& so, const std::string& out_dir) {
    ensure_dir(out_dir);
    const PosteriorDraws draws = run_chains(model, so.cfg);
    const int t_max = draws.model.resolved_t_max();

    {
        std::ofstream f(out_dir + "/series.csv", std::ios::binary);
        if (!f) throw_data("cannot write " + out_dir + "/series.csv");
        write_series_csv(f, draws.model.series);
    }
    write_kv(out_dir + "/run_config.ini", settings_to_kv(draws.model, so.cfg));
    write_draws_csv(out_dir + "/draws.csv", draws);

    const SummaryTable summary = reorder_summary(summarize(draws));
    write_summary_csv(out_dir + "/summary.csv", summary);

    const std::vector<RhatResult> rhats = gelman_rubin(draws);
    write_rhat_csv(out_dir + "/rhat.csv", rhats);

    const WaicReport wr = waic(draws, draws.model.series, t_max);
    write_waic_csv(out_dir + "/waic.csv", wr);

    write_matrix_csv(out_dir + "/pred_cases.csv", insample_predicted_cases(draws), "day");

    write_manifest(out_dir + "/manifest.txt", out_dir,
                   {"series.csv", "run_config.ini", "draws.csv", "summary.csv", "rhat.csv", "waic.csv",
                    "pred_cases.csv"});

    std::printf("fit: %ld retained draws (%d chains), window 1..%d\n", draws.total_draws(), so.cfg.n_chains, t_max);
    print_summary(summary);
    double worst = 1.0;
    std::string worst_name = "-";
    for (const RhatResult& r : rhats) {
        if (r.sampled && !r.degenerate && r.rhat > worst) {
            worst = r.rhat;
            worst_name = r.name;
        }
    }
    std::printf("max split-Rhat: %s (%s)\n", fmt_g(worst).c_str(), worst_name.c_str());
    std::printf("WAIC: cases %s%s total %s\n", fmt_g(wr.cases.waic).c_str(),
                wr.has_deaths ? (" deaths " + fmt_g(wr.deaths.waic)).c_str() : "", fmt_g(wr.waic_total).c_str());
    std::printf("artifacts written to %s\n", out_dir.c_str());

    if (!so.no_rhat_gate && !converged(rhats, so.cfg.rhat_threshold)) {
        std::fprintf(stderr, "convergence gate: split-Rhat %s for '%s' exceeds %s\n", fmt_g(worst).c_str(),
                     worst_name.c_str(), fmt_g(so.cfg.rhat_threshold).c_str());
        return 4;
    }
    return 0;
}

/// Loads a previous fit: settings, series and draws.
PosteriorDraws load_fit_dir(const std::string& dir, SamplerConfig* cfg_out = nullptr) {
    ModelSpec model;
    SamplerConfig cfg;
    kv_to_settings(read_kv(dir + "/run_config.ini"), model, cfg);
    {
        std::ifstream f(dir + "/series.csv", std::ios::binary);
        if (!f) throw_data("cannot open " + dir + "/series.csv");
        model.series = read_series_csv(f);
    }
    if (cfg_out) *cfg_out = cfg;
    return read_draws_csv(dir + "/draws.csv", model);
}

// ---------------------------------------------------------------------------
// Serial-interval options for the reproduction-ratio command
// ---------------------------------------------------------------------------

struct SiOpts {
    double mean = 3.5;
    double sd = 3.1;
    std::vector<double> quantile_spec;  // p1 v1 p2 v2
    std::string components_file;
    int max_lag = 16;
    bool no_same_day = false;
};

void add_si_opts(CLI::App* cmd, SiOpts& o) {
    cmd->add_option("--si-mean", o.mean, "Serial interval mean in days")->capture_default_str();
    cmd->add_option("--si-sd", o.sd, "Serial interval standard deviation in days")->capture_default_str();
    cmd->add_option("--si-quantiles", o.quantile_spec,
                    "Fit the serial interval to two quantiles: p1 v1 p2 v2 (overrides mean/sd)")
        ->expected(4);
    cmd->add_option("--si-components", o.components_file,
                    "CSV of per-study mean,sd rows; pooled into one gamma serial interval (overrides the rest)");
    cmd->add_option("--max-lag", o.max_lag, "Serial-interval support in days")->capture_default_str();
    cmd->add_flag("--no-same-day", o.no_same_day, "Drop the same-day transmission weight");
}

GammaSI resolve_si(const SiOpts& o) {
    if (!o.components_file.empty()) {
        std::ifstream f(o.components_file, std::ios::binary);
        if (!f) throw_data("cannot open '" + o.components_file + "'");
        std::vector<GammaSI> parts;
        std::string line;
        int lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.empty() || line == "\r") continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream row(line);
            double mean = 0.0, sd = 0.0;
            if (!(row >> mean >> sd)) {
                if (lineno == 1) continue;  // header line
                throw_data(o.components_file + ":" + std::to_string(lineno) + ": expected 'mean,sd'");
            }
            parts.push_back(si_from_mean_sd(mean, sd));
        }
        if (parts.empty()) throw_data(o.components_file + ": no serial-interval components");
        return pool_si(parts);
    }
    if (!o.quantile_spec.empty()) {
        return si_from_quantiles(o.quantile_spec[0], o.quantile_spec[1], o.quantile_spec[2], o.quantile_spec[3]);
    }
    return si_from_mean_sd(o.mean, o.sd);
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_ingest(const InputOpts& in, const std::string& out_file) {
    const EpidemicSeries series = load_series(in);
    std::ofstream f(out_file, std::ios::binary);
    if (!f) throw_data("cannot write '" + out_file + "'");
    write_series_csv(f, series);
    std::printf("ingest: %d days starting %s, %s cases, %s deaths -> %s\n", series.days(),
                series.origin.iso().c_str(), fmt_g(series.cum_cases[series.days() - 1]).c_str(),
                fmt_g(series.cum_deaths[series.days() - 1]).c_str(), out_file.c_str());
    return 0;
}

int cmd_fit(const InputOpts& in, const ModelOpts& mo, const SamplerOpts& so, int n_phases,
            const std::string& out_dir) {
    const ModelSpec model = make_model(mo, load_series(in), n_phases);
    return run_fit_and_write(model, so, out_dir);
}

int cmd_forecast(const std::string& fit_dir, const InputOpts& in, const ModelOpts& mo, const SamplerOpts& so,
                 int horizon, bool deterministic, std::uint64_t path_seed, const std::string& out_dir) {
    if (horizon < 1) throw_config("--f must be at least 1");
    ensure_dir(out_dir);

    PosteriorDraws draws;
    if (!fit_dir.empty()) {
        draws = load_fit_dir(fit_dir);
    } else {
        if (in.input.empty()) throw_config("forecast needs either --fit-dir or --input");
        const ModelSpec model = make_model(mo, load_series(in), 1);
        const int rc = run_fit_and_write(model, so, out_dir);
        if (rc != 0) return rc;
        draws = load_fit_dir(out_dir);
    }
    const int M = draws.model.resolved_t_max();

    ForecastOptions opts;
    opts.seed = path_seed;
    opts.deterministic = deterministic;
    const auto paths = predict_paths(draws, draws.model.series, M, horizon, opts);
    const ForecastFan fan = forecast_fan(paths, M, horizon);
    write_fan_csv(out_dir + "/fan.csv", fan, draws.model.series.origin);
    std::printf("forecast: %d days from day %d (%zu paths) -> %s/fan.csv\n", horizon, M, paths.size(),
                out_dir.c_str());
    return 0;
}

int cmd_crossval(const std::string& fit_dir, const InputOpts& in, const ModelOpts& mo_in, const SamplerOpts& so,
                 int train_end, int horizon, std::uint64_t path_seed, const std::string& out_dir) {
    if (horizon < 1) throw_config("--f must be at least 1");
    ensure_dir(out_dir);

    PosteriorDraws draws;
    if (!fit_dir.empty()) {
        draws = load_fit_dir(fit_dir);
    } else {
        if (in.input.empty()) throw_config("crossval needs either --fit-dir or --input");
        ModelOpts mo = mo_in;
        const EpidemicSeries series = load_series(in);
        const int M = train_end > 0 ? train_end : series.days() - horizon;
        if (M < 3) throw_config("training window too short for the requested horizon");
        mo.t_max = M;
        const ModelSpec model = make_model(mo, series, 1);
        const int rc = run_fit_and_write(model, so, out_dir);
        if (rc != 0) return rc;
        draws = load_fit_dir(out_dir);
    }
    const int M = draws.model.resolved_t_max();
    if (M + horizon > draws.model.series.days()) {
        throw_config("horizon runs past the observed series (" + std::to_string(M) + " + "
                     + std::to_string(horizon) + " > " + std::to_string(draws.model.series.days()) + ")");
    }

    ForecastOptions opts;
    opts.seed = path_seed;
    const auto paths = predict_paths(draws, draws.model.series, M, horizon, opts);
    const ForecastFan fan = forecast_fan(paths, M, horizon);
    write_fan_csv(out_dir + "/fan.csv", fan, draws.model.series.origin);
    const CrossValReport report = crossval(paths, draws.model.series, M, horizon);
    write_crossval_csv(out_dir + "/crossval.csv", report);

    auto show = [](const char* name, const CrossValOutcome& o) {
        std::printf("%s: actual avg %s, predicted avg %s [%s, %s], omega %s -> %s\n", name,
                    fmt_g(o.actual_avg).c_str(), fmt_g(o.pred_avg_mean).c_str(), fmt_g(o.pred_avg_lo).c_str(),
                    fmt_g(o.pred_avg_hi).c_str(), fmt_g(o.omega).c_str(), o.verdict.c_str());
    };
    std::printf("crossval: train 1..%d, test %d..%d\n", M, M + 1, M + horizon);
    show("cases", report.cases);
    if (report.has_deaths) show("deaths", report.deaths);
    return 0;
}

int cmd_rt(const std::string& fit_dir, const InputOpts& in, const SiOpts& si_opts, const std::string& out_dir) {
    ensure_dir(out_dir);
    Eigen::MatrixXd incidence;
    Date origin;
    if (!fit_dir.empty()) {
        const std::string pred = fit_dir + "/pred_cases.csv";
        if (!fs::exists(pred)) {
            throw_data("'" + pred + "' not found; the fit must be re-run to produce in-sample trajectories");
        }
        incidence = read_matrix_csv(pred);
        std::ifstream f(fit_dir + "/series.csv", std::ios::binary);
        if (!f) throw_data("cannot open " + fit_dir + "/series.csv");
        origin = read_series_csv(f).origin;
    } else {
        if (in.input.empty()) throw_config("rt needs either --fit-dir or --input");
        const EpidemicSeries series = load_series(in);
        origin = series.origin;
        incidence.resize(1, series.days());
        incidence.row(0) = series.cases.matrix().transpose();
    }

    const GammaSI si = resolve_si(si_opts);
    const Eigen::ArrayXd weights = discretize_si(si, si_opts.max_lag, !si_opts.no_same_day);
    const RtSeries rt = effective_r(incidence, weights);
    write_rt_csv(out_dir + "/rt.csv", rt, origin);

    int n_defined = 0, n_sig = 0;
    for (size_t i = 0; i < rt.day.size(); ++i) {
        n_defined += rt.defined[i];
        n_sig += rt.sig_above_1[i];
    }
    std::printf("rt: serial interval gamma(shape %s, rate %s), mean %s sd %s\n", fmt_g(si.shape).c_str(),
                fmt_g(si.rate).c_str(), fmt_g(si.mean()).c_str(), fmt_g(si.sd()).c_str());
    std::printf("rt: %zu days (%d defined), %d with the lower credible bound above 1 -> %s/rt.csv\n", rt.day.size(),
                n_defined, n_sig, out_dir.c_str());
    return 0;
}

struct SimOpts {
    std::vector<double> r{0.25};
    std::vector<double> k{2e5};
    std::vector<double> a{1.0};
    std::vector<double> kappa;
    std::string growth = "richards";
    std::string family = "pg";
    double lambda = 10.0;
    double sigma_eps = 0.3;
    double nu = 4.0;
    int t = 120;
    double c1 = 1.0;
    bool with_deaths = false;
    double death_r = 0.1;
    double death_k = 2e4;
    double death_a = 1.0;
    std::string family_deaths;
    double d1 = 1.0;
    std::string origin = "2020-01-01";
    std::uint64_t seed = 1;
    bool deterministic = false;
};

ErrorSpec make_error_spec(const std::string& family, double lambda, double sigma_eps, double nu) {
    ErrorSpec e;
    e.family = error_family_from_string(family);
    e.lambda = lambda;
    e.sigma_eps = sigma_eps;
    e.nu = nu;
    return e;
}

int cmd_simulate(const SimOpts& o, const std::string& out_dir) {
    ensure_dir(out_dir);
    SimSpec spec;
    const size_t n_phases = o.r.size();
    if (o.k.size() != n_phases || o.a.size() != n_phases) {
        throw_config("--r, --k and --a must list one value per phase");
    }
    if (o.kappa.size() + 1 != n_phases) {
        throw_config("--kappa must list one switch day per phase boundary (phases - 1 values)");
    }
    const GrowthFamily growth = growth_family_from_string(o.growth);
    for (size_t p = 0; p < n_phases; ++p) {
        spec.cases.phases.push_back(GrowthParams{growth, o.r[p], o.k[p], o.a[p]});
    }
    spec.cases.kappa = o.kappa;
    spec.err_c = make_error_spec(o.family, o.lambda, o.sigma_eps, o.nu);
    spec.t_max = o.t;
    spec.c1 = o.c1;
    spec.with_deaths = o.with_deaths;
    if (o.with_deaths) {
        spec.death = GrowthParams{growth, o.death_r, o.death_k, o.death_a};
        spec.err_d = make_error_spec(o.family_deaths.empty() ? o.family : o.family_deaths, o.lambda, o.sigma_eps, o.nu);
        spec.d1 = o.d1;
    }
    spec.origin = parse_date(o.origin);
    spec.seed = o.seed;
    spec.deterministic = o.deterministic;

    const SimOutput sim = simulate_epidemic(spec);
    {
        std::ofstream f(out_dir + "/series.csv", std::ios::binary);
        if (!f) throw_data("cannot write " + out_dir + "/series.csv");
        write_series_csv(f, sim.series);
    }
    KvFile truth;
    truth.set("sim.growth", o.growth);
    truth.set("sim.n_phases", std::to_string(n_phases));
    for (size_t p = 0; p < n_phases; ++p) {
        const std::string sfx = "_" + std::to_string(p + 1);
        truth.set("sim.r" + sfx, fmt_full(o.r[p]));
        truth.set("sim.k" + sfx, fmt_full(o.k[p]));
        truth.set("sim.a" + sfx, fmt_full(o.a[p]));
    }
    for (size_t b = 0; b < o.kappa.size(); ++b) {
        truth.set("sim.kappa_" + std::to_string(b + 2), fmt_full(o.kappa[b]));
    }
    truth.set("sim.family", o.family);
    truth.set("sim.lambda", fmt_full(o.lambda));
    truth.set("sim.sigma_eps", fmt_full(o.sigma_eps));
    truth.set("sim.nu", fmt_full(o.nu));
    truth.set("sim.t", std::to_string(o.t));
    truth.set("sim.c1", fmt_full(o.c1));
    truth.set("sim.with_deaths", o.with_deaths ? "1" : "0");
    if (o.with_deaths) {
        truth.set("sim.death_r", fmt_full(o.death_r));
        truth.set("sim.death_k", fmt_full(o.death_k));
        truth.set("sim.death_a", fmt_full(o.death_a));
        truth.set("sim.family_deaths", o.family_deaths.empty() ? o.family : o.family_deaths);
        truth.set("sim.d1", fmt_full(o.d1));
    }
    truth.set("sim.origin", o.origin);
    truth.set("sim.seed", std::to_string(o.seed));
    truth.set("sim.deterministic", o.deterministic ? "1" : "0");
    write_kv(out_dir + "/truth.ini", truth);
    write_manifest(out_dir + "/manifest.txt", out_dir, {"series.csv", "truth.ini"});

    std::printf("simulate: %d days, final totals %s cases / %s deaths -> %s\n", sim.series.days(),
                fmt_g(sim.series.cum_cases[sim.series.days() - 1]).c_str(),
                fmt_g(sim.series.cum_deaths[sim.series.days() - 1]).c_str(), out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Daily epidemic-count model fitting, forecasting and reproduction-ratio estimation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI/TOML file");

    InputOpts in;
    ModelOpts mo;
    SamplerOpts so;
    SiOpts si;
    SimOpts sim;
    std::string out_dir;
    std::string out_file;
    std::string fit_dir;
    int horizon = 14;
    int train_end = 0;
    int n_phases = 2;
    bool deterministic = false;
    std::uint64_t path_seed = 20200808ULL;

    auto* c_ingest = app.add_subcommand("ingest", "Normalize a raw daily-count export into the canonical series form");
    add_input_opts(c_ingest, in);
    c_ingest->add_option("-o,--out", out_file, "Output series CSV path")->required();

    auto* c_fit = app.add_subcommand("fit", "Fit the bivariate (or cases-only) growth model by MCMC");
    add_input_opts(c_fit, in);
    add_model_opts(c_fit, mo);
    add_sampler_opts(c_fit, so);
    c_fit->add_option("-o,--out", out_dir, "Output directory for run artifacts")->required();

    auto* c_multi = app.add_subcommand("multiphase", "Cases-only switch-point fit with 2 or 3 growth phases");
    add_input_opts(c_multi, in);
    add_model_opts(c_multi, mo, /*with_phase_priors=*/true);
    add_sampler_opts(c_multi, so);
    c_multi->add_option("--phases", n_phases, "Number of growth phases (2 or 3)")->capture_default_str();
    c_multi->add_option("-o,--out", out_dir, "Output directory for run artifacts")->required();

    auto* c_fc = app.add_subcommand("forecast", "Posterior-predictive forecast fan from a fit");
    add_input_opts(c_fc, in, /*required=*/false);
    add_model_opts(c_fc, mo);
    add_sampler_opts(c_fc, so);
    c_fc->add_option("--fit-dir", fit_dir, "Reuse a previous fit's run directory instead of fitting");
    c_fc->add_option("-f,--f", horizon, "Forecast horizon in days")->capture_default_str();
    c_fc->add_flag("--deterministic", deterministic, "Propagate rounded means instead of sampling");
    c_fc->add_option("--path-seed", path_seed, "Seed for the forecast path noise")->capture_default_str();
    c_fc->add_option("-o,--out", out_dir, "Output directory")->required();

    auto* c_cv = app.add_subcommand("crossval", "Hold out the last days and score the forecast against them");
    add_input_opts(c_cv, in, /*required=*/false);
    add_model_opts(c_cv, mo);
    add_sampler_opts(c_cv, so);
    c_cv->add_option("--fit-dir", fit_dir, "Reuse a previous fit (its window end becomes the training end)");
    c_cv->add_option("-m,--m", train_end, "Training window end (default: series length minus horizon)");
    c_cv->add_option("-f,--f", horizon, "Held-out horizon in days")->capture_default_str();
    c_cv->add_option("--path-seed", path_seed, "Seed for the forecast path noise")->capture_default_str();
    c_cv->add_option("-o,--out", out_dir, "Output directory")->required();

    auto* c_rt = app.add_subcommand("rt", "Effective reproduction ratios from incidence and a serial interval");
    add_input_opts(c_rt, in, /*required=*/false);
    c_rt->add_option("--fit-dir", fit_dir, "Use a fit's in-sample predicted-case trajectories");
    add_si_opts(c_rt, si);
    c_rt->add_option("-o,--out", out_dir, "Output directory")->required();

    auto* c_sim = app.add_subcommand("simulate", "Generate synthetic daily counts from the generative model");
    c_sim->add_option("--r", sim.r, "Growth rate per phase")->delimiter(',')->capture_default_str();
    c_sim->add_option("--k", sim.k, "Final size per phase")->delimiter(',')->capture_default_str();
    c_sim->add_option("--a", sim.a, "Shape exponent per phase")->delimiter(',')->capture_default_str();
    c_sim->add_option("--kappa", sim.kappa, "Switch days between phases")->delimiter(',');
    c_sim->add_option("--growth", sim.growth, "Growth law")->capture_default_str();
    c_sim->add_option("--family", sim.family, "Error family: pg, pln or pls")->capture_default_str();
    c_sim->add_option("--lambda", sim.lambda, "pg effect precision")->capture_default_str();
    c_sim->add_option("--sigma-eps", sim.sigma_eps, "pln/pls log-effect scale")->capture_default_str();
    c_sim->add_option("--nu", sim.nu, "pls degrees of freedom")->capture_default_str();
    c_sim->add_option("--t", sim.t, "Number of days")->capture_default_str();
    c_sim->add_option("--c1", sim.c1, "Cases on day 1")->capture_default_str();
    c_sim->add_flag("--deaths", sim.with_deaths, "Also simulate a death series");
    c_sim->add_option("--death-r", sim.death_r, "Death growth rate")->capture_default_str();
    c_sim->add_option("--death-k", sim.death_k, "Death final size")->capture_default_str();
    c_sim->add_option("--death-a", sim.death_a, "Death shape exponent")->capture_default_str();
    c_sim->add_option("--family-deaths", sim.family_deaths, "Death error family (defaults to --family)");
    c_sim->add_option("--d1", sim.d1, "Deaths on day 1")->capture_default_str();
    c_sim->add_option("--origin", sim.origin, "Calendar date of day 1")->capture_default_str();
    c_sim->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    c_sim->add_flag("--deterministic", sim.deterministic, "Round the means instead of drawing counts");
    c_sim->add_option("-o,--out", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*c_ingest) return cmd_ingest(in, out_file);
        if (*c_fit) return cmd_fit(in, mo, so, 1, out_dir);
        if (*c_multi) {
            mo.univariate = true;
            return cmd_fit(in, mo, so, n_phases, out_dir);
        }
        if (*c_fc) return cmd_forecast(fit_dir, in, mo, so, horizon, deterministic, path_seed, out_dir);
        if (*c_cv) return cmd_crossval(fit_dir, in, mo, so, train_end, horizon, path_seed, out_dir);
        if (*c_rt) return cmd_rt(fit_dir, in, si, out_dir);
        if (*c_sim) return cmd_simulate(sim, out_dir);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
    return 0;
}
