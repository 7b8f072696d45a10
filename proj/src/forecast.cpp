#include "epifit/forecast.hpp"

#include <algorithm>
#include <cmath>

namespace epifit {

std::vector<ForecastPath> predict_paths(const PosteriorDraws& draws, const EpidemicSeries& series, int M, int F,
                                        const ForecastOptions& opts) {
    if (F < 1) throw_config("forecast horizon must be at least 1 day");
    if (M != draws.model.resolved_t_max()) {
        throw_config("forecast must start at the fitted window end (M = "
                     + std::to_string(draws.model.resolved_t_max()) + ")");
    }
    if (series.days() < M) throw_data("series is shorter than the training window");
    const long S = draws.total_draws();
    if (S == 0) throw_data("no retained draws to forecast from");

    std::vector<ForecastPath> paths;
    paths.reserve(static_cast<size_t>(S));
    const double c_base = series.cum_cases[M - 1];
    const double d_base = series.cum_deaths[M - 1];

    long s = 0;
    for (size_t ch = 0; ch < draws.chains.size(); ++ch) {
        const ChainDraws& chain = draws.chains[ch];
        for (Eigen::Index k = 0; k < chain.scalars.rows(); ++k, ++s) {
            const DrawParams P = draw_params(draws, static_cast<int>(ch), static_cast<int>(k));
            Rng rng(mix_seed(opts.seed, static_cast<std::uint64_t>(s)));
            ForecastPath path;
            path.draw_id = static_cast<int>(s);
            path.new_cases.resize(F);
            path.cum_cases.resize(F);
            if (P.has_death) {
                path.new_deaths.resize(F);
                path.cum_deaths.resize(F);
            }
            double C = c_base;
            double D = d_base;
            for (int h = 1; h <= F; ++h) {
                const double t = static_cast<double>(M + h);
                double yc = 0.0;
                const double mu_c = C > 0.0 ? multiphase_mean_raw(P.cases, C, t) : 0.0;
                if (mu_c > 0.0 && std::isfinite(mu_c)) {
                    if (opts.deterministic) {
                        yc = std::round(mu_c);
                    } else {
                        const double eps = draw_effect(P.err_c, rng);
                        yc = static_cast<double>(draw_poisson(rng, mu_c * eps));
                    }
                }
                C += yc;
                double yd = 0.0;
                if (P.has_death) {
                    const double mu_d = D > 0.0 ? mean_incidence_raw(P.death, D) : 0.0;
                    if (mu_d > 0.0 && std::isfinite(mu_d)) {
                        if (opts.deterministic) {
                            yd = std::round(mu_d);
                        } else {
                            const double eps = draw_effect(P.err_d, rng);
                            yd = static_cast<double>(draw_poisson(rng, mu_d * eps));
                        }
                    }
                }
                D += yd;
                path.new_cases[h - 1] = yc;
                path.cum_cases[h - 1] = C;
                if (P.has_death) {
                    path.new_deaths[h - 1] = yd;
                    path.cum_deaths[h - 1] = D;
                }
            }
            paths.push_back(std::move(path));
        }
    }
    return paths;
}

namespace {

void fill_fan(const std::vector<ForecastPath>& paths, const std::vector<double>& probs, int F,
              Eigen::ArrayXd ForecastPath::*member, Eigen::MatrixXd& q_out, Eigen::ArrayXd& mean_out) {
    const auto S = static_cast<Eigen::Index>(paths.size());
    q_out.resize(F, static_cast<Eigen::Index>(probs.size()));
    mean_out.resize(F);
    Eigen::ArrayXd day(S);
    for (int h = 0; h < F; ++h) {
        for (Eigen::Index s = 0; s < S; ++s) day[s] = (paths[static_cast<size_t>(s)].*member)[h];
        mean_out[h] = day.mean();
        std::sort(day.data(), day.data() + day.size());
        for (size_t p = 0; p < probs.size(); ++p) {
            q_out(h, static_cast<Eigen::Index>(p)) = quantile_sorted(day, probs[p]);
        }
    }
}

}  // namespace

ForecastFan forecast_fan(const std::vector<ForecastPath>& paths, int M, int F, std::vector<double> probs) {
    if (paths.empty()) throw_data("no forecast paths");
    if (paths.front().new_cases.size() != F) throw_data("forecast paths do not match the stated horizon");
    ForecastFan fan;
    fan.M = M;
    fan.F = F;
    fan.probs = std::move(probs);
    fan.has_deaths = paths.front().new_deaths.size() == F;
    fill_fan(paths, fan.probs, F, &ForecastPath::new_cases, fan.new_cases_q, fan.new_cases_mean);
    fill_fan(paths, fan.probs, F, &ForecastPath::cum_cases, fan.cum_cases_q, fan.cum_cases_mean);
    if (fan.has_deaths) {
        fill_fan(paths, fan.probs, F, &ForecastPath::new_deaths, fan.new_deaths_q, fan.new_deaths_mean);
        fill_fan(paths, fan.probs, F, &ForecastPath::cum_deaths, fan.cum_deaths_q, fan.cum_deaths_mean);
    }
    return fan;
}

namespace {

CrossValOutcome crossval_outcome(const std::vector<ForecastPath>& paths, const Eigen::ArrayXd& observed_new,
                                 int M, int F, Eigen::ArrayXd ForecastPath::*member) {
    CrossValOutcome out;
    out.actual_avg = observed_new.segment(M, F).mean();
    Eigen::ArrayXd avgs(static_cast<Eigen::Index>(paths.size()));
    long n_over = 0;
    for (size_t s = 0; s < paths.size(); ++s) {
        avgs[static_cast<Eigen::Index>(s)] = (paths[s].*member).mean();
        if (avgs[static_cast<Eigen::Index>(s)] > out.actual_avg) ++n_over;
    }
    out.pred_avg_mean = avgs.mean();
    out.omega = static_cast<double>(n_over) / static_cast<double>(paths.size());
    std::sort(avgs.data(), avgs.data() + avgs.size());
    out.pred_avg_lo = quantile_sorted(avgs, 0.025);
    out.pred_avg_hi = quantile_sorted(avgs, 0.975);
    out.covered = out.actual_avg >= out.pred_avg_lo && out.actual_avg <= out.pred_avg_hi;
    out.verdict = out.omega >= 0.95 ? "overprediction" : out.omega <= 0.05 ? "underprediction" : "satisfactory";
    return out;
}

}  // namespace

CrossValReport crossval(const std::vector<ForecastPath>& paths, const EpidemicSeries& observed, int M, int F) {
    if (paths.empty()) throw_data("no forecast paths to evaluate");
    if (observed.days() < M + F) {
        throw_data("held-out comparison needs observations through day " + std::to_string(M + F));
    }
    if (paths.front().new_cases.size() != F) throw_data("forecast paths do not match the stated horizon");
    CrossValReport rep;
    rep.M = M;
    rep.F = F;
    rep.cases = crossval_outcome(paths, observed.cases, M, F, &ForecastPath::new_cases);
    rep.has_deaths = paths.front().new_deaths.size() == F;
    if (rep.has_deaths) {
        rep.deaths = crossval_outcome(paths, observed.deaths, M, F, &ForecastPath::new_deaths);
    }
    return rep;
}

}  // namespace epifit
