#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "epifit/mcmc.hpp"
#include "epifit/series.hpp"

namespace epifit {

struct ForecastOptions {
    std::uint64_t seed = 20200808;
    bool deterministic = false;  ///< pin effects at 1 and counts at rounded means
};

/// One posterior-predictive trajectory over the forecast horizon.
struct ForecastPath {
    int draw_id = 0;
    Eigen::ArrayXd new_cases;
    Eigen::ArrayXd new_deaths;
    Eigen::ArrayXd cum_cases;
    Eigen::ArrayXd cum_deaths;
};

/// Rolls the fitted one-step recursion forward from the observed totals at the
/// training end M, one path per retained draw: sample a daily effect, draw the
/// count, accumulate. Each path uses an independent substream of opts.seed
/// keyed by its draw id, so results do not depend on evaluation order.
std::vector<ForecastPath> predict_paths(const PosteriorDraws& draws, const EpidemicSeries& series, int M, int F,
                                        const ForecastOptions& opts = {});

/// Per-horizon-day quantiles and means across paths.
struct ForecastFan {
    int M = 0;
    int F = 0;
    bool has_deaths = false;
    std::vector<double> probs;
    Eigen::MatrixXd new_cases_q, cum_cases_q, new_deaths_q, cum_deaths_q;  // F x probs
    Eigen::ArrayXd new_cases_mean, cum_cases_mean, new_deaths_mean, cum_deaths_mean;
};

ForecastFan forecast_fan(const std::vector<ForecastPath>& paths, int M, int F,
                         std::vector<double> probs = {0.025, 0.25, 0.5, 0.75, 0.975});

/// Held-out comparison of forecast paths against the observed horizon.
struct CrossValOutcome {
    double actual_avg = 0.0;     ///< observed mean daily count over the horizon
    double pred_avg_mean = 0.0;  ///< posterior mean of the per-path horizon averages
    double pred_avg_lo = 0.0;    ///< 2.5% quantile of per-path averages
    double pred_avg_hi = 0.0;    ///< 97.5% quantile
    double omega = 0.0;          ///< share of paths whose average exceeds the actual
    bool covered = false;        ///< actual average inside [lo, hi]
    std::string verdict;         ///< "satisfactory", "overprediction" or "underprediction"
};

struct CrossValReport {
    int M = 0;
    int F = 0;
    bool has_deaths = false;
    CrossValOutcome cases;
    CrossValOutcome deaths;
};

/// omega <= 0.05 flags systematic underprediction, >= 0.95 overprediction;
/// anything between is satisfactory.
CrossValReport crossval(const std::vector<ForecastPath>& paths, const EpidemicSeries& observed, int M, int F);

}  // namespace epifit
