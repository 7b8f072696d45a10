#pragma once

#include <cstdint>

#include "epifit/errmodel.hpp"
#include "epifit/multiphase.hpp"
#include "epifit/series.hpp"

namespace epifit {

// Synthetic data generator that mirrors the observation model used by the
// sampler: day-ahead means from the growth curve evaluated at the running
// cumulative, a multiplicative error effect, then a Poisson count.
struct SimSpec {
    MultiphaseParams cases;
    ErrorSpec err_c = ErrorSpec::pg(10.0);
    int t_max = 120;
    double c1 = 1.0;  // cases on day 1 (seeds the recursion)

    bool with_deaths = false;
    GrowthParams death{GrowthFamily::richards, 0.1, 1000.0, 1.0};
    ErrorSpec err_d = ErrorSpec::pg(10.0);
    double d1 = 0.0;  // deaths on day 1; the death recursion starts once cumulative deaths > 0

    Date origin{2020, 1, 1};
    std::uint64_t seed = 1;
    bool deterministic = false;  // round the means instead of drawing

    void validate() const;
};

struct SimOutput {
    EpidemicSeries series;
    Eigen::ArrayXd mu_cases;   // conditional means actually used, day 2..T at [t-1]; [0] = 0
    Eigen::ArrayXd mu_deaths;  // same layout; all zero when deaths are disabled
};

SimOutput simulate_epidemic(const SimSpec& spec);

}  // namespace epifit
