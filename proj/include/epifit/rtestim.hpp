#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "epifit/error.hpp"
#include "epifit/stats.hpp"

namespace epifit {

/// Gamma serial-interval distribution (rate parameterization).
struct GammaSI {
    double shape = 1.0;
    double rate = 1.0;

    double mean() const { return shape / rate; }
    double sd() const { return std::sqrt(shape) / rate; }
};

/// Moment matching: shape = (mean/sd)^2, rate = mean/sd^2.
GammaSI si_from_mean_sd(double mean, double sd);

/// Solves for the gamma with the two given quantiles: F(v1) = p1, F(v2) = p2.
/// Requires 0 < p1 < p2 < 1 and 0 < v1 < v2; both quantiles are matched to
/// within 1e-8 days.
GammaSI si_from_quantiles(double p1, double v1, double p2, double v2);

/// Pools several serial-interval estimates by sampling n_per draws from each
/// and moment-matching a single gamma to the combined sample.
GammaSI pool_si(const std::vector<GammaSI>& components, long n_per = 1000000, std::uint64_t seed = 1);

/// Daily transmission weights rho_0..rho_J from the continuous distribution:
/// rho_0 = F(0.5), rho_j = F(j + 0.5) - F(j - 0.5), renormalized to sum to 1.
/// With include_same_day = false, rho_0 is dropped (set to zero) and the
/// remaining weights are renormalized instead.
Eigen::ArrayXd discretize_si(const GammaSI& si, int max_lag = 16, bool include_same_day = true);

/// Effective reproduction ratios computed per incidence trajectory and day:
/// R_t = I_t / sum_j rho_j I_{t-j}. Days before the weights fit, or where a
/// trajectory's denominator vanishes, are undefined for that trajectory.
struct RtSeries {
    std::vector<int> day;          ///< day index t, from max_lag + 1 to the last day
    Eigen::ArrayXd mean;           ///< across trajectories (NaN where no trajectory is defined)
    Eigen::ArrayXd lo;             ///< 2.5% quantile
    Eigen::ArrayXd hi;             ///< 97.5% quantile
    Eigen::ArrayXd ma5;            ///< centered 5-day moving average of `mean`
    std::vector<char> defined;     ///< 1 where at least one trajectory gave a value
    std::vector<char> sig_above_1; ///< 1 where the lower quantile exceeds 1
};

/// `incidence` holds one trajectory per row (column t-1 = day t); pass a
/// single-row matrix for a point trajectory. `weights` are the discretized
/// serial-interval weights rho_0..rho_J.
RtSeries effective_r(const Eigen::MatrixXd& incidence, const Eigen::ArrayXd& weights);

}  // namespace epifit
