#pragma once

#include <algorithm>
#include <cmath>

#include "epifit/stats.hpp"

namespace epifit::detail {

/// Per-site random-walk proposal scale with batched adaptation toward a target
/// acceptance rate. The step size shrinks as 1/sqrt(batch), and `frozen`
/// (set at the end of burn-in) pins the scale for good.
struct AdaptScale {
    double log_scale = std::log(0.5);
    long accept_count = 0;
    long batch = 0;
    bool frozen = false;
    bool adapt = true;  ///< false for sites with a fixed, hand-chosen scale

    double scale() const { return std::exp(log_scale); }

    void record(bool accepted) {
        if (accepted) ++accept_count;
    }

    void end_batch(int window, double target_accept) {
        if (frozen || !adapt) {
            accept_count = 0;
            return;
        }
        ++batch;
        const double rate = static_cast<double>(accept_count) / static_cast<double>(window);
        const double delta = std::min(0.1, 1.0 / std::sqrt(static_cast<double>(batch)));
        log_scale += rate > target_accept ? delta : -delta;
        log_scale = std::clamp(log_scale, std::log(1e-6), std::log(1e3));
        accept_count = 0;
    }
};

/// One symmetric random-walk Metropolis step on a scalar coordinate.
/// `log_target` evaluates the (unnormalized) log target at a proposed
/// coordinate; `cur_log_target` caches its value at `coord` and is updated on
/// acceptance. Returns whether the proposal was accepted.
template <typename LogTargetFn>
bool rwm_step(double& coord, double& cur_log_target, double scale, LogTargetFn&& log_target, Rng& rng) {
    const double prop = coord + scale * draw_normal(rng, 0.0, 1.0);
    const double lp = log_target(prop);
    if (std::log(draw_uniform(rng)) < lp - cur_log_target) {
        coord = prop;
        cur_log_target = lp;
        return true;
    }
    return false;
}

}  // namespace epifit::detail
