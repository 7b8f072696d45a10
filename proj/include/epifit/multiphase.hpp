#pragma once

#include <cmath>
#include <vector>

#include "epifit/error.hpp"
#include "epifit/growth.hpp"

namespace epifit {

/// Prior means for the switch-point extension.
struct PhasePriors {
    double kappa_prior_mean = 150.0;  ///< exponential prior mean for switch days
    double eta_prior_mean = 1.0;      ///< exponential prior mean for final-size ratios K_{p+1}/K_p
};

/// Piecewise growth regime: phase p governs days t with kappa_{p-1} <= t < kappa_p
/// (kappa_0 = -inf, kappa_P = +inf). `phases` holds fully resolved parameters,
/// including each phase's final size; `kappa` has one switch day per boundary
/// and must be strictly increasing.
struct MultiphaseParams {
    std::vector<GrowthParams> phases;
    std::vector<double> kappa;

    int n_phases() const { return static_cast<int>(phases.size()); }

    void validate() const {
        if (phases.empty()) throw_config("multiphase: need at least one phase");
        if (kappa.size() + 1 != phases.size()) throw_config("multiphase: need one switch day per phase boundary");
        for (const GrowthParams& p : phases) p.validate();
        for (size_t i = 0; i < kappa.size(); ++i) {
            if (!(kappa[i] > 0.0)) throw_config("multiphase: switch days must be positive");
            if (i > 0 && !(kappa[i] > kappa[i - 1])) throw_config("multiphase: switch days must be increasing");
        }
    }

    /// Index of the phase governing day t.
    int active_phase(double t) const {
        int p = 0;
        while (p < static_cast<int>(kappa.size()) && t >= kappa[p]) ++p;
        return p;
    }
};

/// Unchecked piecewise increment for hot loops; nonpositive results signal a
/// zero-likelihood state to the caller.
inline double multiphase_mean_raw(const MultiphaseParams& mp, double cum_prev, double t) noexcept {
    return mean_incidence_raw(mp.phases[static_cast<size_t>(mp.active_phase(t))], cum_prev);
}

/// Expected daily increment at day t under the active phase's growth law.
/// A previous total at or above the active final size is a support violation.
inline double multiphase_mean(const MultiphaseParams& mp, double cum_prev, double t) {
    mp.validate();
    if (!(cum_prev > 0.0)) throw_domain("multiphase_mean: previous cumulative total must be positive");
    const GrowthParams& ph = mp.phases[static_cast<size_t>(mp.active_phase(t))];
    if (ph.family != GrowthFamily::rosenzweig && cum_prev >= ph.K) {
        throw_support("multiphase_mean: cumulative total meets or exceeds the active phase final size");
    }
    double v = mean_incidence_raw(ph, cum_prev);
    if (v < 0.0 && v > -1e-12 * ph.r * ph.K) v = 0.0;
    return v;
}

}  // namespace epifit
