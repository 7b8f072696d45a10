#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "epifit/errmodel.hpp"
#include "epifit/error.hpp"
#include "epifit/growth.hpp"
#include "epifit/multiphase.hpp"
#include "epifit/prior.hpp"
#include "epifit/series.hpp"

namespace epifit {

struct SamplerConfig {
    int n_chains = 2;
    long n_iter = 100000;
    long burn_in = -1;  ///< -1 resolves to n_iter / 2
    int thin = 10;
    double target_accept = 0.44;
    int adapt_window = 50;
    double rhat_threshold = 1.05;
    std::uint64_t seed = 20200808;

    long resolved_burn_in() const { return burn_in < 0 ? n_iter / 2 : burn_in; }
    long retained_per_chain() const { return (n_iter - 1 - resolved_burn_in()) / thin + 1; }

    void validate() const {
        if (n_chains < 1) throw_config("need at least one chain");
        if (n_iter < 1) throw_config("iteration count must be positive");
        if (thin < 1) throw_config("thinning interval must be positive");
        const long b = resolved_burn_in();
        if (b < 0 || b >= n_iter) throw_config("burn-in must lie in [0, n_iter)");
        if (adapt_window < 1) throw_config("adaptation window must be positive");
        if (!(target_accept > 0.0) || !(target_accept < 1.0)) throw_config("target acceptance must lie in (0, 1)");
        if (retained_per_chain() < 2) throw_config("fewer than 2 retained draws per chain; lower burn-in or thinning");
    }
};

/// How the death-side final size is tied to the case side: through the
/// sampled fatality ratio (K_d = phi * K_c) or as a free parameter with its
/// own lognormal prior (phi then reported as the derived ratio K_d / K_c).
enum class KLinkMode { phi_link, independent };

/// Everything that defines one fit: data window, growth law, phase count,
/// error families and priors.
struct ModelSpec {
    EpidemicSeries series;
    int t_max = 0;  ///< training window end (day index); 0 means the full series
    GrowthFamily growth = GrowthFamily::richards;
    bool bivariate = true;
    int n_phases = 1;
    ErrorFamily fam_c = ErrorFamily::pg;
    ErrorFamily fam_d = ErrorFamily::pg;
    double nu = 4.0;  ///< pls degrees of freedom (fixed, not sampled)
    PriorConfig prior;
    PhasePriors phase_priors;
    KLinkMode k_link = KLinkMode::phi_link;
    bool allow_negative_mean = false;  ///< required to fit the rosenzweig form

    int resolved_t_max() const { return t_max > 0 ? t_max : series.days(); }

    void validate() const {
        prior.validate();
        if (series.days() < 3) throw_config("series too short to fit");
        const int tm = resolved_t_max();
        if (tm < 3 || tm > series.days()) throw_config("training window end out of range");
        if (n_phases < 1 || n_phases > 3) throw_config("phase count must be 1, 2 or 3");
        if (n_phases > 1 && bivariate) throw_config("switch-point fits are cases-only; disable the death side");
        if (growth == GrowthFamily::rosenzweig && !allow_negative_mean) {
            throw_config("the rosenzweig increment is negative below K; pass the explicit opt-in flag to fit it");
        }
        if (!(nu > 0.0)) throw_config("pls degrees of freedom must be positive");
    }
};

/// Retained draws for one chain. Scalar columns are on the natural scale and
/// include derived quantities after the sampled ones.
struct ChainDraws {
    Eigen::MatrixXd scalars;
    Eigen::MatrixXd eps_cases;   ///< daily effects, aligned with case likelihood days
    Eigen::MatrixXd eps_deaths;  ///< likewise for deaths (0 columns when absent)
    Eigen::ArrayXd log_target;   ///< joint log posterior in the sampling parameterization
    std::vector<long> iterations;

    Eigen::ArrayXd accept_rate;       ///< per scalar site, measured after burn-in
    Eigen::ArrayXd scales_at_freeze;  ///< proposal scales when adaptation stopped
    Eigen::ArrayXd scales_at_end;     ///< must equal scales_at_freeze
};

struct PosteriorDraws {
    ModelSpec model;
    std::vector<std::string> names;  ///< scalar column names, sampled first
    int n_sampled = 0;
    int first_case_day = 2;   ///< earliest day with a case likelihood term
    int first_death_day = 0;  ///< earliest day with a death likelihood term; 0 if none
    std::vector<ChainDraws> chains;

    int n_cols() const { return static_cast<int>(names.size()); }
    long total_draws() const {
        long n = 0;
        for (const ChainDraws& c : chains) n += c.scalars.rows();
        return n;
    }
    int col(const std::string& name) const {
        for (size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) return static_cast<int>(i);
        }
        return -1;
    }
    /// All chains' draws of one column, in chain order.
    Eigen::ArrayXd pooled(int column) const {
        Eigen::ArrayXd out(total_draws());
        long at = 0;
        for (const ChainDraws& c : chains) {
            out.segment(at, c.scalars.rows()) = c.scalars.col(column).array();
            at += c.scalars.rows();
        }
        return out;
    }
};

/// Adaptive Metropolis-within-Gibbs fit. Deterministic for a given
/// (model, config) pair: chains use independent substreams of config.seed.
PosteriorDraws run_chains(const ModelSpec& model, const SamplerConfig& cfg);

/// Cases-only switch-point fit (2 or 3 phases).
inline PosteriorDraws fit_multiphase(const EpidemicSeries& series, int n_phases, GrowthFamily growth,
                                     ErrorFamily family, const PriorConfig& prior, const PhasePriors& phase_priors,
                                     const SamplerConfig& cfg, int t_max = 0) {
    ModelSpec model;
    model.series = series;
    model.t_max = t_max;
    model.growth = growth;
    model.bivariate = false;
    model.n_phases = n_phases;
    model.fam_c = family;
    model.prior = prior;
    model.phase_priors = phase_priors;
    return run_chains(model, cfg);
}

// ---------------------------------------------------------------------------
// Diagnostics and summaries
// ---------------------------------------------------------------------------

struct RhatResult {
    std::string name;
    double rhat = 1.0;
    bool degenerate = false;  ///< within-chain variance was (numerically) zero
    bool sampled = true;      ///< false for derived columns
};

/// Split potential-scale-reduction factors, one per scalar column. Needs at
/// least 2 chains with at least 10 retained draws each.
std::vector<RhatResult> gelman_rubin(const PosteriorDraws& draws);

/// True when every sampled, non-degenerate column satisfies rhat < threshold.
bool converged(const std::vector<RhatResult>& rhats, double threshold);

struct WaicOutcome {
    double lppd = 0.0;
    double p_waic = 0.0;
    double waic = 0.0;
};

struct WaicReport {
    WaicOutcome cases;
    WaicOutcome deaths;
    double waic_total = 0.0;
    bool has_deaths = false;
};

/// Widely-applicable information criterion, conditional on the daily effects:
/// per-day Poisson log predictive densities averaged over retained draws.
WaicReport waic(const PosteriorDraws& draws, const EpidemicSeries& series, int t_max);

struct SummaryRow {
    std::string name;
    double mean = 0.0;
    std::vector<double> quantiles;
};

struct SummaryTable {
    std::vector<double> probs;
    std::vector<SummaryRow> rows;
};

/// Pooled posterior means and quantiles for every scalar column.
SummaryTable summarize(const PosteriorDraws& draws, std::vector<double> probs = {0.025, 0.5, 0.975});

// ---------------------------------------------------------------------------
// Direct density evaluation (tests and cross-checks)
// ---------------------------------------------------------------------------

/// Daily effects (and pls mixing scales) for one outcome, aligned with that
/// outcome's likelihood days.
struct LatentEffects {
    Eigen::ArrayXd eps;
    Eigen::ArrayXd mix;  ///< used by pls only; may be empty otherwise
};

/// Joint log posterior of the single-phase bivariate model in the natural
/// parameterization: observation terms + effect priors + scalar priors.
/// Support violations (e.g. K at or below an observed total) give -inf.
double log_posterior(const ThetaBivariate& theta, const LatentEffects& lat_c, const LatentEffects& lat_d,
                     const EpidemicSeries& series, const PriorConfig& prior, GrowthFamily growth,
                     ErrorFamily fam_c, ErrorFamily fam_d, int t_max, std::string* reason = nullptr);

/// Earliest day t >= 2 whose preceding cumulative total is positive, i.e. the
/// first day the one-step recursion can produce a mean; 0 when there is none.
int first_likelihood_day(const Eigen::Ref<const Eigen::ArrayXd>& cum, int t_max);

// ---------------------------------------------------------------------------
// Draw decoding (forecasting, reproduction-ratio input, fitted trajectories)
// ---------------------------------------------------------------------------

/// One retained draw's parameters rebuilt from the stored scalar columns.
struct DrawParams {
    MultiphaseParams cases;
    GrowthParams death;
    double phi = 0.0;
    ErrorSpec err_c;
    ErrorSpec err_d;
    bool has_death = false;
};

DrawParams draw_params(const PosteriorDraws& draws, int chain, int index);

/// In-sample predicted daily new cases, one row per retained draw (pooled in
/// chain order): day 1 carries the observed seed count, later days the fitted
/// mean times the drawn daily effect.
Eigen::MatrixXd insample_predicted_cases(const PosteriorDraws& draws);

namespace detail {
/// Full-state joint log target in the sampling parameterization (transformed
/// scalars, log-effect latents, pls mixing scales). Exposed for equivalence
/// tests against independently composed sums.
double model_log_target(const ModelSpec& model, const Eigen::ArrayXd& z, const Eigen::ArrayXd& w_c,
                        const Eigen::ArrayXd& w_d, const Eigen::ArrayXd& mix_c, const Eigen::ArrayXd& mix_d);

/// Scalar site names for a model, sampled order.
std::vector<std::string> sampled_names(const ModelSpec& model);
}  // namespace detail

}  // namespace epifit
