#include "epifit/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "epifit/mh.hpp"

namespace epifit {

int first_likelihood_day(const Eigen::Ref<const Eigen::ArrayXd>& cum, int t_max) {
    for (int t = 2; t <= t_max; ++t) {
        if (cum[t - 2] > 0.0) return t;
    }
    return 0;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kTauHorizon = 3650;  ///< how far past the window the turning-point search extends

enum class Transform { log_pos, logit, raw_switch_day };

/// One scalar sampling site: its coordinate transform, which cached blocks a
/// change invalidates, and its proposal-scale policy.
struct Site {
    std::string name;
    Transform tf = Transform::log_pos;
    bool affects_mu_c = false;
    bool affects_mu_d = false;
    bool affects_lat_c = false;
    bool affects_lat_d = false;
    bool adapt = true;
    double init_scale = 0.1;
};

struct Layout {
    std::vector<Site> sites;
    std::vector<int> r_ix, a_ix;           // per phase; a_ix entry -1 without a shape parameter
    int K1_ix = -1;
    std::vector<int> eta_ix, kappa_ix;     // per boundary (phases 2..P)
    int rd_ix = -1, ad_ix = -1, phi_ix = -1, Kd_ix = -1;
    int hc_ix = -1, hd_ix = -1;

    int n() const { return static_cast<int>(sites.size()); }
};

std::string hyper_name(ErrorFamily fam, const std::string& suffix) {
    return (fam == ErrorFamily::pg ? std::string("lambda") : std::string("sigma")) + suffix;
}

Layout make_layout(const ModelSpec& m) {
    Layout L;
    auto add = [&L](std::string name, Transform tf, bool mc, bool md, bool lc, bool ld, double s0 = 0.1,
                    bool adapt = true) {
        L.sites.push_back(Site{std::move(name), tf, mc, md, lc, ld, adapt, s0});
        return L.n() - 1;
    };
    const bool shape = has_shape_param(m.growth);
    const bool k_feeds_deaths = m.bivariate && m.k_link == KLinkMode::phi_link;
    for (int p = 1; p <= m.n_phases; ++p) {
        const std::string suf = m.bivariate ? "_c" : "_" + std::to_string(p);
        L.r_ix.push_back(add("r" + suf, Transform::log_pos, true, false, false, false));
        L.a_ix.push_back(shape ? add("a" + suf, Transform::log_pos, true, false, false, false) : -1);
        if (p == 1) {
            L.K1_ix = add(m.bivariate ? "K_c" : "K_1", Transform::log_pos, true, k_feeds_deaths, false, false);
        } else {
            L.eta_ix.push_back(add("eta_" + std::to_string(p), Transform::log_pos, true, false, false, false));
            L.kappa_ix.push_back(add("kappa_" + std::to_string(p), Transform::raw_switch_day, true, false, false,
                                     false, 5.0, false));
        }
    }
    if (m.bivariate) {
        L.rd_ix = add("r_d", Transform::log_pos, false, true, false, false);
        if (shape) L.ad_ix = add("a_d", Transform::log_pos, false, true, false, false);
        if (m.k_link == KLinkMode::phi_link) {
            L.phi_ix = add("phi", Transform::logit, false, true, false, false);
        } else {
            L.Kd_ix = add("K_d", Transform::log_pos, false, true, false, false);
        }
    }
    L.hc_ix = add(hyper_name(m.fam_c, m.bivariate ? "_c" : ""), Transform::log_pos, false, false, true, false);
    if (m.bivariate) {
        L.hd_ix = add(hyper_name(m.fam_d, "_d"), Transform::log_pos, false, false, false, true);
    }
    return L;
}

/// Natural-scale parameters decoded from the transformed coordinate vector.
/// hyper_* is lambda for pg and the precision 1/sigma_eps^2 for pln/pls.
struct Params {
    MultiphaseParams cases;
    GrowthParams death;
    double phi = 0.0;
    double hyper_c = 10.0;
    double hyper_d = 10.0;
};

double sigma_from_precision(double prec) { return 1.0 / std::sqrt(prec); }

Params decode(const Layout& L, const ModelSpec& m, const Eigen::ArrayXd& z) {
    Params P;
    const bool shape = has_shape_param(m.growth);
    double K = std::exp(z[L.K1_ix]);
    for (int p = 0; p < m.n_phases; ++p) {
        if (p > 0) {
            K *= std::exp(z[L.eta_ix[static_cast<size_t>(p - 1)]]);
            P.cases.kappa.push_back(z[L.kappa_ix[static_cast<size_t>(p - 1)]]);
        }
        GrowthParams g;
        g.family = m.growth;
        g.r = std::exp(z[L.r_ix[static_cast<size_t>(p)]]);
        g.a = shape ? std::exp(z[L.a_ix[static_cast<size_t>(p)]]) : 1.0;
        g.K = K;
        P.cases.phases.push_back(g);
    }
    if (m.bivariate) {
        P.death.family = m.growth;
        P.death.r = std::exp(z[L.rd_ix]);
        P.death.a = shape ? std::exp(z[L.ad_ix]) : 1.0;
        if (m.k_link == KLinkMode::phi_link) {
            P.phi = 1.0 / (1.0 + std::exp(-z[L.phi_ix]));
            P.death.K = P.phi * P.cases.phases.front().K;
        } else {
            P.death.K = std::exp(z[L.Kd_ix]);
            P.phi = P.death.K / P.cases.phases.front().K;
        }
    }
    P.hyper_c = std::exp(z[L.hc_ix]);
    if (m.bivariate) P.hyper_d = std::exp(z[L.hd_ix]);
    return P;
}

/// Per-outcome observation data for the one-step-ahead likelihood.
struct ObsData {
    std::vector<int> day;            // day index t of each term
    std::vector<long long> y;        // observed new count
    std::vector<double> cum_prev;    // observed cumulative total at t-1
    std::vector<double> lgam;        // lgamma(y + 1)
    double cum_final = 0.0;          // observed total at the window end

    int n() const { return static_cast<int>(day.size()); }
};

ObsData make_obs(const Eigen::ArrayXd& counts, const Eigen::ArrayXd& cum, int t_max, int first_day) {
    ObsData o;
    o.cum_final = cum[t_max - 1];
    if (first_day < 2) return o;
    for (int t = first_day; t <= t_max; ++t) {
        o.day.push_back(t);
        const auto y = static_cast<long long>(counts[t - 1]);
        o.y.push_back(y);
        o.cum_prev.push_back(cum[t - 2]);
        o.lgam.push_back(std::lgamma(static_cast<double>(y) + 1.0));
    }
    return o;
}

/// Phase means for every likelihood day. Returns false on a support violation
/// (nonpositive or nonfinite mean, or a final size at/below the observed
/// window total).
bool compute_mu_cases(const Params& P, const ObsData& obs, Eigen::ArrayXd& mu) {
    if (!(P.cases.phases.back().K > obs.cum_final)) return false;
    for (int i = 0; i < obs.n(); ++i) {
        const double v = multiphase_mean_raw(P.cases, obs.cum_prev[static_cast<size_t>(i)],
                                             static_cast<double>(obs.day[static_cast<size_t>(i)]));
        if (!(v > 0.0) || !std::isfinite(v)) return false;
        mu[i] = v;
    }
    return true;
}

bool compute_mu_deaths(const Params& P, const ObsData& obs, Eigen::ArrayXd& mu) {
    if (!(P.death.K > obs.cum_final)) return false;
    for (int i = 0; i < obs.n(); ++i) {
        const double v = mean_incidence_raw(P.death, obs.cum_prev[static_cast<size_t>(i)]);
        if (!(v > 0.0) || !std::isfinite(v)) return false;
        mu[i] = v;
    }
    return true;
}

double obs_loglik(const ObsData& obs, const Eigen::ArrayXd& mu, const Eigen::ArrayXd& eps, Eigen::ArrayXd& ll) {
    double total = 0.0;
    for (int i = 0; i < obs.n(); ++i) {
        const double v = log_poisson_pmf_cached(obs.y[static_cast<size_t>(i)], mu[i] * eps[i],
                                                obs.lgam[static_cast<size_t>(i)]);
        ll[i] = v;
        total += v;
    }
    return total;
}

/// Log density of one latent coordinate w = log eps under the effect prior.
double latent_logpdf(ErrorFamily fam, double w, double mix, double hyper) {
    switch (fam) {
        case ErrorFamily::pg:
            // density of w when eps = e^w ~ Gamma(lambda, lambda)
            return log_gamma_pdf(std::exp(w), hyper, hyper) + w;
        case ErrorFamily::pln:
            return log_normal_pdf(w, 0.0, 1.0 / hyper);
        case ErrorFamily::pls:
            return log_normal_pdf(w, 0.0, 1.0 / (hyper * mix));
    }
    return -kInf;
}

double latent_prior_sum(ErrorFamily fam, const Eigen::ArrayXd& w, const Eigen::ArrayXd& mix, double hyper,
                        Eigen::ArrayXd& lp) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double v = latent_logpdf(fam, w[i], fam == ErrorFamily::pls ? mix[i] : 1.0, hyper);
        lp[i] = v;
        total += v;
    }
    return total;
}

double mix_prior_sum(double nu, const Eigen::ArrayXd& mix, Eigen::ArrayXd& mp) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < mix.size(); ++i) {
        const double v = log_gamma_pdf(mix[i], nu / 2.0, nu / 2.0);
        mp[i] = v;
        total += v;
    }
    return total;
}

/// Joint scalar-parameter log prior in the transformed coordinates (natural
/// densities plus transform Jacobians).
double theta_prior(const Layout& L, const ModelSpec& m, const Eigen::ArrayXd& z, const Params& P) {
    const PriorConfig& pc = m.prior;
    const bool shape = has_shape_param(m.growth);
    double lp = 0.0;
    for (int p = 0; p < m.n_phases; ++p) {
        const GrowthParams& g = P.cases.phases[static_cast<size_t>(p)];
        lp += log_exponential_pdf(g.r, pc.rate_prior_mean) + z[L.r_ix[static_cast<size_t>(p)]];
        if (shape) lp += log_exponential_pdf(g.a, pc.rate_prior_mean) + z[L.a_ix[static_cast<size_t>(p)]];
    }
    lp += log_normal_pdf(z[L.K1_ix], pc.k_log_mean, pc.k_log_var);
    for (size_t b = 0; b < L.eta_ix.size(); ++b) {
        const double eta = std::exp(z[L.eta_ix[b]]);
        lp += log_exponential_pdf(eta, m.phase_priors.eta_prior_mean) + z[L.eta_ix[b]];
        const double kappa = z[L.kappa_ix[b]];
        if (!(kappa >= 1.0)) return -kInf;
        if (b > 0 && !(kappa > z[L.kappa_ix[b - 1]])) return -kInf;
        lp += log_exponential_pdf(kappa, m.phase_priors.kappa_prior_mean);
    }
    if (m.bivariate) {
        lp += log_exponential_pdf(P.death.r, pc.rate_prior_mean) + z[L.rd_ix];
        if (shape) lp += log_exponential_pdf(P.death.a, pc.rate_prior_mean) + z[L.ad_ix];
        if (m.k_link == KLinkMode::phi_link) {
            const BetaParams bp = cfr_beta_prior(pc.cfr_ref, pc.cfr_count);
            lp += log_beta_pdf(P.phi, bp.alpha, bp.beta) + std::log(P.phi) + std::log1p(-P.phi);
        } else {
            lp += log_normal_pdf(z[L.Kd_ix], pc.k_log_mean + std::log(pc.cfr_ref), pc.k_log_var);
        }
    }
    lp += log_gamma_pdf(P.hyper_c, pc.hyper_shape, pc.hyper_rate) + z[L.hc_ix];
    if (m.bivariate) lp += log_gamma_pdf(P.hyper_d, pc.hyper_shape, pc.hyper_rate) + z[L.hd_ix];
    return lp;
}

/// All caches for one outcome.
struct OutcomeState {
    Eigen::ArrayXd w;    // log effects
    Eigen::ArrayXd eps;  // exp(w)
    Eigen::ArrayXd mix;  // pls mixing scales (size 0 otherwise)
    Eigen::ArrayXd mu;   // deterministic means
    Eigen::ArrayXd ll;   // per-day observation log likelihood
    Eigen::ArrayXd lp;   // per-day latent log prior
    Eigen::ArrayXd mp;   // per-day mixing-scale log prior
    double loglik = 0.0, latprior = 0.0, mixprior = 0.0;

    void resize(int n, bool pls) {
        w = Eigen::ArrayXd::Zero(n);
        eps = Eigen::ArrayXd::Ones(n);
        mix = pls ? Eigen::ArrayXd::Ones(n) : Eigen::ArrayXd();
        mu = Eigen::ArrayXd::Zero(n);
        ll = Eigen::ArrayXd::Zero(n);
        lp = Eigen::ArrayXd::Zero(n);
        mp = pls ? Eigen::ArrayXd::Zero(n) : Eigen::ArrayXd();
    }
};

struct FullState {
    Eigen::ArrayXd z;
    OutcomeState c, d;
    double thprior = 0.0;

    double total() const {
        return thprior + c.loglik + c.latprior + c.mixprior + d.loglik + d.latprior + d.mixprior;
    }
};

/// The per-chain sampler. Incremental cache updates keep each site update
/// O(1)-O(T); a full recomputation at every retained draw both audits the
/// bookkeeping and resets accumulated rounding drift.
class ChainRunner {
public:
    ChainRunner(const ModelSpec& model, const Layout& layout, const ObsData& obs_c, const ObsData& obs_d,
                const SamplerConfig& cfg, int chain_id)
        : m_(model), L_(layout), oc_(obs_c), od_(obs_d), cfg_(cfg),
          rng_(mix_seed(cfg.seed, static_cast<std::uint64_t>(chain_id))) {
        scales_.resize(static_cast<size_t>(L_.n()));
        for (int i = 0; i < L_.n(); ++i) {
            scales_[static_cast<size_t>(i)].log_scale = std::log(L_.sites[static_cast<size_t>(i)].init_scale);
            scales_[static_cast<size_t>(i)].adapt = L_.sites[static_cast<size_t>(i)].adapt;
        }
        lat_scales_c_.assign(static_cast<size_t>(oc_.n()), detail::AdaptScale{});
        lat_scales_d_.assign(static_cast<size_t>(od_.n()), detail::AdaptScale{});
        mu_c_cand_.resize(oc_.n());
        ll_c_cand_.resize(oc_.n());
        lp_c_cand_.resize(oc_.n());
        mu_d_cand_.resize(od_.n());
        ll_d_cand_.resize(od_.n());
        lp_d_cand_.resize(od_.n());
    }

    ChainDraws run() {
        initialize();
        const long burn = cfg_.resolved_burn_in();
        const long n_keep = cfg_.retained_per_chain();
        const int n_cols = L_.n() + n_derived();
        ChainDraws out;
        out.scalars.resize(n_keep, n_cols);
        out.eps_cases.resize(n_keep, oc_.n());
        out.eps_deaths.resize(n_keep, od_.n());
        out.log_target.resize(n_keep);
        out.iterations.reserve(static_cast<size_t>(n_keep));
        post_accept_ = Eigen::ArrayXd::Zero(L_.n());

        long kept = 0;
        for (long iter = 0; iter < cfg_.n_iter; ++iter) {
            const bool adapting = iter < burn;
            if (iter == burn) freeze_scales();
            sweep(adapting);
            if (adapting && (iter + 1) % cfg_.adapt_window == 0) {
                for (auto& s : scales_) s.end_batch(cfg_.adapt_window, cfg_.target_accept);
                for (auto& s : lat_scales_c_) s.end_batch(cfg_.adapt_window, cfg_.target_accept);
                for (auto& s : lat_scales_d_) s.end_batch(cfg_.adapt_window, cfg_.target_accept);
            }
            if (iter >= burn && (iter - burn) % cfg_.thin == 0) {
                audit_and_refresh();
                record(out, kept, iter);
                ++kept;
            }
        }
        out.accept_rate = post_accept_ / static_cast<double>(std::max(1L, cfg_.n_iter - burn));
        out.scales_at_freeze = scales_at_freeze_;
        out.scales_at_end.resize(L_.n());
        for (int i = 0; i < L_.n(); ++i) out.scales_at_end[i] = scales_[static_cast<size_t>(i)].scale();
        for (int i = 0; i < L_.n(); ++i) {
            if (std::abs(out.scales_at_end[i] - scales_at_freeze_[i]) > 0.0) {
                throw_numeric("proposal scale changed after burn-in; adaptation failed to freeze");
            }
        }
        return out;
    }

private:
    int n_derived() const {
        if (m_.n_phases > 1) return m_.n_phases - 1;          // K_2 [, K_3]
        if (m_.bivariate) return 5;                           // K_d|phi, tau_c, tau_d, peak_day_c, peak_day_d
        return 2;                                             // tau, peak_day
    }

    void initialize() {
        const bool shape = has_shape_param(m_.growth);
        const double c_final = oc_.cum_final;
        std::string reason = "no attempt made";
        for (int attempt = 0; attempt < 100; ++attempt) {
            st_.z.resize(L_.n());
            auto jitter = [this]() { return 1.0 + 0.1 * (2.0 * draw_uniform(rng_) - 1.0); };
            for (int p = 0; p < m_.n_phases; ++p) {
                st_.z[L_.r_ix[static_cast<size_t>(p)]] = std::log(draw_exponential(rng_, m_.prior.rate_prior_mean));
                if (shape) st_.z[L_.a_ix[static_cast<size_t>(p)]] = std::log(draw_exponential(rng_, m_.prior.rate_prior_mean));
            }
            double k_init = std::exp(m_.prior.k_log_mean);
            if (!(k_init > 1.05 * c_final)) k_init = 2.0 * c_final;
            st_.z[L_.K1_ix] = std::log(k_init * jitter());
            for (size_t b = 0; b < L_.eta_ix.size(); ++b) {
                st_.z[L_.eta_ix[b]] = std::log(jitter());
                const double frac = L_.eta_ix.size() == 1 ? 0.7 : (b == 0 ? 0.5 : 0.8);
                st_.z[L_.kappa_ix[b]] = std::max(1.0, frac * m_.resolved_t_max() * jitter());
            }
            if (m_.bivariate) {
                st_.z[L_.rd_ix] = std::log(draw_exponential(rng_, m_.prior.rate_prior_mean));
                if (shape) st_.z[L_.ad_ix] = std::log(draw_exponential(rng_, m_.prior.rate_prior_mean));
                if (m_.k_link == KLinkMode::phi_link) {
                    const double phi = std::clamp(m_.prior.cfr_ref * jitter(), 1e-6, 1.0 - 1e-6);
                    st_.z[L_.phi_ix] = std::log(phi / (1.0 - phi));
                } else {
                    double kd_init = std::exp(m_.prior.k_log_mean + std::log(m_.prior.cfr_ref));
                    if (!(kd_init > 1.05 * od_.cum_final)) kd_init = std::max(2.0 * od_.cum_final, 1.0);
                    st_.z[L_.Kd_ix] = std::log(kd_init * jitter());
                }
            }
            st_.z[L_.hc_ix] = std::log(10.0 * jitter());
            if (m_.bivariate) st_.z[L_.hd_ix] = std::log(10.0 * jitter());

            st_.c.resize(oc_.n(), m_.fam_c == ErrorFamily::pls);
            st_.d.resize(od_.n(), m_.bivariate && m_.fam_d == ErrorFamily::pls);
            if (refresh_all(st_, &reason)) return;
        }
        throw_numeric("chain initialization failed after 100 attempts (" + reason + ")");
    }

    /// Recomputes every cache from (z, w, mix). Returns false (with a reason)
    /// when the state has zero posterior density.
    bool refresh_all(FullState& s, std::string* reason) {
        const Params P = decode(L_, m_, s.z);
        s.thprior = theta_prior(L_, m_, s.z, P);
        if (!std::isfinite(s.thprior)) {
            if (reason) *reason = "scalar prior is zero (constraint violated)";
            return false;
        }
        s.c.eps = s.c.w.exp();
        s.d.eps = s.d.w.exp();
        if (!compute_mu_cases(P, oc_, s.c.mu)) {
            if (reason) *reason = "case mean nonpositive or final size below observed total";
            return false;
        }
        s.c.loglik = obs_loglik(oc_, s.c.mu, s.c.eps, s.c.ll);
        s.c.latprior = latent_prior_sum(m_.fam_c, s.c.w, s.c.mix, P.hyper_c, s.c.lp);
        s.c.mixprior = m_.fam_c == ErrorFamily::pls ? mix_prior_sum(m_.nu, s.c.mix, s.c.mp) : 0.0;
        if (od_.n() > 0) {
            if (!compute_mu_deaths(P, od_, s.d.mu)) {
                if (reason) *reason = "death mean nonpositive or final size below observed total";
                return false;
            }
            s.d.loglik = obs_loglik(od_, s.d.mu, s.d.eps, s.d.ll);
            s.d.latprior = latent_prior_sum(m_.fam_d, s.d.w, s.d.mix, P.hyper_d, s.d.lp);
            s.d.mixprior = m_.bivariate && m_.fam_d == ErrorFamily::pls ? mix_prior_sum(m_.nu, s.d.mix, s.d.mp) : 0.0;
        } else if (m_.bivariate && !(P.death.K > od_.cum_final)) {
            if (reason) *reason = "death final size below observed total";
            return false;
        }
        if (!std::isfinite(s.total())) {
            if (reason) *reason = "log posterior not finite";
            return false;
        }
        return true;
    }

    void sweep(bool adapting) {
        for (int i = 0; i < L_.n(); ++i) scalar_update(i, adapting);
        latent_sweep(st_.c, oc_, m_.fam_c, cur_params().hyper_c, lat_scales_c_);
        if (od_.n() > 0) latent_sweep(st_.d, od_, m_.fam_d, cur_params().hyper_d, lat_scales_d_);
        if (m_.fam_c == ErrorFamily::pls) mix_gibbs(st_.c, cur_params().hyper_c);
        if (od_.n() > 0 && m_.fam_d == ErrorFamily::pls) mix_gibbs(st_.d, cur_params().hyper_d);
    }

    // Decoding is cheap but not free; cache the natural parameters for the
    // current z and invalidate on every accepted scalar move.
    const Params& cur_params() {
        if (!params_valid_) {
            params_ = decode(L_, m_, st_.z);
            params_valid_ = true;
        }
        return params_;
    }

    void scalar_update(int i, bool adapting) {
        const Site& site = L_.sites[static_cast<size_t>(i)];
        detail::AdaptScale& sc = scales_[static_cast<size_t>(i)];
        double prop = st_.z[i] + sc.scale() * draw_normal(rng_, 0.0, 1.0);
        if (site.tf == Transform::raw_switch_day && prop < 1.0) prop = 2.0 - prop;  // reflect at day 1

        const double z_old = st_.z[i];
        st_.z[i] = prop;
        const Params P = decode(L_, m_, st_.z);
        const double thp = theta_prior(L_, m_, st_.z, P);
        double delta = thp - st_.thprior;
        bool ok = std::isfinite(thp);

        double llc = st_.c.loglik, lld = st_.d.loglik;
        double lpc = st_.c.latprior, lpd = st_.d.latprior;
        if (ok && site.affects_mu_c) {
            ok = compute_mu_cases(P, oc_, mu_c_cand_);
            if (ok) {
                llc = obs_loglik(oc_, mu_c_cand_, st_.c.eps, ll_c_cand_);
                delta += llc - st_.c.loglik;
            }
        }
        if (ok && site.affects_mu_d && od_.n() > 0) {
            ok = compute_mu_deaths(P, od_, mu_d_cand_);
            if (ok) {
                lld = obs_loglik(od_, mu_d_cand_, st_.d.eps, ll_d_cand_);
                delta += lld - st_.d.loglik;
            }
        }
        if (ok && site.affects_mu_d && od_.n() == 0 && m_.bivariate) {
            ok = P.death.K > od_.cum_final;  // support check survives even with no death terms
        }
        if (ok && site.affects_lat_c) {
            lpc = latent_prior_sum(m_.fam_c, st_.c.w, st_.c.mix, P.hyper_c, lp_c_cand_);
            delta += lpc - st_.c.latprior;
        }
        if (ok && site.affects_lat_d && od_.n() > 0) {
            lpd = latent_prior_sum(m_.fam_d, st_.d.w, st_.d.mix, P.hyper_d, lp_d_cand_);
            delta += lpd - st_.d.latprior;
        }

        const bool accept = ok && std::log(draw_uniform(rng_)) < delta;
        if (accept) {
            st_.thprior = thp;
            if (site.affects_mu_c) {
                st_.c.mu.swap(mu_c_cand_);
                st_.c.ll.swap(ll_c_cand_);
                st_.c.loglik = llc;
            }
            if (site.affects_mu_d && od_.n() > 0) {
                st_.d.mu.swap(mu_d_cand_);
                st_.d.ll.swap(ll_d_cand_);
                st_.d.loglik = lld;
            }
            if (site.affects_lat_c) {
                st_.c.lp.swap(lp_c_cand_);
                st_.c.latprior = lpc;
            }
            if (site.affects_lat_d && od_.n() > 0) {
                st_.d.lp.swap(lp_d_cand_);
                st_.d.latprior = lpd;
            }
            params_valid_ = false;
        } else {
            st_.z[i] = z_old;
        }
        if (adapting) {
            sc.record(accept);
        } else {
            post_accept_[i] += accept ? 1.0 : 0.0;
        }
    }

    void latent_sweep(OutcomeState& o, const ObsData& obs, ErrorFamily fam, double hyper,
                      std::vector<detail::AdaptScale>& scales) {
        for (int i = 0; i < obs.n(); ++i) {
            detail::AdaptScale& sc = scales[static_cast<size_t>(i)];
            const double w_new = o.w[i] + sc.scale() * draw_normal(rng_, 0.0, 1.0);
            const double eps_new = std::exp(w_new);
            const double ll_new = log_poisson_pmf_cached(obs.y[static_cast<size_t>(i)], o.mu[i] * eps_new,
                                                         obs.lgam[static_cast<size_t>(i)]);
            const double lp_new = latent_logpdf(fam, w_new, fam == ErrorFamily::pls ? o.mix[i] : 1.0, hyper);
            const double delta = ll_new - o.ll[i] + lp_new - o.lp[i];
            const bool accept = std::log(draw_uniform(rng_)) < delta;
            if (accept) {
                o.w[i] = w_new;
                o.eps[i] = eps_new;
                o.loglik += ll_new - o.ll[i];
                o.latprior += lp_new - o.lp[i];
                o.ll[i] = ll_new;
                o.lp[i] = lp_new;
            }
            sc.record(accept);
        }
    }

    void mix_gibbs(OutcomeState& o, double hyper) {
        const double sigma = sigma_from_precision(hyper);
        for (Eigen::Index i = 0; i < o.mix.size(); ++i) {
            const double mix_new = update_student_mix_scale(o.w[i], sigma, m_.nu, rng_);
            const double lp_new = log_normal_pdf(o.w[i], 0.0, 1.0 / (hyper * mix_new));
            const double mp_new = log_gamma_pdf(mix_new, m_.nu / 2.0, m_.nu / 2.0);
            o.latprior += lp_new - o.lp[i];
            o.mixprior += mp_new - o.mp[i];
            o.mix[i] = mix_new;
            o.lp[i] = lp_new;
            o.mp[i] = mp_new;
        }
    }

    void freeze_scales() {
        scales_at_freeze_.resize(L_.n());
        for (int i = 0; i < L_.n(); ++i) {
            scales_[static_cast<size_t>(i)].frozen = true;
            scales_at_freeze_[i] = scales_[static_cast<size_t>(i)].scale();
        }
        for (auto& s : lat_scales_c_) s.frozen = true;
        for (auto& s : lat_scales_d_) s.frozen = true;
    }

    /// Recomputes all caches from scratch, checks agreement with the
    /// incremental totals, and adopts the fresh values (clearing drift).
    void audit_and_refresh() {
        const double before = st_.total();
        FullState fresh;
        fresh.z = st_.z;
        fresh.c.resize(oc_.n(), m_.fam_c == ErrorFamily::pls);
        fresh.d.resize(od_.n(), m_.bivariate && m_.fam_d == ErrorFamily::pls);
        fresh.c.w = st_.c.w;
        fresh.d.w = st_.d.w;
        if (m_.fam_c == ErrorFamily::pls) fresh.c.mix = st_.c.mix;
        if (m_.bivariate && m_.fam_d == ErrorFamily::pls) fresh.d.mix = st_.d.mix;
        std::string reason;
        if (!refresh_all(fresh, &reason)) {
            throw_numeric("retained state has zero posterior density (" + reason + ")");
        }
        if (std::abs(fresh.total() - before) > 1e-6 * std::max(1.0, std::abs(before))) {
            throw_numeric("incremental log-posterior bookkeeping diverged from a full recomputation");
        }
        st_ = std::move(fresh);
        params_valid_ = false;
    }

    /// Turning point and model-implied peak day from the observed cumulative
    /// trajectory extended by the deterministic recursion.
    static std::pair<double, double> turning_info(const GrowthParams& g, const Eigen::ArrayXd& cum_obs) {
        const double thr = peak_threshold(g);
        const Eigen::Index n = cum_obs.size();
        double tau = -1.0;
        if (cum_obs[0] >= thr) tau = 1.0;
        double best_inc = -kInf;
        double best_day = 2.0;
        double prev = cum_obs[0];
        double day = 1.0;
        for (Eigen::Index i = 1; i < n; ++i) {
            const double cur = cum_obs[i];
            day = static_cast<double>(i) + 1.0;
            const double inc = cur - prev;
            if (inc > best_inc) {
                best_inc = inc;
                best_day = day;
            }
            if (tau < 0.0 && cur >= thr) {
                const double step = cur - prev;
                tau = static_cast<double>(i) + (step > 0.0 ? (thr - prev) / step : 1.0);
            }
            prev = cur;
        }
        double c = prev;
        for (int k = 0; k < kTauHorizon && (tau < 0.0 || k < 1); ++k) {
            double inc = c > 0.0 ? mean_incidence_raw(g, c) : 0.0;
            if (!(inc > 0.0)) inc = 0.0;
            const double next = c + inc;
            day += 1.0;
            if (inc > best_inc) {
                best_inc = inc;
                best_day = day;
            }
            if (tau < 0.0 && next >= thr) {
                tau = day - 1.0 + (inc > 0.0 ? (thr - c) / inc : 1.0);
            }
            c = next;
            if (tau >= 0.0 && inc < best_inc * 1e-9) break;
            if (inc <= 0.0) break;
        }
        if (tau < 0.0) tau = day + 1.0;  // never crossed within the search horizon
        return {tau, best_day};
    }

    void record(ChainDraws& out, long kept, long iter) {
        const Params& P = cur_params();
        int col = 0;
        const bool shape = has_shape_param(m_.growth);
        for (int p = 0; p < m_.n_phases; ++p) {
            const GrowthParams& g = P.cases.phases[static_cast<size_t>(p)];
            out.scalars(kept, col++) = g.r;
            if (shape) out.scalars(kept, col++) = g.a;
            if (p == 0) {
                out.scalars(kept, col++) = g.K;
            } else {
                out.scalars(kept, col++) = std::exp(st_.z[L_.eta_ix[static_cast<size_t>(p - 1)]]);
                out.scalars(kept, col++) = P.cases.kappa[static_cast<size_t>(p - 1)];
            }
        }
        if (m_.bivariate) {
            out.scalars(kept, col++) = P.death.r;
            if (shape) out.scalars(kept, col++) = P.death.a;
            out.scalars(kept, col++) = m_.k_link == KLinkMode::phi_link ? P.phi : P.death.K;
        }
        out.scalars(kept, col++) = m_.fam_c == ErrorFamily::pg ? P.hyper_c : sigma_from_precision(P.hyper_c);
        if (m_.bivariate) {
            out.scalars(kept, col++) = m_.fam_d == ErrorFamily::pg ? P.hyper_d : sigma_from_precision(P.hyper_d);
        }
        // derived columns
        const int t_max = m_.resolved_t_max();
        if (m_.n_phases > 1) {
            for (int p = 1; p < m_.n_phases; ++p) {
                out.scalars(kept, col++) = P.cases.phases[static_cast<size_t>(p)].K;
            }
        } else if (m_.bivariate) {
            out.scalars(kept, col++) = m_.k_link == KLinkMode::phi_link ? P.death.K : P.phi;
            const auto tc = turning_info(P.cases.phases[0], m_.series.cum_cases.head(t_max));
            const auto td = turning_info(P.death, m_.series.cum_deaths.head(t_max));
            out.scalars(kept, col++) = tc.first;
            out.scalars(kept, col++) = td.first;
            out.scalars(kept, col++) = tc.second;
            out.scalars(kept, col++) = td.second;
        } else {
            const auto tc = turning_info(P.cases.phases[0], m_.series.cum_cases.head(t_max));
            out.scalars(kept, col++) = tc.first;
            out.scalars(kept, col++) = tc.second;
        }
        out.eps_cases.row(kept) = st_.c.eps.matrix().transpose();
        if (od_.n() > 0) out.eps_deaths.row(kept) = st_.d.eps.matrix().transpose();
        out.log_target[kept] = st_.total();
        out.iterations.push_back(iter);
    }

    const ModelSpec& m_;
    const Layout& L_;
    const ObsData& oc_;
    const ObsData& od_;
    const SamplerConfig& cfg_;
    Rng rng_;

    FullState st_;
    Params params_;
    bool params_valid_ = false;

    std::vector<detail::AdaptScale> scales_;
    std::vector<detail::AdaptScale> lat_scales_c_, lat_scales_d_;
    Eigen::ArrayXd scales_at_freeze_;
    Eigen::ArrayXd post_accept_;

    Eigen::ArrayXd mu_c_cand_, ll_c_cand_, lp_c_cand_;
    Eigen::ArrayXd mu_d_cand_, ll_d_cand_, lp_d_cand_;
};

std::vector<std::string> derived_names(const ModelSpec& m) {
    if (m.n_phases > 1) {
        std::vector<std::string> out;
        for (int p = 2; p <= m.n_phases; ++p) out.push_back("K_" + std::to_string(p));
        return out;
    }
    if (m.bivariate) {
        return {m.k_link == KLinkMode::phi_link ? "K_d" : "phi", "tau_c", "tau_d", "peak_day_c", "peak_day_d"};
    }
    return {"tau", "peak_day"};
}

/// Resolves data-dependent pieces of the model: window end and the K prior.
ModelSpec resolve_model(ModelSpec model) {
    model.t_max = model.resolved_t_max();
    model.validate();
    if (std::isnan(model.prior.k_log_mean)) {
        const int t = model.t_max;
        try {
            const LognormalParams kp =
                k_prior_from_series(model.series.cum_cases, t, default_k_spacing(t), model.prior.k_log_var);
            model.prior.k_log_mean = kp.log_mean;
        } catch (const Error& e) {
            throw_config(std::string("could not center the K prior from the data (") + e.what()
                         + "); supply an explicit k_log_mean");
        }
    }
    return model;
}

}  // namespace

namespace detail {

std::vector<std::string> sampled_names(const ModelSpec& model) {
    const Layout L = make_layout(model);
    std::vector<std::string> out;
    out.reserve(static_cast<size_t>(L.n()));
    for (const Site& s : L.sites) out.push_back(s.name);
    return out;
}

double model_log_target(const ModelSpec& model_in, const Eigen::ArrayXd& z, const Eigen::ArrayXd& w_c,
                        const Eigen::ArrayXd& w_d, const Eigen::ArrayXd& mix_c, const Eigen::ArrayXd& mix_d) {
    const ModelSpec model = resolve_model(model_in);
    const Layout L = make_layout(model);
    if (z.size() != L.n()) throw_domain("model_log_target: coordinate vector has wrong length");
    const int t_max = model.resolved_t_max();
    const ObsData oc = make_obs(model.series.cases, model.series.cum_cases, t_max,
                                first_likelihood_day(model.series.cum_cases, t_max));
    const ObsData od = model.bivariate
                           ? make_obs(model.series.deaths, model.series.cum_deaths, t_max,
                                      first_likelihood_day(model.series.cum_deaths, t_max))
                           : ObsData{};
    if (w_c.size() != oc.n()) throw_domain("model_log_target: case effect vector has wrong length");
    if (w_d.size() != od.n()) throw_domain("model_log_target: death effect vector has wrong length");

    const Params P = decode(L, model, z);
    const double thp = theta_prior(L, model, z, P);
    if (!std::isfinite(thp)) return -kInf;

    Eigen::ArrayXd mu_c(oc.n()), ll(oc.n()), lp(oc.n());
    if (!compute_mu_cases(P, oc, mu_c)) return -kInf;
    double total = thp;
    total += obs_loglik(oc, mu_c, w_c.exp(), ll);
    total += latent_prior_sum(model.fam_c, w_c, mix_c, P.hyper_c, lp);
    if (model.fam_c == ErrorFamily::pls) {
        if (mix_c.size() != oc.n()) throw_domain("model_log_target: case mixing-scale vector has wrong length");
        Eigen::ArrayXd mp(oc.n());
        total += mix_prior_sum(model.nu, mix_c, mp);
    }
    if (od.n() > 0) {
        Eigen::ArrayXd mu_d(od.n()), lld(od.n()), lpd(od.n());
        if (!compute_mu_deaths(P, od, mu_d)) return -kInf;
        total += obs_loglik(od, mu_d, w_d.exp(), lld);
        total += latent_prior_sum(model.fam_d, w_d, mix_d, P.hyper_d, lpd);
        if (model.fam_d == ErrorFamily::pls) {
            if (mix_d.size() != od.n()) throw_domain("model_log_target: death mixing-scale vector has wrong length");
            Eigen::ArrayXd mpd(od.n());
            total += mix_prior_sum(model.nu, mix_d, mpd);
        }
    } else if (model.bivariate && !(P.death.K > od.cum_final)) {
        return -kInf;
    }
    return total;
}

}  // namespace detail

PosteriorDraws run_chains(const ModelSpec& model_in, const SamplerConfig& cfg) {
    cfg.validate();
    const ModelSpec model = resolve_model(model_in);
    const int t_max = model.resolved_t_max();
    const Layout L = make_layout(model);

    const int first_c = first_likelihood_day(model.series.cum_cases, t_max);
    if (first_c == 0) throw_data("no case likelihood terms: the series never accumulates cases before the window end");
    const ObsData oc = make_obs(model.series.cases, model.series.cum_cases, t_max, first_c);
    const int first_d = model.bivariate ? first_likelihood_day(model.series.cum_deaths, t_max) : 0;
    const ObsData od = model.bivariate && first_d > 0
                           ? make_obs(model.series.deaths, model.series.cum_deaths, t_max, first_d)
                           : [&] {
                                 ObsData o;
                                 o.cum_final = model.bivariate ? model.series.cum_deaths[t_max - 1] : 0.0;
                                 return o;
                             }();

    PosteriorDraws out;
    out.model = model;
    out.n_sampled = L.n();
    for (const Site& s : L.sites) out.names.push_back(s.name);
    for (const std::string& n : derived_names(model)) out.names.push_back(n);
    out.first_case_day = first_c;
    out.first_death_day = first_d;
    out.chains.resize(static_cast<size_t>(cfg.n_chains));

    std::vector<std::exception_ptr> errors(static_cast<size_t>(cfg.n_chains));
    auto run_one = [&](int chain) {
        try {
            ChainRunner runner(model, L, oc, od, cfg, chain);
            out.chains[static_cast<size_t>(chain)] = runner.run();
        } catch (...) {
            errors[static_cast<size_t>(chain)] = std::current_exception();
        }
    };
    if (cfg.n_chains == 1) {
        run_one(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<size_t>(cfg.n_chains));
        for (int c = 0; c < cfg.n_chains; ++c) threads.emplace_back(run_one, c);
        for (std::thread& t : threads) t.join();
    }
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

std::vector<RhatResult> gelman_rubin(const PosteriorDraws& draws) {
    if (draws.chains.size() < 2) throw_config("split-Rhat needs at least 2 chains");
    for (const ChainDraws& c : draws.chains) {
        if (c.scalars.rows() < 10) throw_config("split-Rhat needs at least 10 retained draws per chain");
    }
    std::vector<RhatResult> out;
    const int n_cols = draws.n_cols();
    for (int col = 0; col < n_cols; ++col) {
        std::vector<double> means, vars;
        for (const ChainDraws& c : draws.chains) {
            const Eigen::Index n = c.scalars.rows();
            const Eigen::Index half = n / 2;
            for (int part = 0; part < 2; ++part) {
                const Eigen::ArrayXd seg =
                    c.scalars.col(col).segment(part == 0 ? 0 : n - half, half).array();
                const double mean = seg.mean();
                means.push_back(mean);
                vars.push_back((seg - mean).square().sum() / static_cast<double>(half - 1));
            }
        }
        const auto m = static_cast<double>(means.size());
        const double n2 = std::floor(static_cast<double>(draws.chains.front().scalars.rows()) / 2.0);
        const double W = Eigen::Map<const Eigen::ArrayXd>(vars.data(), static_cast<Eigen::Index>(vars.size())).mean();
        RhatResult r;
        r.name = draws.names[static_cast<size_t>(col)];
        r.sampled = col < draws.n_sampled;
        if (!(W > 0.0)) {
            r.rhat = 1.0;
            r.degenerate = true;
        } else {
            const Eigen::Map<const Eigen::ArrayXd> mu(means.data(), static_cast<Eigen::Index>(means.size()));
            const double grand = mu.mean();
            const double var_means = (mu - grand).square().sum() / (m - 1.0);
            const double var_plus = (n2 - 1.0) / n2 * W + var_means;
            r.rhat = std::sqrt(var_plus / W);
        }
        out.push_back(std::move(r));
    }
    return out;
}

bool converged(const std::vector<RhatResult>& rhats, double threshold) {
    for (const RhatResult& r : rhats) {
        if (r.sampled && !r.degenerate && !(r.rhat < threshold)) return false;
    }
    return true;
}

DrawParams draw_params(const PosteriorDraws& draws, int chain, int index) {
    const ModelSpec& m = draws.model;
    const auto row = draws.chains[static_cast<size_t>(chain)].scalars.row(index);
    auto value = [&](const std::string& name) {
        const int c = draws.col(name);
        if (c < 0) throw_data("draw table is missing column '" + name + "'");
        return row(c);
    };
    auto value_or = [&](const std::string& name, double fallback) {
        const int c = draws.col(name);
        return c < 0 ? fallback : row(c);
    };
    DrawParams P;
    const bool shape = has_shape_param(m.growth);
    double K = 0.0;
    for (int p = 1; p <= m.n_phases; ++p) {
        const std::string suf = m.bivariate ? "_c" : "_" + std::to_string(p);
        GrowthParams g;
        g.family = m.growth;
        g.r = value("r" + suf);
        g.a = shape ? value("a" + suf) : 1.0;
        if (p == 1) {
            K = value(m.bivariate ? "K_c" : "K_1");
        } else {
            K *= value("eta_" + std::to_string(p));
            P.cases.kappa.push_back(value("kappa_" + std::to_string(p)));
        }
        g.K = K;
        P.cases.phases.push_back(g);
    }
    const double hyper_col_c = value(hyper_name(m.fam_c, m.bivariate ? "_c" : ""));
    P.err_c.family = m.fam_c;
    P.err_c.nu = m.nu;
    if (m.fam_c == ErrorFamily::pg) {
        P.err_c.lambda = hyper_col_c;
    } else {
        P.err_c.sigma_eps = hyper_col_c;
    }
    if (m.bivariate) {
        P.has_death = true;
        P.death.family = m.growth;
        P.death.r = value("r_d");
        P.death.a = shape ? value("a_d") : 1.0;
        P.death.K = value("K_d");
        P.phi = value_or("phi", P.death.K / P.cases.phases.front().K);
        const double hyper_col_d = value(hyper_name(m.fam_d, "_d"));
        P.err_d.family = m.fam_d;
        P.err_d.nu = m.nu;
        if (m.fam_d == ErrorFamily::pg) {
            P.err_d.lambda = hyper_col_d;
        } else {
            P.err_d.sigma_eps = hyper_col_d;
        }
    }
    return P;
}

WaicReport waic(const PosteriorDraws& draws, const EpidemicSeries& series, int t_max) {
    if (t_max < 3 || t_max > series.days()) throw_domain("waic: window end out of range");
    const long S = draws.total_draws();
    if (S < 2) throw_domain("waic: need at least 2 retained draws");

    const ObsData oc = make_obs(series.cases, series.cum_cases, t_max, first_likelihood_day(series.cum_cases, t_max));
    const bool has_d = draws.first_death_day > 0;
    const ObsData od = has_d ? make_obs(series.deaths, series.cum_deaths, t_max,
                                        first_likelihood_day(series.cum_deaths, t_max))
                             : ObsData{};

    auto outcome = [&](const ObsData& obs, bool death_side) {
        Eigen::MatrixXd ll(obs.n(), S);  // day x draw
        long s = 0;
        for (size_t ch = 0; ch < draws.chains.size(); ++ch) {
            const ChainDraws& chain = draws.chains[ch];
            const Eigen::MatrixXd& eps = death_side ? chain.eps_deaths : chain.eps_cases;
            if (eps.cols() != obs.n()) {
                throw_data("waic: stored daily effects do not align with the likelihood days");
            }
            for (Eigen::Index k = 0; k < chain.scalars.rows(); ++k, ++s) {
                const DrawParams P = draw_params(draws, static_cast<int>(ch), static_cast<int>(k));
                for (int i = 0; i < obs.n(); ++i) {
                    const double mu =
                        death_side ? mean_incidence_raw(P.death, obs.cum_prev[static_cast<size_t>(i)])
                                   : multiphase_mean_raw(P.cases, obs.cum_prev[static_cast<size_t>(i)],
                                                         static_cast<double>(obs.day[static_cast<size_t>(i)]));
                    ll(i, s) = log_poisson_pmf_cached(obs.y[static_cast<size_t>(i)], mu * eps(k, i),
                                                      obs.lgam[static_cast<size_t>(i)]);
                }
            }
        }
        WaicOutcome w;
        const double logS = std::log(static_cast<double>(S));
        for (int i = 0; i < obs.n(); ++i) {
            const Eigen::ArrayXd day = ll.row(i).transpose().array();
            w.lppd += log_sum_exp(day) - logS;
            const double mean = day.mean();
            w.p_waic += (day - mean).square().sum() / static_cast<double>(S - 1);
        }
        w.waic = -2.0 * (w.lppd - w.p_waic);
        return w;
    };

    WaicReport rep;
    rep.cases = outcome(oc, false);
    rep.has_deaths = has_d;
    if (has_d) rep.deaths = outcome(od, true);
    rep.waic_total = rep.cases.waic + rep.deaths.waic;
    return rep;
}

SummaryTable summarize(const PosteriorDraws& draws, std::vector<double> probs) {
    SummaryTable tab;
    tab.probs = probs;
    for (int col = 0; col < draws.n_cols(); ++col) {
        const Eigen::ArrayXd pooled = draws.pooled(col);
        std::vector<double> sorted(pooled.data(), pooled.data() + pooled.size());
        std::sort(sorted.begin(), sorted.end());
        const Eigen::Map<const Eigen::ArrayXd> s(sorted.data(), static_cast<Eigen::Index>(sorted.size()));
        SummaryRow row;
        row.name = draws.names[static_cast<size_t>(col)];
        row.mean = pooled.mean();
        for (double p : probs) row.quantiles.push_back(quantile_sorted(s, p));
        tab.rows.push_back(std::move(row));
    }
    return tab;
}

double log_posterior(const ThetaBivariate& theta, const LatentEffects& lat_c, const LatentEffects& lat_d,
                     const EpidemicSeries& series, const PriorConfig& prior, GrowthFamily growth,
                     ErrorFamily fam_c, ErrorFamily fam_d, int t_max, std::string* reason) {
    if (t_max < 3 || t_max > series.days()) throw_domain("log_posterior: window end out of range");
    auto fail = [&](const char* what) {
        if (reason) *reason = what;
        return -kInf;
    };

    const double lp_theta = log_prior(theta, prior, growth, fam_c, fam_d, reason);
    if (!std::isfinite(lp_theta)) return -kInf;

    const GrowthParams gc{growth, theta.r_c, theta.K_c, theta.a_c};
    const GrowthParams gd{growth, theta.r_d, theta.k_d(), theta.a_d};
    if (!(gc.K > series.cum_cases[t_max - 1])) return fail("case final size at or below the observed total");
    if (!(gd.K > series.cum_deaths[t_max - 1])) return fail("death final size at or below the observed total");

    const ErrorSpec ec = fam_c == ErrorFamily::pg ? ErrorSpec::pg(theta.err_hyper_c)
                                                  : ErrorSpec{fam_c, 10.0, theta.err_hyper_c, 4.0};
    const ErrorSpec ed = fam_d == ErrorFamily::pg ? ErrorSpec::pg(theta.err_hyper_d)
                                                  : ErrorSpec{fam_d, 10.0, theta.err_hyper_d, 4.0};

    double total = lp_theta;
    auto add_outcome = [&](const Eigen::ArrayXd& counts, const Eigen::ArrayXd& cum, const GrowthParams& g,
                           const ErrorSpec& spec, const LatentEffects& lat, const char* label) {
        const int first = first_likelihood_day(cum, t_max);
        const int n = first > 0 ? t_max - first + 1 : 0;
        if (lat.eps.size() != n) {
            throw_domain(std::string("log_posterior: ") + label + " effect vector must have one entry per likelihood day");
        }
        if (spec.family == ErrorFamily::pls && lat.mix.size() != n) {
            throw_domain(std::string("log_posterior: ") + label + " mixing-scale vector must match the likelihood days");
        }
        for (int i = 0; i < n; ++i) {
            const int t = first + i;
            const double eps = lat.eps[i];
            if (!(eps > 0.0)) {
                total = -kInf;
                return false;
            }
            const double mu = mean_incidence_raw(g, cum[t - 2]);
            if (!(mu > 0.0) || !std::isfinite(mu)) {
                total = -kInf;
                return false;
            }
            total += log_obs(static_cast<long long>(counts[t - 1]), mu, eps);
            total += log_effect_prior(spec, eps,
                                      spec.family == ErrorFamily::pls ? std::optional<double>(lat.mix[i])
                                                                      : std::nullopt);
        }
        return true;
    };
    if (!add_outcome(series.cases, series.cum_cases, gc, ec, lat_c, "case")) return fail("case mean nonpositive");
    if (!add_outcome(series.deaths, series.cum_deaths, gd, ed, lat_d, "death")) return fail("death mean nonpositive");
    return total;
}

Eigen::MatrixXd insample_predicted_cases(const PosteriorDraws& draws) {
    const ModelSpec& m = draws.model;
    const int t_max = m.resolved_t_max();
    const long S = draws.total_draws();
    if (S == 0) throw_data("no retained draws");
    Eigen::MatrixXd out(S, t_max);
    long s = 0;
    for (size_t ch = 0; ch < draws.chains.size(); ++ch) {
        const ChainDraws& chain = draws.chains[ch];
        if (chain.eps_cases.cols() != t_max - draws.first_case_day + 1) {
            throw_data("stored daily effects do not align with the training window");
        }
        for (Eigen::Index k = 0; k < chain.scalars.rows(); ++k, ++s) {
            const DrawParams P = draw_params(draws, static_cast<int>(ch), static_cast<int>(k));
            out(s, 0) = m.series.cases[0];
            for (int t = 2; t <= t_max; ++t) {
                if (t < draws.first_case_day) {
                    out(s, t - 1) = m.series.cases[t - 1];
                    continue;
                }
                const int i = t - draws.first_case_day;
                const double mu = multiphase_mean_raw(P.cases, m.series.cum_cases[t - 2], static_cast<double>(t));
                out(s, t - 1) = mu * chain.eps_cases(k, i);
            }
        }
    }
    return out;
}

}  // namespace epifit
