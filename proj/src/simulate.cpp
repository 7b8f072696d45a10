#include "epifit/simulate.hpp"

#include <cmath>

namespace epifit {

void SimSpec::validate() const {
    cases.validate();
    err_c.validate();
    if (t_max < 3) throw_config("simulation needs at least three days");
    if (!(c1 >= 1.0)) throw_config("day-one case count must be at least 1");
    if (with_deaths) {
        death.validate();
        err_d.validate();
        if (!(d1 >= 0.0)) throw_config("day-one death count cannot be negative");
    }
}

SimOutput simulate_epidemic(const SimSpec& spec) {
    spec.validate();
    const int T = spec.t_max;
    Rng rng(mix_seed(spec.seed, 0));

    SimOutput out;
    out.series.origin = spec.origin;
    out.series.cases.setZero(T);
    out.series.deaths.setZero(T);
    out.mu_cases.setZero(T);
    out.mu_deaths.setZero(T);

    out.series.cases[0] = spec.c1;
    out.series.deaths[0] = spec.with_deaths ? spec.d1 : 0.0;

    double cum_c = spec.c1;
    double cum_d = out.series.deaths[0];
    for (int t = 2; t <= T; ++t) {
        double mu_c = multiphase_mean_raw(spec.cases, cum_c, static_cast<double>(t));
        if (!(mu_c > 0.0) || !std::isfinite(mu_c)) mu_c = 0.0;
        out.mu_cases[t - 1] = mu_c;
        double y_c = 0.0;
        if (spec.deterministic) {
            y_c = std::round(mu_c);
        } else if (mu_c > 0.0) {
            const double eps = draw_effect(spec.err_c, rng);
            y_c = static_cast<double>(draw_poisson(rng, mu_c * eps));
        }
        out.series.cases[t - 1] = y_c;
        cum_c += y_c;

        if (spec.with_deaths && cum_d > 0.0) {
            double mu_d = mean_incidence_raw(spec.death, cum_d);
            if (!(mu_d > 0.0) || !std::isfinite(mu_d)) mu_d = 0.0;
            out.mu_deaths[t - 1] = mu_d;
            double y_d = 0.0;
            if (spec.deterministic) {
                y_d = std::round(mu_d);
            } else if (mu_d > 0.0) {
                const double eps = draw_effect(spec.err_d, rng);
                y_d = static_cast<double>(draw_poisson(rng, mu_d * eps));
            }
            out.series.deaths[t - 1] = y_d;
            cum_d += y_d;
        }
    }

    out.series.cum_cases.setZero(T);
    out.series.cum_deaths.setZero(T);
    double cc = 0.0, cd = 0.0;
    for (int i = 0; i < T; ++i) {
        cc += out.series.cases[i];
        cd += out.series.deaths[i];
        out.series.cum_cases[i] = cc;
        out.series.cum_deaths[i] = cd;
    }
    return out;
}

}  // namespace epifit
