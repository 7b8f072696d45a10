#include "epifit/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace epifit {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw_data("expected a number for " + what + ", got '" + s + "'");
    }
}

long to_long(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw_data("expected an integer for " + what + ", got '" + s + "'");
    }
}

bool to_bool(const std::string& s, const std::string& what) {
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false") return false;
    throw_data("expected a boolean (0/1) for " + what + ", got '" + s + "'");
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw_data("cannot open '" + path + "' for writing");
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw_data("cannot open '" + path + "' for reading");
    return f;
}

/// "2.5" rather than "2.500000" for quantile column labels.
std::string prob_label(double p) {
    std::string s = fmt("%g", 100.0 * p);
    return s;
}

}  // namespace

std::string fmt_g(double v) { return fmt("%.10g", v); }
std::string fmt_full(double v) { return fmt("%.17g", v); }

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream f = open_in(path);
    std::uint64_t h = 14695981039346656037ULL;
    char buf[65536];
    while (f) {
        f.read(buf, sizeof(buf));
        const std::streamsize n = f.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void KvFile::set(const std::string& key, const std::string& value) {
    for (auto& kv : items) {
        if (kv.first == key) {
            kv.second = value;
            return;
        }
    }
    items.emplace_back(key, value);
}

const std::string* KvFile::find(const std::string& key) const {
    for (const auto& kv : items) {
        if (kv.first == key) return &kv.second;
    }
    return nullptr;
}

const std::string& KvFile::require(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) throw_config("settings file is missing key '" + key + "'");
    return *v;
}

std::string KvFile::get_or(const std::string& key, const std::string& fallback) const {
    const std::string* v = find(key);
    return v ? *v : fallback;
}

void write_kv(const std::string& path, const KvFile& kv) {
    std::ofstream f = open_out(path);
    for (const auto& item : kv.items) f << item.first << " = " << item.second << "\n";
}

KvFile read_kv(const std::string& path) {
    std::ifstream f = open_in(path);
    KvFile kv;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw_data(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        kv.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return kv;
}

KvFile settings_to_kv(const ModelSpec& model, const SamplerConfig& cfg) {
    KvFile kv;
    kv.set("model.growth", to_string(model.growth));
    kv.set("model.bivariate", model.bivariate ? "1" : "0");
    kv.set("model.n_phases", std::to_string(model.n_phases));
    kv.set("model.t_max", std::to_string(model.resolved_t_max()));
    kv.set("model.family_cases", to_string(model.fam_c));
    kv.set("model.family_deaths", to_string(model.fam_d));
    kv.set("model.nu", fmt_g(model.nu));
    kv.set("model.k_link", model.k_link == KLinkMode::phi_link ? "phi" : "independent");
    kv.set("model.allow_negative_mean", model.allow_negative_mean ? "1" : "0");
    kv.set("prior.rate_prior_mean", fmt_g(model.prior.rate_prior_mean));
    kv.set("prior.k_log_mean", fmt_full(model.prior.k_log_mean));
    kv.set("prior.k_log_var", fmt_g(model.prior.k_log_var));
    kv.set("prior.cfr_ref", fmt_g(model.prior.cfr_ref));
    kv.set("prior.cfr_count", fmt_g(model.prior.cfr_count));
    kv.set("prior.hyper_shape", fmt_g(model.prior.hyper_shape));
    kv.set("prior.hyper_rate", fmt_g(model.prior.hyper_rate));
    kv.set("phase.kappa_prior_mean", fmt_g(model.phase_priors.kappa_prior_mean));
    kv.set("phase.eta_prior_mean", fmt_g(model.phase_priors.eta_prior_mean));
    kv.set("sampler.n_chains", std::to_string(cfg.n_chains));
    kv.set("sampler.n_iter", std::to_string(cfg.n_iter));
    kv.set("sampler.burn_in", std::to_string(cfg.resolved_burn_in()));
    kv.set("sampler.thin", std::to_string(cfg.thin));
    kv.set("sampler.target_accept", fmt_g(cfg.target_accept));
    kv.set("sampler.adapt_window", std::to_string(cfg.adapt_window));
    kv.set("sampler.rhat_threshold", fmt_g(cfg.rhat_threshold));
    kv.set("sampler.seed", std::to_string(cfg.seed));
    return kv;
}

void kv_to_settings(const KvFile& kv, ModelSpec& model, SamplerConfig& cfg) {
    model.growth = growth_family_from_string(kv.require("model.growth"));
    model.bivariate = to_bool(kv.require("model.bivariate"), "model.bivariate");
    model.n_phases = static_cast<int>(to_long(kv.require("model.n_phases"), "model.n_phases"));
    model.t_max = static_cast<int>(to_long(kv.require("model.t_max"), "model.t_max"));
    model.fam_c = error_family_from_string(kv.require("model.family_cases"));
    model.fam_d = error_family_from_string(kv.require("model.family_deaths"));
    model.nu = to_double(kv.require("model.nu"), "model.nu");
    const std::string link = kv.require("model.k_link");
    if (link == "phi") {
        model.k_link = KLinkMode::phi_link;
    } else if (link == "independent") {
        model.k_link = KLinkMode::independent;
    } else {
        throw_config("model.k_link must be 'phi' or 'independent', got '" + link + "'");
    }
    model.allow_negative_mean = to_bool(kv.require("model.allow_negative_mean"), "model.allow_negative_mean");
    model.prior.rate_prior_mean = to_double(kv.require("prior.rate_prior_mean"), "prior.rate_prior_mean");
    model.prior.k_log_mean = to_double(kv.require("prior.k_log_mean"), "prior.k_log_mean");
    model.prior.k_log_var = to_double(kv.require("prior.k_log_var"), "prior.k_log_var");
    model.prior.cfr_ref = to_double(kv.require("prior.cfr_ref"), "prior.cfr_ref");
    model.prior.cfr_count = to_double(kv.require("prior.cfr_count"), "prior.cfr_count");
    model.prior.hyper_shape = to_double(kv.require("prior.hyper_shape"), "prior.hyper_shape");
    model.prior.hyper_rate = to_double(kv.require("prior.hyper_rate"), "prior.hyper_rate");
    model.phase_priors.kappa_prior_mean = to_double(kv.require("phase.kappa_prior_mean"), "phase.kappa_prior_mean");
    model.phase_priors.eta_prior_mean = to_double(kv.require("phase.eta_prior_mean"), "phase.eta_prior_mean");
    cfg.n_chains = static_cast<int>(to_long(kv.require("sampler.n_chains"), "sampler.n_chains"));
    cfg.n_iter = to_long(kv.require("sampler.n_iter"), "sampler.n_iter");
    cfg.burn_in = to_long(kv.require("sampler.burn_in"), "sampler.burn_in");
    cfg.thin = static_cast<int>(to_long(kv.require("sampler.thin"), "sampler.thin"));
    cfg.target_accept = to_double(kv.require("sampler.target_accept"), "sampler.target_accept");
    cfg.adapt_window = static_cast<int>(to_long(kv.require("sampler.adapt_window"), "sampler.adapt_window"));
    cfg.rhat_threshold = to_double(kv.require("sampler.rhat_threshold"), "sampler.rhat_threshold");
    cfg.seed = static_cast<std::uint64_t>(to_long(kv.require("sampler.seed"), "sampler.seed"));
}

void write_summary_csv(const std::string& path, const SummaryTable& table) {
    std::ofstream f = open_out(path);
    f << "name,mean";
    for (double p : table.probs) f << ",q" << prob_label(p);
    f << "\n";
    for (const SummaryRow& row : table.rows) {
        f << row.name << "," << fmt_g(row.mean);
        for (double q : row.quantiles) f << "," << fmt_g(q);
        f << "\n";
    }
}

void write_rhat_csv(const std::string& path, const std::vector<RhatResult>& rhats) {
    std::ofstream f = open_out(path);
    f << "name,rhat,degenerate,sampled\n";
    for (const RhatResult& r : rhats) {
        f << r.name << "," << fmt_g(r.rhat) << "," << (r.degenerate ? 1 : 0) << "," << (r.sampled ? 1 : 0) << "\n";
    }
}

void write_waic_csv(const std::string& path, const WaicReport& report) {
    std::ofstream f = open_out(path);
    f << "component,lppd,p_waic,waic\n";
    auto row = [&f](const char* name, const WaicOutcome& w) {
        f << name << "," << fmt_g(w.lppd) << "," << fmt_g(w.p_waic) << "," << fmt_g(w.waic) << "\n";
    };
    row("cases", report.cases);
    if (report.has_deaths) {
        row("deaths", report.deaths);
        f << "total," << fmt_g(report.cases.lppd + report.deaths.lppd) << ","
          << fmt_g(report.cases.p_waic + report.deaths.p_waic) << "," << fmt_g(report.waic_total) << "\n";
    } else {
        f << "total," << fmt_g(report.cases.lppd) << "," << fmt_g(report.cases.p_waic) << ","
          << fmt_g(report.waic_total) << "\n";
    }
}

void write_draws_csv(const std::string& path, const PosteriorDraws& draws) {
    std::ofstream f = open_out(path);
    f << "chain,iteration";
    for (const std::string& n : draws.names) f << "," << n;
    f << ",log_target\n";
    for (size_t c = 0; c < draws.chains.size(); ++c) {
        const ChainDraws& ch = draws.chains[c];
        for (Eigen::Index i = 0; i < ch.scalars.rows(); ++i) {
            f << (c + 1) << "," << ch.iterations[static_cast<size_t>(i)];
            for (Eigen::Index j = 0; j < ch.scalars.cols(); ++j) f << "," << fmt_full(ch.scalars(i, j));
            f << "," << fmt_full(ch.log_target[i]) << "\n";
        }
    }
}

PosteriorDraws read_draws_csv(const std::string& path, const ModelSpec& model) {
    model.validate();
    std::ifstream f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw_data(path + ": empty draws file");
    std::vector<std::string> header = split_commas(line);
    if (header.size() < 4 || header[0] != "chain" || header[1] != "iteration" || header.back() != "log_target") {
        throw_data(path + ": not a draws file (expected chain,iteration,...,log_target header)");
    }

    PosteriorDraws out;
    out.model = model;
    out.names.assign(header.begin() + 2, header.end() - 1);

    const std::vector<std::string> sampled = detail::sampled_names(model);
    if (out.names.size() < sampled.size()) throw_data(path + ": draws file does not match the run settings");
    for (size_t i = 0; i < sampled.size(); ++i) {
        if (out.names[i] != sampled[i]) {
            throw_data(path + ": column '" + out.names[i] + "' does not match expected '" + sampled[i]
                       + "'; draws file does not match the run settings");
        }
    }
    out.n_sampled = static_cast<int>(sampled.size());
    const int tm = model.resolved_t_max();
    out.first_case_day = first_likelihood_day(model.series.cum_cases, tm);
    out.first_death_day = model.bivariate ? first_likelihood_day(model.series.cum_deaths, tm) : 0;

    const size_t n_cols = out.names.size();
    struct Row {
        long iter;
        std::vector<double> vals;
        double lt;
    };
    std::vector<long> chain_ids;
    std::vector<std::vector<Row>> per_chain;
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::vector<std::string> parts = split_commas(line);
        if (parts.size() != n_cols + 3) {
            throw_data(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(n_cols + 3) + " fields");
        }
        const std::string where = path + ":" + std::to_string(lineno);
        const long chain = to_long(parts[0], where + " chain");
        Row row;
        row.iter = to_long(parts[1], where + " iteration");
        row.vals.resize(n_cols);
        for (size_t j = 0; j < n_cols; ++j) row.vals[j] = to_double(parts[2 + j], where + " " + out.names[j]);
        row.lt = to_double(parts.back(), where + " log_target");
        size_t idx = 0;
        for (; idx < chain_ids.size(); ++idx) {
            if (chain_ids[idx] == chain) break;
        }
        if (idx == chain_ids.size()) {
            chain_ids.push_back(chain);
            per_chain.emplace_back();
        }
        per_chain[idx].push_back(std::move(row));
    }
    if (per_chain.empty()) throw_data(path + ": no draws");

    for (const std::vector<Row>& rows : per_chain) {
        ChainDraws ch;
        const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
        ch.scalars.resize(n, static_cast<Eigen::Index>(n_cols));
        ch.log_target.resize(n);
        ch.iterations.reserve(rows.size());
        for (Eigen::Index i = 0; i < n; ++i) {
            const Row& r = rows[static_cast<size_t>(i)];
            for (size_t j = 0; j < n_cols; ++j) ch.scalars(i, static_cast<Eigen::Index>(j)) = r.vals[j];
            ch.log_target[i] = r.lt;
            ch.iterations.push_back(r.iter);
        }
        out.chains.push_back(std::move(ch));
    }
    return out;
}

void write_fan_csv(const std::string& path, const ForecastFan& fan, const Date& origin) {
    std::ofstream f = open_out(path);
    auto block_header = [&f, &fan](const char* stem) {
        f << "," << stem << "_mean";
        for (double p : fan.probs) f << "," << stem << "_q" << prob_label(p);
    };
    f << "day_index,date";
    block_header("new_cases");
    block_header("cum_cases");
    if (fan.has_deaths) {
        block_header("new_deaths");
        block_header("cum_deaths");
    }
    f << "\n";
    for (int h = 0; h < fan.F; ++h) {
        const int day = fan.M + 1 + h;
        f << day << "," << origin.plus_days(day - 1).iso();
        auto block = [&f, h](const Eigen::ArrayXd& mean, const Eigen::MatrixXd& q) {
            f << "," << fmt_g(mean[h]);
            for (Eigen::Index j = 0; j < q.cols(); ++j) f << "," << fmt_g(q(h, j));
        };
        block(fan.new_cases_mean, fan.new_cases_q);
        block(fan.cum_cases_mean, fan.cum_cases_q);
        if (fan.has_deaths) {
            block(fan.new_deaths_mean, fan.new_deaths_q);
            block(fan.cum_deaths_mean, fan.cum_deaths_q);
        }
        f << "\n";
    }
}

void write_crossval_csv(const std::string& path, const CrossValReport& report) {
    std::ofstream f = open_out(path);
    f << "outcome,actual_avg,pred_avg_mean,pred_avg_lo,pred_avg_hi,omega,covered,verdict\n";
    auto row = [&f](const char* name, const CrossValOutcome& o) {
        f << name << "," << fmt_g(o.actual_avg) << "," << fmt_g(o.pred_avg_mean) << "," << fmt_g(o.pred_avg_lo)
          << "," << fmt_g(o.pred_avg_hi) << "," << fmt_g(o.omega) << "," << (o.covered ? 1 : 0) << "," << o.verdict
          << "\n";
    };
    row("cases", report.cases);
    if (report.has_deaths) row("deaths", report.deaths);
}

void write_rt_csv(const std::string& path, const RtSeries& rt, const Date& origin) {
    std::ofstream f = open_out(path);
    f << "day_index,date,mean,lo,hi,ma5,defined,significant_above_1\n";
    for (size_t i = 0; i < rt.day.size(); ++i) {
        const Eigen::Index k = static_cast<Eigen::Index>(i);
        f << rt.day[i] << "," << origin.plus_days(rt.day[i] - 1).iso() << ",";
        if (rt.defined[i]) {
            f << fmt_g(rt.mean[k]) << "," << fmt_g(rt.lo[k]) << "," << fmt_g(rt.hi[k]);
        } else {
            f << ",,";
        }
        f << ",";
        if (std::isfinite(rt.ma5[k])) f << fmt_g(rt.ma5[k]);
        f << "," << int(rt.defined[i]) << "," << int(rt.sig_above_1[i]) << "\n";
    }
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m, const std::string& col_prefix) {
    std::ofstream f = open_out(path);
    for (Eigen::Index j = 0; j < m.cols(); ++j) f << (j ? "," : "") << col_prefix << "_" << (j + 1);
    f << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) f << (j ? "," : "") << fmt_full(m(i, j));
        f << "\n";
    }
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    std::ifstream f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw_data(path + ": empty matrix file");
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    size_t n_cols = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::vector<std::string> parts = split_commas(line);
        if (n_cols == 0) n_cols = parts.size();
        if (parts.size() != n_cols) {
            throw_data(path + ":" + std::to_string(lineno) + ": ragged row (expected " + std::to_string(n_cols)
                       + " fields)");
        }
        std::vector<double> row(n_cols);
        for (size_t j = 0; j < n_cols; ++j) {
            row[j] = to_double(parts[j], path + ":" + std::to_string(lineno));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw_data(path + ": matrix has no data rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = 0; j < n_cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

void write_manifest(const std::string& path, const std::string& dir, const std::vector<std::string>& names) {
    std::ofstream f = open_out(path);
    for (const std::string& name : names) {
        f << hex64(fnv1a64_file(dir + "/" + name)) << "\t" << name << "\n";
    }
}

}  // namespace epifit
