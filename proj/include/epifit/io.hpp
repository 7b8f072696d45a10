#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "epifit/forecast.hpp"
#include "epifit/mcmc.hpp"
#include "epifit/rtestim.hpp"
#include "epifit/series.hpp"

namespace epifit {

/// Locale-independent float formatting: compact for report files, full
/// precision for artifacts that are read back by later commands.
std::string fmt_g(double v);
std::string fmt_full(double v);

/// FNV-1a 64-bit checksum of a file's bytes (manifest entries).
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex64(std::uint64_t v);

/// Flat key=value settings file with stable ordering. Blank lines and lines
/// starting with '#' are ignored on read.
struct KvFile {
    std::vector<std::pair<std::string, std::string>> items;

    void set(const std::string& key, const std::string& value);
    const std::string* find(const std::string& key) const;
    const std::string& require(const std::string& key) const;  ///< config error when absent
    std::string get_or(const std::string& key, const std::string& fallback) const;
};

void write_kv(const std::string& path, const KvFile& kv);
KvFile read_kv(const std::string& path);

/// Model and sampler settings round-trip (the series itself travels as its own
/// csv). t_max and burn-in are stored resolved.
KvFile settings_to_kv(const ModelSpec& model, const SamplerConfig& cfg);
void kv_to_settings(const KvFile& kv, ModelSpec& model, SamplerConfig& cfg);

// ---------------------------------------------------------------------------
// Run artifacts
// ---------------------------------------------------------------------------

void write_summary_csv(const std::string& path, const SummaryTable& table);
void write_rhat_csv(const std::string& path, const std::vector<RhatResult>& rhats);
void write_waic_csv(const std::string& path, const WaicReport& report);

/// Retained scalar draws, one row per (chain, iteration). Daily effects are
/// not stored; commands that need fresh effects draw them, and the in-sample
/// predicted-cases matrix is written separately at fit time.
void write_draws_csv(const std::string& path, const PosteriorDraws& draws);

/// Rebuilds posterior draws from a draws csv; `model` supplies everything the
/// file does not carry (series, families, priors).
PosteriorDraws read_draws_csv(const std::string& path, const ModelSpec& model);

void write_fan_csv(const std::string& path, const ForecastFan& fan, const Date& origin);
void write_crossval_csv(const std::string& path, const CrossValReport& report);
void write_rt_csv(const std::string& path, const RtSeries& rt, const Date& origin);

/// Dense matrix with a generated header col_1,col_2,... (full precision).
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m, const std::string& col_prefix);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

/// checksum <tab> filename, one line per artifact, in the order given.
void write_manifest(const std::string& path, const std::string& dir, const std::vector<std::string>& names);

}  // namespace epifit
