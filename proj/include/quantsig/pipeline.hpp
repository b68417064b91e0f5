#pragma once

#include "quantsig/feature_matrix.hpp"
#include "quantsig/indicators.hpp"
#include "quantsig/marketdata.hpp"
#include "quantsig/models.hpp"
#include "quantsig/textcorpus.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace quantsig::pipeline {

enum class ExitCode : int { ok = 0, usage = 1, data = 2, training = 3 };

/// A failed command with the process exit code it maps to.
class CommandError : public std::runtime_error {
public:
    CommandError(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

/// Everything a run depends on. Parsed from a flat `key = value` file; see
/// config_keys() for the full list with defaults.
struct RunConfig {
    std::string symbol = "AAPL";
    std::string start = "2010-01-01";
    std::string end = "2021-12-31";
    marketdata::EndpointConfig endpoint;
    std::string price_csv;   ///< local OHLCV file; bypasses fetch when set
    std::string tweets_csv = "data/tweets_fixture.csv";
    textcorpus::CorpusColumns columns;

    indicators::IndicatorConfig indicators;
    int horizon = 0;  ///< target is close[t + horizon]

    std::array<double, 3> split{0.70, 0.15, 0.15};
    std::size_t top_k = 10;
    double redundancy = 0.95;
    std::string scaler_fit = "train";  ///< only "train" is accepted

    std::string pca_components = "auto";  ///< "auto", "none" or a count
    double pca_variance = 0.95;
    std::size_t vocab_min_df = 2;
    std::size_t vocab_max_size = 500;
    bool shuffle = false;  ///< sentiment split: seeded shuffle before splitting

    std::string model;  ///< empty: "linear" for prices, "all" for sentiment
    models::TrainConfig train;
    /// `<family>.<training key> = value` entries, applied on top of `train`
    /// for that family only, e.g. `lr.epochs = 5000`.
    std::map<std::string, std::map<std::string, std::string>> family_overrides;
    std::string out = "out";
};

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
};

/// Every accepted key with its default and meaning, sorted by name.
const std::vector<ConfigKey>& config_keys();

/// Throws Error{ConfigError} on unknown or repeated keys and bad values.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Sets one key; same validation as the file parser.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Training config for one family: `train` plus that family's overrides.
models::TrainConfig train_config_for(const RunConfig& cfg, std::string_view family);

/// `key=value` lines for every key, sorted, then family overrides; `out`
/// is excluded.
std::string canonical_config(const RunConfig& cfg);

/// 16 hex digits of 64-bit FNV-1a over canonical_config.
std::string config_hash(const RunConfig& cfg);

/// Checks cross-key constraints. Throws Error{ConfigError}.
void validate_config(const RunConfig& cfg);

/// Price history from price_csv or the configured endpoint.
struct PriceInput {
    marketdata::OhlcvSeries series;
    std::string source;  ///< file path or cache file
    bool cache_hit = false;
    std::size_t skipped_rows = 0;
};

// Every command below throws CommandError with its exit code and writes
// files only after all computation has succeeded.

PriceInput load_prices(const RunConfig& cfg, bool refresh);

/// Writes features.csv and manifest.txt; returns the frame.
FeatureMatrix cmd_features(const RunConfig& cfg, bool refresh, std::ostream& log);

struct RunSummary {
    std::filesystem::path out_dir;
    std::vector<std::string> files;  ///< written, relative to out_dir
    std::string metrics_text;        ///< the plain-text table
};

/// model: "linear" or "lstm".
RunSummary cmd_train_price(const RunConfig& cfg, bool refresh, std::ostream& log);

/// model: one family, a comma list, or "all".
RunSummary cmd_train_sentiment(const RunConfig& cfg, std::ostream& log);

/// Side-by-side comparison of bundles. Runs with the same config hash are
/// merged. Throws CommandError(data) with a MissingManifest message.
struct MergedReport {
    std::string kind;  ///< "price" or "sentiment"
    std::vector<std::string> columns;
    std::vector<std::string> notes;  ///< config mismatches and skipped duplicates
    std::string csv;
    std::string text;
};
MergedReport cmd_report(const std::vector<std::filesystem::path>& run_dirs);

/// Reads a manifest.txt into key/value pairs. Throws Error{MissingManifest}.
std::map<std::string, std::string> read_manifest(const std::filesystem::path& run_dir);

/// Display name used as a table column: "Linear Regression", "LSTM", "SVM", ...
std::string display_name(std::string_view family);

}  // namespace quantsig::pipeline
