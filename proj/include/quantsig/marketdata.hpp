#pragma once

#include "quantsig/date.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace quantsig::marketdata {

struct OhlcvBar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double adj_close = 0.0;
    std::int64_t volume = 0;

    bool operator==(const OhlcvBar&) const = default;
};

/// Daily bars for one symbol, dates strictly increasing.
struct OhlcvSeries {
    std::string symbol;
    std::vector<OhlcvBar> bars;

    [[nodiscard]] std::size_t size() const noexcept { return bars.size(); }
    [[nodiscard]] std::vector<double> closes() const;
    [[nodiscard]] std::vector<double> volumes() const;

    bool operator==(const OhlcvSeries&) const = default;
};

struct ParsedSeries {
    OhlcvSeries series;
    std::size_t skipped_rows = 0;  ///< rows dropped for empty or "null" cells
};

/// Parses a Yahoo-style history export. Header must name Date, Open, High,
/// Low, Close and Volume (any order, case-insensitive); Adj Close is
/// optional and defaults to Close. Output is sorted ascending by date.
/// Throws Error{MalformedHeader | MalformedNumber | DuplicateDate | EmptySeries}.
ParsedSeries parse_ohlcv_csv(std::string_view text, std::string symbol = {});

/// Inverse of parse_ohlcv_csv; reals are written in shortest round-trip form.
std::string serialize_ohlcv_csv(const OhlcvSeries& series);

struct EndpointConfig {
    /// Placeholders: {symbol}, {start}, {end} (ISO dates) and
    /// {start_epoch}, {end_epoch} (Unix seconds at 00:00 UTC).
    std::string base_url =
        "https://query1.finance.yahoo.com/v7/finance/download/{symbol}"
        "?period1={start_epoch}&period2={end_epoch}&interval=1d&events=history";
    double timeout_seconds = 30.0;
    std::filesystem::path cache_dir = "cache";
};

/// Applies QUANTSIG_DATA_URL and QUANTSIG_CACHE when set.
EndpointConfig apply_env_overrides(EndpointConfig cfg);

std::string expand_url(const std::string& tmpl, std::string_view symbol, Date start, Date end);

/// `symbol_start_end.csv` inside the cache directory.
std::filesystem::path cache_path(const EndpointConfig& cfg, std::string_view symbol, Date start,
                                 Date end);

struct FetchResult {
    OhlcvSeries series;
    std::size_t skipped_rows = 0;
    bool cache_hit = false;
    std::filesystem::path cache_file;
};

/// Serves from the cache when the range file exists (unless `refresh`),
/// otherwise issues one GET, parses the body and stores it byte-for-byte.
/// Throws Error{InvalidArgument | NetworkError | SymbolNotFound} or any
/// parse error.
FetchResult fetch_history(std::string_view symbol, Date start, Date end,
                          const EndpointConfig& cfg, bool refresh = false);

enum class ViolationKind { PriceOrder, NonPositivePrice, NegativeVolume, Gap };

struct Violation {
    ViolationKind kind;
    std::size_t index;  ///< offending bar; for gaps, the bar after the gap
    std::string detail;
};

/// Report-only check of bar invariants and calendar gaps wider than
/// `max_gap_days`.
std::vector<Violation> validate_series(const OhlcvSeries& series, int max_gap_days = 7);

std::string_view to_string(ViolationKind kind);

}  // namespace quantsig::marketdata
