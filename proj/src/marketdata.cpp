#include "quantsig/marketdata.hpp"

#include "quantsig/error.hpp"
#include "quantsig/io.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

namespace quantsig::marketdata {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_missing(const std::string& cell) {
    const std::string t = lower(io::trim(cell));
    return t.empty() || t == "null" || t == "nan";
}

bool parse_volume(const std::string& cell, std::int64_t& out) {
    double v = 0.0;
    if (!io::parse_real(cell, v)) return false;
    if (v != std::floor(v) || std::fabs(v) > 9.0e15) return false;
    out = static_cast<std::int64_t>(v);
    return true;
}

// One mutex per cache file so concurrent fetches of different symbols
// proceed independently.
std::mutex& cache_file_mutex(const std::filesystem::path& p) {
    static std::mutex registry_mutex;
    static std::map<std::string, std::unique_ptr<std::mutex>> registry;
    std::lock_guard lock(registry_mutex);
    auto& slot = registry[std::filesystem::absolute(p).lexically_normal().string()];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
        s.replace(pos, from.size(), to);
    }
}

}  // namespace

std::vector<double> OhlcvSeries::closes() const {
    std::vector<double> out;
    out.reserve(bars.size());
    for (const auto& b : bars) out.push_back(b.close);
    return out;
}

std::vector<double> OhlcvSeries::volumes() const {
    std::vector<double> out;
    out.reserve(bars.size());
    for (const auto& b : bars) out.push_back(static_cast<double>(b.volume));
    return out;
}

ParsedSeries parse_ohlcv_csv(std::string_view text, std::string symbol) {
    std::vector<std::size_t> lines;
    const auto rows = io::parse_csv(text, &lines);
    if (rows.empty()) throw Error(Errc::MalformedHeader, "document has no header row");

    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < rows[0].size(); ++i) col[lower(io::trim(rows[0][i]))] = i;
    auto need = [&](const char* name) {
        auto it = col.find(name);
        if (it == col.end()) throw Error(Errc::MalformedHeader, std::string("missing column ") + name);
        return it->second;
    };
    const std::size_t c_date = need("date");
    const std::size_t c_open = need("open");
    const std::size_t c_high = need("high");
    const std::size_t c_low = need("low");
    const std::size_t c_close = need("close");
    const std::size_t c_volume = need("volume");
    std::optional<std::size_t> c_adj;
    if (auto it = col.find("adj close"); it != col.end()) c_adj = it->second;

    ParsedSeries out;
    out.series.symbol = std::move(symbol);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string where = "row " + std::to_string(r) + " (line " + std::to_string(lines[r]) + ")";
        auto cell = [&](std::size_t c) -> std::string { return c < row.size() ? row[c] : std::string{}; };

        const auto date = Date::parse(io::trim(cell(c_date)));
        if (!date) throw Error(Errc::MalformedNumber, where + ": bad date '" + cell(c_date) + "'");

        const std::size_t price_cols[] = {c_open, c_high, c_low, c_close, c_volume};
        bool missing = std::any_of(std::begin(price_cols), std::end(price_cols),
                                   [&](std::size_t c) { return is_missing(cell(c)); });
        if (c_adj && is_missing(cell(*c_adj))) missing = true;
        if (missing) {
            ++out.skipped_rows;
            continue;
        }

        OhlcvBar bar;
        bar.date = *date;
        auto real = [&](std::size_t c, const char* name) {
            double v = 0.0;
            if (!io::parse_real(cell(c), v))
                throw Error(Errc::MalformedNumber, where + ": bad " + name + " '" + cell(c) + "'");
            return v;
        };
        bar.open = real(c_open, "open");
        bar.high = real(c_high, "high");
        bar.low = real(c_low, "low");
        bar.close = real(c_close, "close");
        bar.adj_close = c_adj ? real(*c_adj, "adj close") : bar.close;
        if (!parse_volume(cell(c_volume), bar.volume))
            throw Error(Errc::MalformedNumber, where + ": bad volume '" + cell(c_volume) + "'");
        out.series.bars.push_back(bar);
    }

    if (out.series.bars.empty()) throw Error(Errc::EmptySeries, "no usable rows");
    auto& bars = out.series.bars;
    std::stable_sort(bars.begin(), bars.end(),
                     [](const OhlcvBar& a, const OhlcvBar& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < bars.size(); ++i) {
        if (bars[i].date == bars[i - 1].date)
            throw Error(Errc::DuplicateDate, bars[i].date.iso());
    }
    return out;
}

std::string serialize_ohlcv_csv(const OhlcvSeries& series) {
    std::string out = "Date,Open,High,Low,Close,Adj Close,Volume\n";
    for (const auto& b : series.bars) {
        out += b.date.iso();
        for (double v : {b.open, b.high, b.low, b.close, b.adj_close}) {
            out += ',';
            out += io::format_real(v);
        }
        out += ',';
        out += std::to_string(b.volume);
        out += '\n';
    }
    return out;
}

EndpointConfig apply_env_overrides(EndpointConfig cfg) {
    if (const char* url = std::getenv("QUANTSIG_DATA_URL"); url && *url) cfg.base_url = url;
    if (const char* dir = std::getenv("QUANTSIG_CACHE"); dir && *dir) cfg.cache_dir = dir;
    return cfg;
}

std::string expand_url(const std::string& tmpl, std::string_view symbol, Date start, Date end) {
    std::string url = tmpl;
    replace_all(url, "{symbol}", symbol);
    replace_all(url, "{start_epoch}", std::to_string(start.days() * 86400));
    replace_all(url, "{end_epoch}", std::to_string(end.days() * 86400));
    replace_all(url, "{start}", start.iso());
    replace_all(url, "{end}", end.iso());
    return url;
}

std::filesystem::path cache_path(const EndpointConfig& cfg, std::string_view symbol, Date start,
                                 Date end) {
    return cfg.cache_dir / (std::string(symbol) + "_" + start.iso() + "_" + end.iso() + ".csv");
}

FetchResult fetch_history(std::string_view symbol, Date start, Date end,
                          const EndpointConfig& cfg, bool refresh) {
    if (!(start < end)) throw Error(Errc::InvalidArgument, "start must precede end");
    if (symbol.empty()) throw Error(Errc::InvalidArgument, "empty symbol");
    if (!(cfg.timeout_seconds > 0.0)) throw Error(Errc::InvalidArgument, "timeout must be positive");

    FetchResult result;
    result.cache_file = cache_path(cfg, symbol, start, end);
    std::lock_guard lock(cache_file_mutex(result.cache_file));

    if (!refresh && std::filesystem::exists(result.cache_file)) {
        auto parsed = parse_ohlcv_csv(io::read_file(result.cache_file), std::string(symbol));
        result.series = std::move(parsed.series);
        result.skipped_rows = parsed.skipped_rows;
        result.cache_hit = true;
        return result;
    }

    const std::string url = expand_url(cfg.base_url, symbol, start, end);
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(Errc::NetworkError, "URL lacks a scheme: " + url);
    const auto path_begin = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_begin);
    const std::string target = path_begin == std::string::npos ? "/" : url.substr(path_begin);

    httplib::Client client(origin);
    const auto secs = static_cast<time_t>(cfg.timeout_seconds);
    const auto usecs = static_cast<time_t>((cfg.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_follow_location(true);
    auto res = client.Get(target);
    if (!res) throw Error(Errc::NetworkError, url + ": " + httplib::to_string(res.error()));
    if (res->status == 404) throw Error(Errc::SymbolNotFound, std::string(symbol));
    if (res->status != 200)
        throw Error(Errc::NetworkError, url + ": HTTP " + std::to_string(res->status));

    auto parsed = parse_ohlcv_csv(res->body, std::string(symbol));
    io::write_file_atomic(result.cache_file, res->body);
    result.series = std::move(parsed.series);
    result.skipped_rows = parsed.skipped_rows;
    return result;
}

std::vector<Violation> validate_series(const OhlcvSeries& series, int max_gap_days) {
    std::vector<Violation> out;
    const auto& bars = series.bars;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const auto& b = bars[i];
        const std::string day = b.date.iso();
        if (!(b.open > 0 && b.high > 0 && b.low > 0 && b.close > 0 && b.adj_close > 0)) {
            out.push_back({ViolationKind::NonPositivePrice, i, day + ": non-positive price"});
        }
        if (!(b.low <= std::min(b.open, b.close) && b.high >= std::max(b.open, b.close))) {
            out.push_back({ViolationKind::PriceOrder, i, day + ": open/close outside [low, high]"});
        }
        if (b.volume < 0) out.push_back({ViolationKind::NegativeVolume, i, day + ": negative volume"});
        if (i > 0) {
            const auto gap = b.date.days() - bars[i - 1].date.days();
            if (gap > max_gap_days) {
                out.push_back({ViolationKind::Gap, i,
                               bars[i - 1].date.iso() + " -> " + day + ": " + std::to_string(gap) + " days"});
            }
        }
    }
    return out;
}

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::PriceOrder: return "price-order";
        case ViolationKind::NonPositivePrice: return "non-positive-price";
        case ViolationKind::NegativeVolume: return "negative-volume";
        case ViolationKind::Gap: return "gap";
    }
    return "unknown";
}

}  // namespace quantsig::marketdata
