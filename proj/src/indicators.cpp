#include "quantsig/indicators.hpp"

#include "quantsig/error.hpp"

#include <algorithm>
#include <string>

namespace quantsig::indicators {

void IndicatorConfig::validate() const {
    auto positive = [](const std::vector<int>& v, const char* what) {
        for (int x : v) {
            if (x < 1) throw Error(Errc::InvalidArgument, std::string(what) + " must be >= 1");
        }
    };
    positive(sma_windows, "sma window");
    positive(ema_spans, "ema span");
    positive(lag_depths, "lag depth");
    if (macd_short < 1 || macd_long < 1) throw Error(Errc::InvalidArgument, "macd spans must be >= 1");
    if (macd_short == macd_long) throw Error(Errc::InvalidArgument, "macd spans must differ");
    if (rsi_period < 1) throw Error(Errc::InvalidArgument, "rsi period must be >= 1");
}

std::size_t IndicatorSeries::defined_from() const {
    auto it = std::find_if(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
    return static_cast<std::size_t>(it - values.begin());
}

IndicatorSeries sma(std::span<const double> closes, int window) {
    const auto n = closes.size();
    if (window < 1 || static_cast<std::size_t>(window) >= n)
        throw Error(Errc::WindowTooLarge, "sma window " + std::to_string(window) + " for " +
                                              std::to_string(n) + " closes");
    const auto w = static_cast<std::size_t>(window);
    IndicatorSeries out{"sma_" + std::to_string(window), std::vector<std::optional<double>>(n)};
    double sum = 0.0;
    for (std::size_t i = 0; i < w; ++i) sum += closes[i];
    for (std::size_t t = w; t < n; ++t) {
        out.values[t] = sum / static_cast<double>(w);
        sum += closes[t] - closes[t - w];
    }
    return out;
}

IndicatorSeries ema(std::span<const double> closes, int span) {
    const auto n = closes.size();
    if (span < 1) throw Error(Errc::InvalidArgument, "ema span must be >= 1");
    if (static_cast<std::size_t>(span) > n)
        throw Error(Errc::SpanTooLarge, "ema span " + std::to_string(span) + " for " +
                                            std::to_string(n) + " closes");
    const auto s = static_cast<std::size_t>(span);
    IndicatorSeries out{"ema_" + std::to_string(span), std::vector<std::optional<double>>(n)};
    const double gamma = 2.0 / (static_cast<double>(span) + 1.0);
    double seed = 0.0;
    for (std::size_t i = 0; i < s; ++i) seed += closes[i];
    double prev = seed / static_cast<double>(s);
    out.values[s - 1] = prev;
    for (std::size_t t = s; t < n; ++t) {
        prev = (closes[t] - prev) * gamma + prev;
        out.values[t] = prev;
    }
    return out;
}

IndicatorSeries macd(std::span<const double> closes, int short_span, int long_span) {
    if (short_span < 1 || long_span < 1 || short_span == long_span)
        throw Error(Errc::InvalidArgument, "macd needs distinct spans >= 1");
    const auto fast = ema(closes, short_span);
    const auto slow = ema(closes, long_span);
    IndicatorSeries out{"macd_" + std::to_string(short_span) + "_" + std::to_string(long_span),
                        std::vector<std::optional<double>>(closes.size())};
    for (std::size_t t = 0; t < closes.size(); ++t) {
        if (fast.values[t] && slow.values[t]) out.values[t] = *fast.values[t] - *slow.values[t];
    }
    return out;
}

IndicatorSeries obv(std::span<const double> closes, std::span<const double> volumes) {
    if (closes.size() != volumes.size())
        throw Error(Errc::LengthMismatch, "closes and volumes differ in length");
    if (closes.empty()) throw Error(Errc::InvalidArgument, "obv needs at least one bar");
    IndicatorSeries out{"obv", std::vector<std::optional<double>>(closes.size())};
    double running = 0.0;
    out.values[0] = running;
    for (std::size_t t = 1; t < closes.size(); ++t) {
        if (closes[t] > closes[t - 1]) {
            running += volumes[t];
        } else if (closes[t] < closes[t - 1]) {
            running -= volumes[t];
        }
        out.values[t] = running;
    }
    return out;
}

IndicatorSeries rsi(std::span<const double> closes, int period, RsiVariant variant) {
    const auto n = closes.size();
    if (period < 1 || static_cast<std::size_t>(period) >= n)
        throw Error(Errc::WindowTooLarge, "rsi period " + std::to_string(period) + " for " +
                                              std::to_string(n) + " closes");
    const auto p = static_cast<std::size_t>(period);
    IndicatorSeries out{"rsi_" + std::to_string(period), std::vector<std::optional<double>>(n)};
    for (std::size_t t = p; t < n; ++t) {
        double gain = 0.0;
        double loss = 0.0;
        for (std::size_t i = t - p + 1; i <= t; ++i) {
            const double d = closes[i] - closes[i - 1];
            if (d > 0) gain += d;
            else loss -= d;
        }
        gain /= static_cast<double>(p);
        loss /= static_cast<double>(p);
        double value;
        if (gain == 0.0 && loss == 0.0) {
            value = 50.0;
        } else if (loss == 0.0) {
            value = variant == RsiVariant::standard ? 100.0 : 0.0;
        } else {
            const double rs = gain / loss;
            value = variant == RsiVariant::standard ? 100.0 - 100.0 / (1.0 + rs) : 100.0 / (1.0 + rs);
        }
        out.values[t] = value;
    }
    return out;
}

std::vector<std::string> feature_column_names(const IndicatorConfig& cfg) {
    std::vector<std::string> names{"open", "high", "low", "volume"};
    for (int w : cfg.sma_windows) names.push_back("sma_" + std::to_string(w));
    for (int s : cfg.ema_spans) names.push_back("ema_" + std::to_string(s));
    names.push_back("macd_" + std::to_string(cfg.macd_short) + "_" + std::to_string(cfg.macd_long));
    names.push_back("rsi_" + std::to_string(cfg.rsi_period));
    names.push_back("obv");
    for (int l : cfg.lag_depths) names.push_back("lag_close_" + std::to_string(l));
    return names;
}

FeatureMatrix build_feature_frame(const marketdata::OhlcvSeries& series, const IndicatorConfig& cfg,
                                  int horizon) {
    cfg.validate();
    if (horizon < 0) throw Error(Errc::InvalidArgument, "horizon must be >= 0");
    const std::size_t n = series.size();
    int longest = std::max({cfg.macd_short, cfg.macd_long, cfg.rsi_period});
    for (const auto* v : {&cfg.sma_windows, &cfg.ema_spans, &cfg.lag_depths}) {
        for (int x : *v) longest = std::max(longest, x);
    }
    if (n <= static_cast<std::size_t>(longest) + static_cast<std::size_t>(horizon))
        throw Error(Errc::InsufficientHistory, std::to_string(n) + " bars for a " +
                                                   std::to_string(longest) + "-bar window");

    const auto closes = series.closes();
    const auto volumes = series.volumes();

    std::vector<IndicatorSeries> cols;
    auto raw = [&](const char* name, auto field) {
        IndicatorSeries s{name, std::vector<std::optional<double>>(n)};
        for (std::size_t t = 0; t < n; ++t) s.values[t] = field(series.bars[t]);
        cols.push_back(std::move(s));
    };
    raw("open", [](const auto& b) { return b.open; });
    raw("high", [](const auto& b) { return b.high; });
    raw("low", [](const auto& b) { return b.low; });
    raw("volume", [](const auto& b) { return static_cast<double>(b.volume); });
    for (int w : cfg.sma_windows) cols.push_back(sma(closes, w));
    for (int s : cfg.ema_spans) cols.push_back(ema(closes, s));
    cols.push_back(macd(closes, cfg.macd_short, cfg.macd_long));
    cols.push_back(rsi(closes, cfg.rsi_period, cfg.rsi_variant));
    cols.push_back(obv(closes, volumes));
    for (int l : cfg.lag_depths) {
        IndicatorSeries s{"lag_close_" + std::to_string(l), std::vector<std::optional<double>>(n)};
        for (std::size_t t = static_cast<std::size_t>(l); t < n; ++t) s.values[t] = closes[t - static_cast<std::size_t>(l)];
        cols.push_back(std::move(s));
    }

    std::size_t first = 0;
    for (const auto& c : cols) first = std::max(first, c.defined_from());
    const std::size_t h = static_cast<std::size_t>(horizon);
    if (first + h >= n) throw Error(Errc::InsufficientHistory, "no row has every feature defined");
    const std::size_t count = n - h - first;

    FeatureMatrix fm;
    for (const auto& c : cols) fm.column_names.push_back(c.name);
    fm.rows = Matrix(count, cols.size());
    fm.target.resize(count);
    fm.index.resize(count);
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t t = first + r;
        for (std::size_t c = 0; c < cols.size(); ++c) fm.rows(r, c) = *cols[c].values[t];
        fm.target[r] = closes[t + h];
        fm.index[r] = series.bars[t].date.iso();
    }
    return fm;
}

}  // namespace quantsig::indicators
