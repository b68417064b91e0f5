#pragma once

#include "quantsig/feature_matrix.hpp"
#include "quantsig/marketdata.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace quantsig::indicators {

/// `standard` is the textbook 100 - 100/(1+RS); `paper` is the bare
/// 100/(1+RS) form, kept for fidelity comparisons.
enum class RsiVariant { standard, paper };

struct IndicatorConfig {
    std::vector<int> sma_windows{5, 10, 20, 50, 100, 200};
    std::vector<int> ema_spans{5, 10, 20, 50, 100, 200};
    int macd_short = 12;
    int macd_long = 16;
    int rsi_period = 14;
    RsiVariant rsi_variant = RsiVariant::standard;
    std::vector<int> lag_depths{1, 2, 3, 5, 10};

    /// Throws Error{InvalidArgument} on a non-positive window or k == d.
    void validate() const;
};

/// Values aligned with the source series; nullopt during warm-up.
struct IndicatorSeries {
    std::string name;
    std::vector<std::optional<double>> values;

    /// First defined index, or values.size() when nothing is defined.
    [[nodiscard]] std::size_t defined_from() const;
};

/// Mean of the N closes strictly before t: defined for t >= N.
/// Throws Error{WindowTooLarge} unless 1 <= N < closes.size().
IndicatorSeries sma(std::span<const double> closes, int window);

/// Smoothing factor 2/(span+1), seeded at index span-1 with the mean of the
/// first `span` closes. Throws Error{SpanTooLarge} when span > size.
IndicatorSeries ema(std::span<const double> closes, int span);

/// ema(k) - ema(d) wherever both are defined.
IndicatorSeries macd(std::span<const double> closes, int short_span, int long_span);

/// Running signed volume; obv[0] = 0. Throws Error{LengthMismatch}.
IndicatorSeries obv(std::span<const double> closes, std::span<const double> volumes);

/// Simple-mean gains/losses over the trailing `period` day-over-day
/// changes; defined for t >= period. A zero average loss means RS = +inf
/// (standard 100, paper 0); zero gains and losses give 50.
IndicatorSeries rsi(std::span<const double> closes, int period,
                    RsiVariant variant = RsiVariant::standard);

/// Same-day open/high/low/volume, every configured indicator and lagged
/// closes; target is close[t + horizon]. Rows with any undefined value are
/// dropped. Throws Error{InsufficientHistory}.
FeatureMatrix build_feature_frame(const marketdata::OhlcvSeries& series, const IndicatorConfig& cfg,
                                  int horizon = 0);

/// Column names build_feature_frame will produce, in order.
std::vector<std::string> feature_column_names(const IndicatorConfig& cfg);

}  // namespace quantsig::indicators
