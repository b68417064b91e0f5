#include "common.hpp"

#include "quantsig/date.hpp"
#include "quantsig/indicators.hpp"
#include "quantsig/io.hpp"
#include "quantsig/metrics.hpp"
#include "quantsig/persist.hpp"
#include "quantsig/preprocess.hpp"
#include "quantsig/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <ostream>
#include <unordered_map>

namespace quantsig::pipeline {

using detail::stage;

PriceInput load_prices(const RunConfig& cfg, bool refresh) {
    const auto start = *Date::parse(cfg.start);
    const auto end = *Date::parse(cfg.end);
    return stage(ExitCode::data, [&] {
        PriceInput in;
        if (!cfg.price_csv.empty()) {
            auto parsed = marketdata::parse_ohlcv_csv(io::read_file(cfg.price_csv), cfg.symbol);
            in.skipped_rows = parsed.skipped_rows;
            in.source = cfg.price_csv;
            auto& bars = parsed.series.bars;
            std::erase_if(bars, [&](const marketdata::OhlcvBar& b) { return b.date < start || end < b.date; });
            if (bars.empty())
                throw Error(Errc::EmptySeries, "no bars of " + cfg.price_csv + " fall in " + cfg.start + ".." + cfg.end);
            in.series = std::move(parsed.series);
        } else {
            auto fetched = marketdata::fetch_history(cfg.symbol, start, end, cfg.endpoint, refresh);
            in.series = std::move(fetched.series);
            in.skipped_rows = fetched.skipped_rows;
            in.cache_hit = fetched.cache_hit;
            in.source = fetched.cache_file.generic_string();
        }
        return in;
    });
}

namespace {

void log_input(std::ostream& log, const PriceInput& in) {
    log << fmt::format("loaded {} bars from {}{}", in.series.size(), in.source,
                       in.cache_hit ? " (cache hit)" : "");
    if (in.skipped_rows) log << fmt::format(", {} rows skipped", in.skipped_rows);
    log << "\n";
}

std::string regression_csv_row(const std::string& model, const std::string& split,
                               const metrics::RegressionReport& r) {
    return io::csv_line({model, split, std::to_string(r.n), io::format_real(r.r2),
                         io::format_real(r.explained_variance_score), io::format_real(r.mape_percent),
                         io::format_real(r.rmse), io::format_real(r.mae), io::format_real(r.ev_raw),
                         std::to_string(r.mape_excluded)});
}

}  // namespace

FeatureMatrix cmd_features(const RunConfig& cfg, bool refresh, std::ostream& log) {
    detail::check_config(cfg);
    const auto input = load_prices(cfg, refresh);
    log_input(log, input);
    auto frame = stage(ExitCode::data,
                       [&] { return indicators::build_feature_frame(input.series, cfg.indicators, cfg.horizon); });
    detail::Bundle bundle;
    bundle.add("features.csv", frame.to_csv("date"));
    auto manifest = std::vector<std::pair<std::string, std::string>>{
        {"kind", "features"},
        {"config_hash", config_hash(cfg)},
        {"seed", std::to_string(cfg.train.seed)},
        {"horizon", std::to_string(cfg.horizon)},
        {"input", input.source},
        {"input_rows", std::to_string(input.series.size())},
        {"feature_rows", std::to_string(frame.n_rows())},
        {"first_date", frame.index.front()},
        {"last_date", frame.index.back()},
    };
    const auto cfg_entries = detail::config_manifest_entries(cfg);
    manifest.insert(manifest.end(), cfg_entries.begin(), cfg_entries.end());
    bundle.commit(cfg.out, std::move(manifest));
    log << fmt::format("{} feature rows x {} columns written to {}\n", frame.n_rows(), frame.n_cols(),
                       (std::filesystem::path(cfg.out) / "features.csv").generic_string());
    return frame;
}

RunSummary cmd_train_price(const RunConfig& cfg, bool refresh, std::ostream& log) {
    const std::string model_name = cfg.model.empty() ? "linear" : cfg.model;
    const auto family = models::parse_regressor_family(model_name);
    if (!family) throw CommandError(ExitCode::usage, "unknown price model '" + model_name + "'; valid: linear, lstm");
    detail::check_config(cfg);

    const auto input = load_prices(cfg, refresh);
    log_input(log, input);
    const auto frame = stage(ExitCode::data,
                             [&] { return indicators::build_feature_frame(input.series, cfg.indicators, cfg.horizon); });
    const auto split = stage(ExitCode::data, [&] { return preprocess::chronological_split(frame.n_rows(), cfg.split); });
    log << fmt::format("{} rows: train {}, validation {}, test {}\n", frame.n_rows(), split.train.size(),
                       split.validation.size(), split.test.size());

    detail::Bundle bundle;
    std::vector<double> predicted;  // one per frame row

    stage(ExitCode::training, [&] {
        if (*family == models::RegressorFamily::linear) {
            const auto train = frame.slice_rows(split.train.begin, split.train.size());
            auto [kept, report] = preprocess::select_features(train, cfg.top_k, cfg.redundancy);
            std::vector<std::size_t> cols;
            for (const auto& name : report.kept) cols.push_back(frame.column_index(name));
            const auto selected = frame.select_columns(cols);
            const auto scaler = preprocess::fit_minmax(selected.slice_rows(split.train.begin, split.train.size()));
            const auto scaled = preprocess::apply_minmax(selected, scaler);
            const auto train_rows = scaled.slice_rows(split.train.begin, split.train.size());
            models::RegressorModel model =
                models::fit_linear_regression(train_rows.rows, train_rows.target, 1e-8, report.kept);
            predicted = models::predict_regressor(model, scaled.rows);
            bundle.add("selection.csv", report.to_csv());
            bundle.add("scaler.qsm", persist::encode_scaler(scaler));
            bundle.add("model.qsm", models::encode_model(model));
            log << "selected features: ";
            for (std::size_t i = 0; i < report.kept.size(); ++i) log << (i ? ", " : "") << report.kept[i];
            log << "\n";
        } else {
            // One-step-ahead on closes: the window for target bar j is closes[j-W, j).
            const auto closes = input.series.closes();
            std::unordered_map<std::string, std::size_t> bar_of;
            for (std::size_t i = 0; i < input.series.size(); ++i) bar_of.emplace(input.series.bars[i].date.iso(), i);
            auto target_bar = [&](std::size_t row) { return bar_of.at(frame.index[row]) + static_cast<std::size_t>(cfg.horizon); };
            const auto w = static_cast<std::size_t>(std::max(1, train_config_for(cfg, "lstm").window_length));
            const std::size_t last_train = target_bar(split.train.end - 1);
            const std::span<const double> history(closes.data(), last_train + 1);
            const double lo = *std::min_element(history.begin(), history.end());
            const double hi = *std::max_element(history.begin(), history.end());
            std::vector<double> scaled(history.size());
            for (std::size_t i = 0; i < history.size(); ++i) scaled[i] = preprocess::minmax_scale(history[i], lo, hi);
            models::RegressorModel model = models::fit_lstm(scaled, train_config_for(cfg, "lstm"), lo, hi);
            if (target_bar(0) < w) throw Error(Errc::SeriesTooShort, "window_length exceeds the history before the first row");
            Matrix windows(frame.n_rows(), w);
            for (std::size_t r = 0; r < frame.n_rows(); ++r) {
                const std::size_t j = target_bar(r);
                std::copy(closes.begin() + static_cast<std::ptrdiff_t>(j - w), closes.begin() + static_cast<std::ptrdiff_t>(j),
                          windows.row(r).begin());
            }
            predicted = models::predict_regressor(model, windows);
            const auto& hist = std::get<models::LstmModel>(model).loss_history;
            log << fmt::format("lstm: {} epochs, final training mse {}\n", hist.size(), io::format_real(hist.back()));
            bundle.add("model.qsm", models::encode_model(model));
        }
        for (double v : predicted)
            if (!std::isfinite(v)) throw Error(Errc::DivergedLoss, "non-finite prediction");
        return 0;
    });

    auto report_for = [&](const preprocess::RowRange& range) {
        return stage(ExitCode::training, [&] {
            const std::span<const double> y(frame.target.data() + range.begin, range.size());
            const std::span<const double> yhat(predicted.data() + range.begin, range.size());
            return metrics::regression_report(y, yhat);
        });
    };
    const auto val_report = report_for(split.validation);
    const auto test_report = report_for(split.test);

    std::string csv = "model,split,n,R2,Explained Variation,MAPE,RMSE,MAE,ev_raw,mape_excluded\n";
    csv += regression_csv_row(model_name, "validation", val_report);
    csv += regression_csv_row(model_name, "test", test_report);
    bundle.add("metrics.csv", csv);

    const auto& test_first = frame.index[split.test.begin];
    const auto& test_last = frame.index[split.test.end - 1];
    std::vector<std::vector<std::string>> rows;
    const auto values = metrics::regression_row(test_report);
    for (std::size_t i = 0; i < values.size(); ++i)
        rows.push_back({metrics::regression_metric_names()[i], io::format_fixed(values[i], 3)});
    const std::string text = fmt::format("Test split {} .. {} ({} rows), horizon {}\n", test_first, test_last,
                                         split.test.size(), cfg.horizon) +
                             metrics::render_text_table({"Metric", display_name(model_name)}, rows);
    bundle.add("metrics.txt", text);

    std::string pred_csv = "date,split,actual,predicted\n";
    auto add_rows = [&](const preprocess::RowRange& range, const char* name) {
        for (std::size_t r = range.begin; r < range.end; ++r)
            pred_csv += io::csv_line({frame.index[r], name, io::format_real(frame.target[r]), io::format_real(predicted[r])});
    };
    add_rows(split.validation, "validation");
    add_rows(split.test, "test");
    bundle.add("predictions.csv", pred_csv);

    svg::ChartSpec chart;
    chart.title = fmt::format("{} closing price, {} (test split)", cfg.symbol, display_name(model_name));
    chart.x_label = "date";
    chart.y_label = "close";
    svg::LineSeries pred_line{"predicted", {}, {}, "#1f77b4", false};
    svg::LineSeries actual_line{"actual", {}, {}, "#2ca02c", true};
    for (std::size_t r = split.test.begin; r < split.test.end; ++r) {
        const double x = static_cast<double>(r - split.test.begin);
        chart.x_tick_labels.push_back(frame.index[r]);
        pred_line.x.push_back(x);
        pred_line.y.push_back(predicted[r]);
        actual_line.x.push_back(x);
        actual_line.y.push_back(frame.target[r]);
    }
    bundle.add("price.svg", svg::line_chart(chart, {pred_line, actual_line}));

    auto manifest = std::vector<std::pair<std::string, std::string>>{
        {"kind", "price"},
        {"model", model_name},
        {"config_hash", config_hash(cfg)},
        {"seed", std::to_string(cfg.train.seed)},
        {"horizon", std::to_string(cfg.horizon)},
        {"input", input.source},
        {"input_rows", std::to_string(input.series.size())},
        {"feature_rows", std::to_string(frame.n_rows())},
        {"train_rows", std::to_string(split.train.size())},
        {"validation_rows", std::to_string(split.validation.size())},
        {"test_rows", std::to_string(split.test.size())},
        {"test_start", test_first},
        {"test_end", test_last},
    };
    const auto cfg_entries = detail::config_manifest_entries(cfg);
    manifest.insert(manifest.end(), cfg_entries.begin(), cfg_entries.end());

    RunSummary summary;
    summary.out_dir = cfg.out;
    summary.files = bundle.commit(cfg.out, std::move(manifest));
    summary.metrics_text = text;
    return summary;
}

}  // namespace quantsig::pipeline
