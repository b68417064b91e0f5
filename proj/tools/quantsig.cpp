// quantsig command-line driver: fetch, features, train-price,
// train-sentiment and report.

#include "quantsig/error.hpp"
#include "quantsig/io.hpp"
#include "quantsig/marketdata.hpp"
#include "quantsig/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <map>

namespace qp = quantsig::pipeline;

namespace {

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool refresh = false;
    std::optional<int> horizon;
    std::string text_col;
    std::string label_col;
    std::vector<std::string> sets;
};

qp::RunConfig build_config(const GlobalOptions& g) {
    qp::RunConfig cfg;
    try {
        if (!g.config.empty()) cfg = qp::load_run_config(g.config);
        for (const auto& kv : g.sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw quantsig::Error(quantsig::Errc::ConfigError, "--set expects KEY=VALUE, got " + kv);
            qp::set_config_value(cfg, quantsig::io::trim(kv.substr(0, eq)), quantsig::io::trim(kv.substr(eq + 1)));
        }
    } catch (const quantsig::Error& err) {
        throw qp::CommandError(qp::ExitCode::usage, err.what());
    }
    if (g.seed) cfg.train.seed = *g.seed;
    if (!g.out.empty()) cfg.out = g.out;
    if (g.horizon) cfg.horizon = *g.horizon;
    if (!g.text_col.empty()) cfg.columns.text = g.text_col;
    if (!g.label_col.empty()) cfg.columns.label = g.label_col;
    cfg.endpoint = quantsig::marketdata::apply_env_overrides(cfg.endpoint);
    return cfg;
}

int run_fetch(qp::RunConfig cfg, const GlobalOptions& g, const std::vector<std::string>& args) {
    if (args.size() > 3) throw qp::CommandError(qp::ExitCode::usage, "fetch takes at most SYMBOL START END");
    if (args.size() > 0) cfg.symbol = args[0];
    if (args.size() > 1) cfg.start = args[1];
    if (args.size() > 2) cfg.end = args[2];
    cfg.price_csv.clear();
    try {
        qp::validate_config(cfg);
    } catch (const quantsig::Error& err) {
        throw qp::CommandError(qp::ExitCode::usage, err.what());
    }
    const auto input = qp::load_prices(cfg, g.refresh);
    std::cout << fmt::format("{} rows for {} {}..{}\n", input.series.size(), cfg.symbol, cfg.start, cfg.end);
    std::cout << (input.cache_hit ? "cache hit: " : "downloaded: ") << input.source << "\n";
    if (input.skipped_rows) std::cout << fmt::format("{} rows skipped (empty or null cells)\n", input.skipped_rows);
    const auto violations = quantsig::marketdata::validate_series(input.series);
    if (violations.empty()) {
        std::cout << "validation: ok\n";
    } else {
        std::map<std::string, std::size_t> counts;
        for (const auto& v : violations) ++counts[std::string(quantsig::marketdata::to_string(v.kind))];
        std::cout << "validation:";
        for (const auto& [kind, n] : counts) std::cout << " " << kind << "=" << n;
        std::cout << "\n";
        for (std::size_t i = 0; i < std::min<std::size_t>(violations.size(), 5); ++i)
            std::cout << "  " << violations[i].detail << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantsig: technical-indicator price regression and tweet sentiment classification"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    app.add_option("--config", g.config, "key = value run configuration file");
    app.add_option("--seed", g.seed, "global seed (overrides the config)");
    app.add_option("--out", g.out, "output directory (overrides the config)");
    app.add_flag("--refresh", g.refresh, "ignore cached price history");
    app.add_option("--horizon", g.horizon, "target offset: 0 same-day close, 1 next-day close");
    app.add_option("--text-col", g.text_col, "tweet text column");
    app.add_option("--label-col", g.label_col, "tweet label column");
    app.add_option("--set", g.sets, "override one config key, KEY=VALUE (repeatable)")
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

    std::vector<std::string> fetch_args;
    auto* fetch = app.add_subcommand("fetch", "download or load cached daily history");
    fetch->add_option("args", fetch_args, "SYMBOL START END (defaults from the config)");

    auto* features = app.add_subcommand("features", "build the indicator feature table");

    std::string price_model;
    auto* train_price = app.add_subcommand("train-price", "train and evaluate a closing-price regressor");
    train_price->add_option("--model", price_model, "linear or lstm");

    std::string sentiment_model;
    auto* train_sentiment = app.add_subcommand("train-sentiment", "train and evaluate tweet sentiment classifiers");
    train_sentiment->add_option("--model", sentiment_model, "lr, gnb, bnb, dt, rf, knn, svm, xgb, ann, a comma list or all");

    std::vector<std::string> report_dirs;
    auto* report = app.add_subcommand("report", "merge run directories into comparison tables");
    report->add_option("dirs", report_dirs, "run directories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(qp::ExitCode::usage);
    }

    try {
        if (report->parsed()) {
            std::vector<std::filesystem::path> dirs(report_dirs.begin(), report_dirs.end());
            const auto merged = qp::cmd_report(dirs);
            std::cout << merged.text;
            if (!g.out.empty()) {
                std::filesystem::create_directories(g.out);
                quantsig::io::write_file_atomic(std::filesystem::path(g.out) / "report.csv", merged.csv);
                quantsig::io::write_file_atomic(std::filesystem::path(g.out) / "report.txt", merged.text);
            }
            return 0;
        }
        auto cfg = build_config(g);
        if (fetch->parsed()) return run_fetch(cfg, g, fetch_args);
        if (features->parsed()) {
            qp::cmd_features(cfg, g.refresh, std::cerr);
            return 0;
        }
        if (train_price->parsed()) {
            if (!price_model.empty()) cfg.model = price_model;
            const auto summary = qp::cmd_train_price(cfg, g.refresh, std::cerr);
            std::cout << summary.metrics_text;
            return 0;
        }
        if (train_sentiment->parsed()) {
            if (!sentiment_model.empty()) cfg.model = sentiment_model;
            const auto summary = qp::cmd_train_sentiment(cfg, std::cerr);
            std::cout << summary.metrics_text;
            return 0;
        }
    } catch (const qp::CommandError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return static_cast<int>(err.code());
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return static_cast<int>(qp::ExitCode::data);
    }
    return static_cast<int>(qp::ExitCode::usage);
}
