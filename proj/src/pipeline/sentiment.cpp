#include "common.hpp"

#include "quantsig/io.hpp"
#include "quantsig/metrics.hpp"
#include "quantsig/persist.hpp"
#include "quantsig/preprocess.hpp"
#include "quantsig/rng.hpp"
#include "quantsig/svg.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>
#include <ostream>

namespace quantsig::pipeline {

using detail::stage;

namespace {

std::vector<models::ClassifierFamily> parse_families(const std::string& spec) {
    const auto& all = models::all_classifier_families();
    if (spec.empty() || spec == "all") return all;
    std::vector<models::ClassifierFamily> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = spec.find(',', pos);
        const auto name = io::trim(std::string_view(spec).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        const auto fam = models::parse_classifier_family(name);
        if (!fam) {
            std::string valid;
            for (auto f : all) valid += std::string(models::to_string(f)) + ", ";
            throw CommandError(ExitCode::usage, "unknown sentiment model '" + name + "'; valid: " + valid + "all");
        }
        if (std::find(out.begin(), out.end(), *fam) == out.end()) out.push_back(*fam);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct FamilyResult {
    models::ClassifierFamily family;
    metrics::ClassificationReport val, test;
    double val_auc = std::nan("");
    double test_auc = std::nan("");
    metrics::RocCurve test_roc;
    std::vector<double> scores;  ///< validation rows then test rows
};

bool has_both(std::span<const int> y) {
    bool a = false, b = false;
    for (int v : y) (v ? a : b) = true;
    return a && b;
}

std::string real_or_nan(double v) { return std::isnan(v) ? "nan" : io::format_real(v); }

}  // namespace

RunSummary cmd_train_sentiment(const RunConfig& cfg, std::ostream& log) {
    const auto families = parse_families(cfg.model);
    detail::check_config(cfg);

    auto corpus = stage(ExitCode::data, [&] { return textcorpus::load_tweets_csv(cfg.tweets_csv, cfg.columns); });
    log << fmt::format("loaded {} tweets from {}", corpus.records.size(), cfg.tweets_csv);
    if (corpus.skipped) log << fmt::format(", {} rows skipped", corpus.skipped);
    log << "\n";

    std::vector<std::size_t> order(corpus.records.size());
    std::iota(order.begin(), order.end(), 0);
    if (cfg.shuffle) CounterRng(cfg.train.seed).split(0x5eed).shuffle(std::span<std::size_t>(order));
    std::vector<textcorpus::TweetRecord> records;
    records.reserve(order.size());
    for (auto i : order) records.push_back(corpus.records[i]);

    const auto split = stage(ExitCode::data, [&] { return preprocess::chronological_split(records.size(), cfg.split); });
    const std::span<const textcorpus::TweetRecord> train_records(records.data() + split.train.begin, split.train.size());
    const auto vocab = stage(ExitCode::data, [&] {
        return textcorpus::build_vocabulary(train_records, cfg.vocab_min_df, cfg.vocab_max_size);
    });
    log << fmt::format("vocabulary {} tokens; train {}, validation {}, test {}\n", vocab.size(), split.train.size(),
                       split.validation.size(), split.test.size());

    detail::Bundle bundle;
    const auto tf = textcorpus::vectorize(records, vocab, textcorpus::BowMode::tf);
    const auto& labels = tf.labels;
    const auto dense_tf = tf.dense();
    const auto binary = textcorpus::vectorize(records, vocab, textcorpus::BowMode::binary).dense();

    // vectorize -> scale -> pca, each fit on training rows only.
    Matrix features = stage(ExitCode::training, [&] {
        const auto scaler = preprocess::fit_minmax(dense_tf.slice_rows(split.train.begin, split.train.size()));
        auto scaled = preprocess::apply_minmax(dense_tf, scaler);
        bundle.add("scaler.qsm", persist::encode_scaler(scaler));
        if (cfg.pca_components == "none") return scaled;
        const auto train = scaled.slice_rows(split.train.begin, split.train.size());
        const auto pca = cfg.pca_components == "auto"
                             ? preprocess::pca_fit_variance(train, cfg.pca_variance)
                             : preprocess::pca_fit(train, std::stoul(cfg.pca_components));
        log << fmt::format("pca: {} components\n", pca.n_components());
        bundle.add("pca.qsm", persist::encode_pca(pca));
        return preprocess::pca_transform(scaled, pca);
    });

    std::string vocab_csv = "token,document_frequency\n";
    for (std::size_t i = 0; i < vocab.size(); ++i)
        vocab_csv += io::csv_line({vocab.tokens[i], std::to_string(vocab.document_frequency[i])});
    bundle.add("vocabulary.csv", vocab_csv);

    const std::vector<int> y_train(labels.begin() + static_cast<std::ptrdiff_t>(split.train.begin),
                                   labels.begin() + static_cast<std::ptrdiff_t>(split.train.end));
    const std::span<const int> y_val(labels.data() + split.validation.begin, split.validation.size());
    const std::span<const int> y_test(labels.data() + split.test.begin, split.test.size());

    // Majority class of the training rows, scored on the test rows.
    const auto train_ones = std::count(y_train.begin(), y_train.end(), 1);
    const int majority = 2 * train_ones >= static_cast<std::ptrdiff_t>(y_train.size()) ? 1 : 0;
    const double baseline =
        static_cast<double>(std::count(y_test.begin(), y_test.end(), majority)) / static_cast<double>(y_test.size());

    std::vector<FamilyResult> results;
    std::vector<std::string> failures;
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        const auto family = families[fi];
        const auto name = std::string(models::to_string(family));
        const Matrix& x = family == models::ClassifierFamily::bnb ? binary : features;
        models::TrainConfig tc = train_config_for(cfg, name);
        tc.seed = CounterRng::mix(cfg.train.seed ^ (0x100 + static_cast<std::uint64_t>(family)));
        try {
            const auto model = models::fit_classifier(x.slice_rows(split.train.begin, split.train.size()), y_train, family, tc);
            FamilyResult res;
            res.family = family;
            const auto eval_rows = x.slice_rows(split.validation.begin, split.validation.size() + split.test.size());
            res.scores = models::decision_scores(model, eval_rows);
            const double thr = models::decision_threshold(model);
            std::vector<int> pred(res.scores.size());
            for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = res.scores[i] >= thr ? 1 : 0;
            const std::span<const int> pred_val(pred.data(), split.validation.size());
            const std::span<const int> pred_test(pred.data() + split.validation.size(), split.test.size());
            const std::span<const double> s_val(res.scores.data(), split.validation.size());
            const std::span<const double> s_test(res.scores.data() + split.validation.size(), split.test.size());
            res.val = metrics::classification_report(y_val, pred_val);
            res.test = metrics::classification_report(y_test, pred_test);
            if (has_both(y_val)) res.val_auc = metrics::roc_auc(y_val, s_val).auc;
            if (has_both(y_test)) {
                res.test_roc = metrics::roc_auc(y_test, s_test);
                res.test_auc = res.test_roc.auc;
            }
            bundle.add("models/" + name + ".qsm", models::encode_model(model));
            log << fmt::format("{:>4}: test accuracy {}, auc {}\n", name, io::format_fixed(res.test.accuracy, 3),
                               std::isnan(res.test_auc) ? "nan" : io::format_fixed(res.test_auc, 3));
            results.push_back(std::move(res));
        } catch (const std::exception& err) {
            log << fmt::format("{:>4}: failed: {}\n", name, err.what());
            failures.push_back(name + ": " + err.what());
        }
    }
    if (results.empty()) {
        std::string msg = "every requested family failed";
        for (const auto& f : failures) msg += "\n  " + f;
        throw CommandError(ExitCode::training, msg);
    }

    std::string csv = "family,split,n,Precision,Recall,F1-score,Accuracy,AUC,tp,fp,fn,tn,majority_baseline\n";
    auto csv_row = [&](const FamilyResult& r, const char* split_name, const metrics::ClassificationReport& rep,
                       double auc, const std::string& base) {
        csv += io::csv_line({std::string(models::to_string(r.family)), split_name, std::to_string(rep.matrix.total()),
                             io::format_real(rep.precision), io::format_real(rep.recall), io::format_real(rep.f1),
                             io::format_real(rep.accuracy), real_or_nan(auc), std::to_string(rep.matrix.tp),
                             std::to_string(rep.matrix.fp), std::to_string(rep.matrix.fn), std::to_string(rep.matrix.tn),
                             base});
    };
    for (const auto& r : results) {
        csv_row(r, "validation", r.val, r.val_auc, "");
        csv_row(r, "test", r.test, r.test_auc, io::format_real(baseline));
    }
    bundle.add("metrics.csv", csv);

    std::vector<std::string> header{"Metrics"};
    std::vector<std::vector<std::string>> rows(metrics::classification_metric_names().size());
    for (std::size_t m = 0; m < rows.size(); ++m) rows[m].push_back(metrics::classification_metric_names()[m]);
    for (const auto& r : results) {
        header.push_back(display_name(models::to_string(r.family)));
        const auto values = metrics::classification_row(r.test, r.test_auc);
        for (std::size_t m = 0; m < values.size(); ++m)
            rows[m].push_back(std::isnan(values[m]) ? "nan" : io::format_fixed(values[m], 3));
    }
    std::string text = fmt::format("Test split: {} tweets, majority baseline accuracy {}\n", split.test.size(),
                                   io::format_fixed(baseline, 3)) +
                       metrics::render_text_table(header, rows);
    for (const auto& f : failures) text += "failed: " + f + "\n";
    bundle.add("metrics.txt", text);

    std::string pred_csv = "id,split,label";
    for (const auto& r : results) pred_csv += "," + std::string(models::to_string(r.family));
    pred_csv += "\n";
    for (std::size_t i = 0; i < split.validation.size() + split.test.size(); ++i) {
        const std::size_t row = split.validation.begin + i;
        std::vector<std::string> fields{records[row].id, i < split.validation.size() ? "validation" : "test",
                                        std::to_string(labels[row])};
        for (const auto& r : results) fields.push_back(io::format_real(r.scores[i]));
        pred_csv += io::csv_line(fields);
    }
    bundle.add("predictions.csv", pred_csv);

    svg::ChartSpec chart;
    chart.title = "ROC curves (test split)";
    chart.x_label = "false positive rate";
    chart.y_label = "true positive rate";
    chart.show_diagonal = true;
    std::vector<svg::LineSeries> curves;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        if (std::isnan(r.test_auc)) continue;
        svg::LineSeries s;
        s.name = fmt::format("{} (AUC {})", display_name(models::to_string(r.family)), io::format_fixed(r.test_auc, 2));
        s.color = kPalette[static_cast<std::size_t>(r.family) % std::size(kPalette)];
        for (const auto& [fpr, tpr] : r.test_roc.points) {
            s.x.push_back(fpr);
            s.y.push_back(tpr);
        }
        curves.push_back(std::move(s));
    }
    bundle.add("roc.svg", svg::line_chart(chart, curves));

    std::string family_list, failed_list;
    for (const auto& r : results) family_list += (family_list.empty() ? "" : ",") + std::string(models::to_string(r.family));
    for (const auto& f : failures) failed_list += (failed_list.empty() ? "" : ",") + f.substr(0, f.find(':'));
    auto manifest = std::vector<std::pair<std::string, std::string>>{
        {"kind", "sentiment"},
        {"model", cfg.model.empty() ? "all" : cfg.model},
        {"families", family_list},
        {"failed", failed_list},
        {"config_hash", config_hash(cfg)},
        {"seed", std::to_string(cfg.train.seed)},
        {"input", cfg.tweets_csv},
        {"input_rows", std::to_string(records.size())},
        {"vocabulary_size", std::to_string(vocab.size())},
        {"feature_columns", std::to_string(features.cols())},
        {"train_rows", std::to_string(split.train.size())},
        {"validation_rows", std::to_string(split.validation.size())},
        {"test_rows", std::to_string(split.test.size())},
        {"test_first_id", records[split.test.begin].id},
        {"test_last_id", records[split.test.end - 1].id},
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
