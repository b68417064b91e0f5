#include "internal.hpp"

#include "quantsig/error.hpp"
#include "quantsig/io.hpp"
#include "quantsig/persist.hpp"

#include <cmath>

namespace quantsig::models {
namespace {

using persist::RecordReader;
using persist::RecordWriter;

void corrupt_unless(bool ok, const std::string& what) {
    if (!ok) throw Error(Errc::CorruptRecord, what);
}

std::int64_t as_i64(std::size_t v) { return static_cast<std::int64_t>(v); }

std::size_t get_size(const RecordReader& r, const std::string& name) {
    const auto v = r.get_int(name);
    corrupt_unless(v >= 0, name + " is negative");
    return static_cast<std::size_t>(v);
}

std::vector<double> pair_reals(const double (&v)[2]) { return {v[0], v[1]}; }

void get_pair(const RecordReader& r, const std::string& name, double (&out)[2]) {
    const auto v = r.get_reals(name);
    corrupt_unless(v.size() == 2, name + " must hold two values");
    out[0] = v[0];
    out[1] = v[1];
}

void put_tree(RecordWriter& w, const std::string& prefix, const TreeModel& t) {
    std::vector<std::int64_t> feature, left, right;
    std::vector<double> threshold, count0, count1, value;
    for (const auto& n : t.nodes) {
        feature.push_back(n.feature);
        left.push_back(n.left);
        right.push_back(n.right);
        threshold.push_back(n.threshold);
        count0.push_back(n.count0);
        count1.push_back(n.count1);
        value.push_back(n.value);
    }
    w.put_int(prefix + "n_features", as_i64(t.n_features));
    w.put_ints(prefix + "feature", feature);
    w.put_ints(prefix + "left", left);
    w.put_ints(prefix + "right", right);
    w.put_reals(prefix + "threshold", threshold);
    w.put_reals(prefix + "count0", count0);
    w.put_reals(prefix + "count1", count1);
    w.put_reals(prefix + "value", value);
}

TreeModel get_tree(const RecordReader& r, const std::string& prefix) {
    TreeModel t;
    t.n_features = get_size(r, prefix + "n_features");
    const auto feature = r.get_ints(prefix + "feature");
    const auto left = r.get_ints(prefix + "left");
    const auto right = r.get_ints(prefix + "right");
    const auto threshold = r.get_reals(prefix + "threshold");
    const auto count0 = r.get_reals(prefix + "count0");
    const auto count1 = r.get_reals(prefix + "count1");
    const auto value = r.get_reals(prefix + "value");
    const std::size_t n = feature.size();
    corrupt_unless(left.size() == n && right.size() == n && threshold.size() == n && count0.size() == n &&
                       count1.size() == n && value.size() == n,
                   prefix + "node arrays differ in length");
    for (std::size_t i = 0; i < n; ++i) {
        corrupt_unless(feature[i] >= -1 && feature[i] <= INT32_MAX && left[i] >= -1 && left[i] <= INT32_MAX &&
                           right[i] >= -1 && right[i] <= INT32_MAX,
                       prefix + "node index out of range");
        t.nodes.push_back({static_cast<std::int32_t>(feature[i]), threshold[i], static_cast<std::int32_t>(left[i]),
                           static_cast<std::int32_t>(right[i]), count0[i], count1[i], value[i]});
    }
    corrupt_unless(t.is_valid(), prefix + "tree structure is invalid");
    return t;
}

void put_metric(RecordWriter& w, DistanceMetric m) {
    w.put_string("metric", m == DistanceMetric::euclidean ? "euclidean" : "manhattan");
}

DistanceMetric get_metric(const RecordReader& r) {
    const auto s = r.get_string("metric");
    if (s == "euclidean") return DistanceMetric::euclidean;
    if (s == "manhattan") return DistanceMetric::manhattan;
    throw Error(Errc::CorruptRecord, "unknown distance metric " + s);
}

void put_trees(RecordWriter& w, const std::vector<TreeModel>& trees) {
    w.put_int("n_trees", as_i64(trees.size()));
    for (std::size_t i = 0; i < trees.size(); ++i) put_tree(w, "tree." + std::to_string(i) + ".", trees[i]);
}

std::vector<TreeModel> get_trees(const RecordReader& r) {
    const auto n = get_size(r, "n_trees");
    std::vector<TreeModel> trees;
    for (std::size_t i = 0; i < n; ++i) trees.push_back(get_tree(r, "tree." + std::to_string(i) + "."));
    return trees;
}

}  // namespace

std::string encode_model(const RegressorModel& model) {
    if (const auto* lin = std::get_if<LinearModel>(&model)) {
        RecordWriter w("linear");
        w.put_reals("weights", lin->weights);
        w.put_real("intercept", lin->intercept);
        w.put_strings("feature_names", lin->feature_names);
        return w.finish();
    }
    const auto& m = std::get<LstmModel>(model);
    RecordWriter w("lstm");
    w.put_int("hidden_size", as_i64(m.hidden_size));
    w.put_int("input_size", as_i64(m.input_size));
    w.put_int("window_length", as_i64(m.window_length));
    w.put_real("scale_min", m.scale_min);
    w.put_real("scale_max", m.scale_max);
    w.put_matrix("w_input", m.params.w_input);
    w.put_matrix("w_recurrent", m.params.w_recurrent);
    w.put_reals("bias", m.params.bias);
    w.put_reals("head_w", m.params.head_w);
    w.put_real("head_b", m.params.head_b);
    w.put_reals("loss_history", m.loss_history);
    return w.finish();
}

RegressorModel decode_regressor(std::string_view bytes) {
    RecordReader r(bytes);
    if (r.family_tag() == "linear") {
        LinearModel m;
        m.weights = r.get_reals("weights");
        m.intercept = r.get_real("intercept");
        m.feature_names = r.get_strings("feature_names");
        corrupt_unless(m.feature_names.empty() || m.feature_names.size() == m.weights.size(),
                       "feature names differ from weight count");
        return m;
    }
    corrupt_unless(r.family_tag() == "lstm", "not a regressor: " + r.family_tag());
    LstmModel m;
    m.hidden_size = get_size(r, "hidden_size");
    m.input_size = get_size(r, "input_size");
    m.window_length = get_size(r, "window_length");
    m.scale_min = r.get_real("scale_min");
    m.scale_max = r.get_real("scale_max");
    m.params.w_input = r.get_matrix("w_input");
    m.params.w_recurrent = r.get_matrix("w_recurrent");
    m.params.bias = r.get_reals("bias");
    m.params.head_w = r.get_reals("head_w");
    m.params.head_b = r.get_real("head_b");
    m.loss_history = r.get_reals("loss_history");
    const std::size_t h = m.hidden_size;
    corrupt_unless(h > 0 && m.input_size > 0 && m.window_length > 0, "lstm sizes must be positive");
    corrupt_unless(m.params.w_input.rows() == 4 * h && m.params.w_input.cols() == m.input_size &&
                       m.params.w_recurrent.rows() == 4 * h && m.params.w_recurrent.cols() == h &&
                       m.params.bias.size() == 4 * h && m.params.head_w.size() == h,
                   "lstm parameter shapes are inconsistent");
    return m;
}

std::string encode_model(const ClassifierModel& model) {
    RecordWriter w(std::string(to_string(family_of(model))));
    struct Visitor {
        RecordWriter& w;
        void operator()(const LogisticModel& m) const {
            w.put_reals("w", m.w);
            w.put_real("b", m.b);
            w.put_real("learning_rate", m.learning_rate);
            w.put_reals("loss_history", m.loss_history);
        }
        void operator()(const GnbModel& m) const {
            w.put_reals("prior", pair_reals(m.prior));
            w.put_reals("mean0", m.mean[0]);
            w.put_reals("mean1", m.mean[1]);
            w.put_reals("var0", m.var[0]);
            w.put_reals("var1", m.var[1]);
            w.put_real("var_floor", m.var_floor);
        }
        void operator()(const BnbModel& m) const {
            w.put_reals("prior", pair_reals(m.prior));
            w.put_reals("prob0", m.prob[0]);
            w.put_reals("prob1", m.prob[1]);
        }
        void operator()(const TreeModel& m) const { put_tree(w, "", m); }
        void operator()(const ForestModel& m) const {
            put_trees(w, m.trees);
            std::vector<std::int64_t> seeds;
            for (auto s : m.seeds) seeds.push_back(static_cast<std::int64_t>(s));
            w.put_ints("seeds", seeds);
        }
        void operator()(const KnnModel& m) const {
            w.put_matrix("x", m.x);
            w.put_ints("y", std::vector<std::int64_t>(m.y.begin(), m.y.end()));
            w.put_int("k", m.k);
            put_metric(w, m.metric);
        }
        void operator()(const SvmModel& m) const {
            w.put_reals("w", m.w);
            w.put_real("b", m.b);
            w.put_real("lambda", m.lambda);
            w.put_reals("objective_history", m.objective_history);
        }
        void operator()(const GbtModel& m) const {
            put_trees(w, m.trees);
            w.put_real("learning_rate", m.learning_rate);
            w.put_real("initial_log_odds", m.initial_log_odds);
        }
        void operator()(const MlpModel& m) const {
            w.put_int("hidden_size", as_i64(m.hidden_size));
            w.put_matrix("w_hidden", m.params.w_hidden);
            w.put_reals("b_hidden", m.params.b_hidden);
            w.put_reals("w_out", m.params.w_out);
            w.put_real("b_out", m.params.b_out);
            w.put_reals("loss_history", m.loss_history);
        }
    };
    std::visit(Visitor{w}, model);
    return w.finish();
}

ClassifierModel decode_classifier(std::string_view bytes) {
    RecordReader r(bytes);
    const auto family = parse_classifier_family(r.family_tag());
    corrupt_unless(family.has_value(), "not a classifier: " + r.family_tag());
    switch (*family) {
        case ClassifierFamily::lr: {
            LogisticModel m;
            m.w = r.get_reals("w");
            m.b = r.get_real("b");
            m.learning_rate = r.get_real("learning_rate");
            m.loss_history = r.get_reals("loss_history");
            return m;
        }
        case ClassifierFamily::gnb: {
            GnbModel m;
            get_pair(r, "prior", m.prior);
            m.mean[0] = r.get_reals("mean0");
            m.mean[1] = r.get_reals("mean1");
            m.var[0] = r.get_reals("var0");
            m.var[1] = r.get_reals("var1");
            m.var_floor = r.get_real("var_floor");
            const auto d = m.mean[0].size();
            corrupt_unless(m.mean[1].size() == d && m.var[0].size() == d && m.var[1].size() == d,
                           "gnb arrays differ in length");
            return m;
        }
        case ClassifierFamily::bnb: {
            BnbModel m;
            get_pair(r, "prior", m.prior);
            m.prob[0] = r.get_reals("prob0");
            m.prob[1] = r.get_reals("prob1");
            corrupt_unless(m.prob[0].size() == m.prob[1].size(), "bnb arrays differ in length");
            return m;
        }
        case ClassifierFamily::dt: return get_tree(r, "");
        case ClassifierFamily::rf: {
            ForestModel m;
            m.trees = get_trees(r);
            for (auto s : r.get_ints("seeds")) m.seeds.push_back(static_cast<std::uint64_t>(s));
            corrupt_unless(!m.trees.empty() && m.seeds.size() == m.trees.size(), "forest seeds differ from tree count");
            return m;
        }
        case ClassifierFamily::knn: {
            KnnModel m;
            m.x = r.get_matrix("x");
            for (auto v : r.get_ints("y")) {
                corrupt_unless(v == 0 || v == 1, "knn label must be 0 or 1");
                m.y.push_back(static_cast<int>(v));
            }
            const auto k = r.get_int("k");
            corrupt_unless(k >= 1 && k <= INT32_MAX, "knn k out of range");
            m.k = static_cast<int>(k);
            m.metric = get_metric(r);
            corrupt_unless(m.y.size() == m.x.rows() && !m.y.empty(), "knn labels differ from row count");
            return m;
        }
        case ClassifierFamily::svm: {
            SvmModel m;
            m.w = r.get_reals("w");
            m.b = r.get_real("b");
            m.lambda = r.get_real("lambda");
            m.objective_history = r.get_reals("objective_history");
            return m;
        }
        case ClassifierFamily::xgb: {
            GbtModel m;
            m.trees = get_trees(r);
            m.learning_rate = r.get_real("learning_rate");
            m.initial_log_odds = r.get_real("initial_log_odds");
            return m;
        }
        case ClassifierFamily::ann: {
            MlpModel m;
            m.hidden_size = get_size(r, "hidden_size");
            m.params.w_hidden = r.get_matrix("w_hidden");
            m.params.b_hidden = r.get_reals("b_hidden");
            m.params.w_out = r.get_reals("w_out");
            m.params.b_out = r.get_real("b_out");
            m.loss_history = r.get_reals("loss_history");
            const auto h = m.hidden_size;
            corrupt_unless(m.params.w_hidden.rows() == h && m.params.b_hidden.size() == h && m.params.w_out.size() == h,
                           "mlp parameter shapes are inconsistent");
            return m;
        }
    }
    throw Error(Errc::CorruptRecord, "unhandled family");
}

void save_model(const RegressorModel& model, const std::filesystem::path& path) {
    io::write_file_atomic(path, encode_model(model));
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
    io::write_file_atomic(path, encode_model(model));
}

RegressorModel load_regressor(const std::filesystem::path& path) { return decode_regressor(io::read_file(path)); }

ClassifierModel load_classifier(const std::filesystem::path& path) {
    return decode_classifier(io::read_file(path));
}

}  // namespace quantsig::models
