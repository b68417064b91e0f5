#include "internal.hpp"

#include "quantsig/error.hpp"

#include <algorithm>
#include <array>

namespace quantsig::models {

namespace {
constexpr std::array<std::pair<ClassifierFamily, std::string_view>, 9> kClassifierNames{{
    {ClassifierFamily::lr, "lr"},
    {ClassifierFamily::gnb, "gnb"},
    {ClassifierFamily::bnb, "bnb"},
    {ClassifierFamily::dt, "dt"},
    {ClassifierFamily::rf, "rf"},
    {ClassifierFamily::knn, "knn"},
    {ClassifierFamily::svm, "svm"},
    {ClassifierFamily::xgb, "xgb"},
    {ClassifierFamily::ann, "ann"},
}};
}  // namespace

std::string_view to_string(ClassifierFamily f) {
    for (const auto& [fam, name] : kClassifierNames) {
        if (fam == f) return name;
    }
    return "unknown";
}

std::string_view to_string(RegressorFamily f) { return f == RegressorFamily::linear ? "linear" : "lstm"; }

std::optional<ClassifierFamily> parse_classifier_family(std::string_view name) {
    for (const auto& [fam, n] : kClassifierNames) {
        if (n == name) return fam;
    }
    return std::nullopt;
}

std::optional<RegressorFamily> parse_regressor_family(std::string_view name) {
    if (name == "linear") return RegressorFamily::linear;
    if (name == "lstm") return RegressorFamily::lstm;
    return std::nullopt;
}

const std::vector<ClassifierFamily>& all_classifier_families() {
    static const std::vector<ClassifierFamily> all = [] {
        std::vector<ClassifierFamily> v;
        for (const auto& [fam, name] : kClassifierNames) v.push_back(fam);
        return v;
    }();
    return all;
}

ClassifierFamily family_of(const ClassifierModel& model) {
    constexpr std::array<ClassifierFamily, 9> by_index{
        ClassifierFamily::lr,  ClassifierFamily::gnb, ClassifierFamily::bnb,
        ClassifierFamily::dt,  ClassifierFamily::rf,  ClassifierFamily::knn,
        ClassifierFamily::svm, ClassifierFamily::xgb, ClassifierFamily::ann};
    return by_index[model.index()];
}

namespace detail {

Resolved resolve(const TrainConfig& cfg, ClassifierFamily family) {
    Resolved r{0, 0.0, 0.0, 0, 0};
    switch (family) {
        case ClassifierFamily::lr:
            r = {500, 0.1, 1e-4, 0, 0};
            break;
        case ClassifierFamily::svm:
            r = {20, 0.0, 1e-4, 0, 0};
            break;
        case ClassifierFamily::ann:
            r = {200, 1e-3, 0.0, 0, 64};
            break;
        case ClassifierFamily::xgb:
            r = {0, 0.1, 0.0, 3, 0};
            break;
        case ClassifierFamily::dt:
        case ClassifierFamily::rf:
            r = {0, 0.0, 0.0, 10, 0};
            break;
        default:
            break;
    }
    if (cfg.epochs) r.epochs = *cfg.epochs;
    if (cfg.learning_rate) r.learning_rate = *cfg.learning_rate;
    if (cfg.l2) r.l2 = *cfg.l2;
    if (cfg.max_depth) r.max_depth = *cfg.max_depth;
    if (cfg.hidden_size) r.hidden_size = *cfg.hidden_size;
    return r;
}

Resolved resolve(const TrainConfig& cfg, RegressorFamily family) {
    Resolved r{0, 0.0, 0.0, 0, 0};
    if (family == RegressorFamily::lstm) r = {50, 1e-3, 0.0, 0, 32};
    if (cfg.epochs) r.epochs = *cfg.epochs;
    if (cfg.learning_rate) r.learning_rate = *cfg.learning_rate;
    if (cfg.l2) r.l2 = *cfg.l2;
    if (cfg.hidden_size) r.hidden_size = *cfg.hidden_size;
    return r;
}

Adam::Adam(const std::vector<std::span<double>>& blocks, double lr, double beta1, double beta2,
           double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& b : blocks) {
        m_.emplace_back(b.size(), 0.0);
        v_.emplace_back(b.size(), 0.0);
    }
}

void Adam::step(const std::vector<std::span<double>>& params, const std::vector<std::span<double>>& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto& m = m_[b];
        auto& v = v_[b];
        for (std::size_t i = 0; i < params[b].size(); ++i) {
            const double g = grads[b][i];
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
            params[b][i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
        }
    }
}

void clip_global_norm(const std::vector<std::span<double>>& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& g : grads)
        for (double x : g) sq += x * x;
    const double norm = std::sqrt(sq);
    if (norm <= max_norm || norm == 0.0) return;
    const double s = max_norm / norm;
    for (const auto& g : grads)
        for (double& x : g) x *= s;
}

void require_shape(const Matrix& x, std::size_t expected_cols) {
    if (x.cols() != expected_cols)
        throw Error(Errc::ShapeMismatch, "input has " + std::to_string(x.cols()) + " columns, model expects " +
                                             std::to_string(expected_cols));
}

void require_binary_labels(std::span<const int> y, std::size_t rows) {
    if (y.size() != rows) throw Error(Errc::ShapeMismatch, "label count differs from row count");
    bool has0 = false, has1 = false;
    for (int v : y) {
        if (v == 0) has0 = true;
        else if (v == 1) has1 = true;
        else throw Error(Errc::InvalidArgument, "labels must be 0 or 1");
    }
    if (!has0 || !has1) throw Error(Errc::SingleClassTraining, "training labels contain one class only");
}

}  // namespace detail
}  // namespace quantsig::models
