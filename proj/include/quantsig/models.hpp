#pragma once

#include "quantsig/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace quantsig::models {

// ─── Configuration ───────────────────────────────────────────────────────────

enum class ClassifierFamily { lr, gnb, bnb, dt, rf, knn, svm, xgb, ann };
enum class RegressorFamily { linear, lstm };
enum class DistanceMetric { euclidean, manhattan };

std::string_view to_string(ClassifierFamily f);
std::string_view to_string(RegressorFamily f);
std::optional<ClassifierFamily> parse_classifier_family(std::string_view name);
std::optional<RegressorFamily> parse_regressor_family(std::string_view name);
const std::vector<ClassifierFamily>& all_classifier_families();

/// Hyperparameters shared by every family. Unset optionals take the
/// family default:
///
///   key            lr     svm    ann    lstm   xgb    dt/rf
///   epochs         500    20     200    50     -      -
///   learning_rate  0.1    -      1e-3   1e-3   0.1    -
///   l2             1e-4   1e-4   0      0      -      -
///   max_depth      -      -      -      -      3      10
///
/// Other defaults: k 5, n_trees 100, n_rounds 100, hidden_size 64 (ann) or
/// 32 (lstm), window_length 30, batch_size 32, min_samples_leaf 2,
/// clip_norm 5, max_features 0 (= sqrt(n_cols) for rf, all for dt),
/// bootstrap true.
struct TrainConfig {
    std::uint64_t seed = 42;
    std::optional<int> epochs;
    std::optional<double> learning_rate;
    std::optional<double> l2;
    int k = 5;
    DistanceMetric metric = DistanceMetric::euclidean;
    std::optional<int> max_depth;
    int min_samples_leaf = 2;
    int n_trees = 100;
    int n_rounds = 100;
    int max_features = 0;
    bool bootstrap = true;
    std::optional<int> hidden_size;
    int window_length = 30;
    int batch_size = 32;
    double clip_norm = 5.0;
};

// ─── Regressors ──────────────────────────────────────────────────────────────

struct LinearModel {
    std::vector<double> weights;
    double intercept = 0.0;
    std::vector<std::string> feature_names;
};

/// Gate blocks are stacked [input, forget, output, candidate], each
/// hidden_size rows.
struct LstmParams {
    Matrix w_input;                ///< 4H x I
    Matrix w_recurrent;            ///< 4H x H
    std::vector<double> bias;      ///< 4H
    std::vector<double> head_w;    ///< H
    double head_b = 0.0;

    /// Every parameter as a mutable span, in a fixed order.
    std::vector<std::span<double>> blocks();
    [[nodiscard]] std::size_t size() const;
};

struct LstmModel {
    LstmParams params;
    std::size_t hidden_size = 0;
    std::size_t input_size = 1;
    std::size_t window_length = 0;
    double scale_min = 0.0;  ///< min-max bounds used to scale closes
    double scale_max = 1.0;
    std::vector<double> loss_history;  ///< full-pass training MSE after each epoch
};

using RegressorModel = std::variant<LinearModel, LstmModel>;

/// Minimises ||Xw + b - y||^2 + ridge ||w||^2 by Householder QR on the
/// intercept-augmented system. Throws Error{SingularSystem} (ridge = 0 only).
LinearModel fit_linear_regression(const Matrix& x, std::span<const double> y, double ridge = 1e-8,
                                  std::vector<std::string> feature_names = {});

/// Sliding windows of length window_length over `scaled` predict the next
/// value. Trained with BPTT, Adam and global-norm clipping.
/// Throws Error{InvalidArgument | SeriesTooShort | DivergedLoss}.
LstmModel fit_lstm(std::span<const double> scaled, const TrainConfig& cfg, double scale_min = 0.0,
                   double scale_max = 1.0);

/// Training windows over `scaled`: row i is scaled[i .. i+window), target
/// scaled[i+window].
void make_windows(std::span<const double> scaled, std::size_t window, Matrix& windows,
                  std::vector<double>& targets);

/// Forward pass on already-scaled windows (one per row); scaled outputs.
std::vector<double> lstm_forward(const LstmModel& model, const Matrix& scaled_windows);

/// Mean squared error over the windows and its gradient (same layout as
/// model.params).
double lstm_loss_and_gradient(const LstmModel& model, const Matrix& scaled_windows,
                              std::span<const double> targets, LstmParams& grad);

/// Linear: one row per sample. Lstm: one raw-price window per row; outputs
/// are inverse-scaled to price units. Throws Error{ShapeMismatch}.
std::vector<double> predict_regressor(const RegressorModel& model, const Matrix& x);

// ─── Classifiers ─────────────────────────────────────────────────────────────

struct LogisticModel {
    std::vector<double> w;
    double b = 0.0;
    double learning_rate = 0.1;        ///< after any halving
    std::vector<double> loss_history;  ///< objective before each step, then final
};

struct GnbModel {
    double prior[2] = {0.5, 0.5};
    std::vector<double> mean[2];
    std::vector<double> var[2];
    double var_floor = 0.0;
};

struct BnbModel {
    double prior[2] = {0.5, 0.5};
    std::vector<double> prob[2];  ///< P(feature = 1 | class), Laplace-smoothed
};

struct TreeNode {
    std::int32_t feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;     ///< go left when x[feature] <= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    double count0 = 0.0;
    double count1 = 0.0;
    double value = 0.0;  ///< class-1 fraction (classification) or mean target (regression)

    bool operator==(const TreeNode&) const = default;
};

struct TreeModel {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root
    std::size_t n_features = 0;

    [[nodiscard]] double evaluate(std::span<const double> row) const;
    /// Single root, children in range, every non-root node referenced once.
    [[nodiscard]] bool is_valid() const;
};

struct ForestModel {
    std::vector<TreeModel> trees;
    std::vector<std::uint64_t> seeds;
};

struct KnnModel {
    Matrix x;
    std::vector<int> y;
    int k = 5;
    DistanceMetric metric = DistanceMetric::euclidean;
};

struct SvmModel {
    std::vector<double> w;
    double b = 0.0;
    double lambda = 1e-4;
    std::vector<double> objective_history;  ///< hinge + lambda/2 ||w||^2 after each epoch
};

struct GbtModel {
    std::vector<TreeModel> trees;
    double learning_rate = 0.1;
    double initial_log_odds = 0.0;
};

struct MlpParams {
    Matrix w_hidden;              ///< H x I
    std::vector<double> b_hidden; ///< H
    std::vector<double> w_out;    ///< H
    double b_out = 0.0;

    std::vector<std::span<double>> blocks();
    [[nodiscard]] std::size_t size() const;
};

struct MlpModel {
    MlpParams params;
    std::size_t hidden_size = 0;
    std::vector<double> loss_history;
};

using ClassifierModel = std::variant<LogisticModel, GnbModel, BnbModel, TreeModel, ForestModel,
                                     KnnModel, SvmModel, GbtModel, MlpModel>;

ClassifierFamily family_of(const ClassifierModel& model);

/// Labels are 0/1. Throws Error{SingleClassTraining | NonBinaryFeatures |
/// ShapeMismatch | InvalidArgument | DivergedLoss}.
ClassifierModel fit_classifier(const Matrix& x, std::span<const int> y, ClassifierFamily family,
                               const TrainConfig& cfg);

/// Monotone in class-1 confidence. Throws Error{ShapeMismatch}.
std::vector<double> decision_scores(const ClassifierModel& model, const Matrix& x);

/// 0.5 for probability-like scores, 0 for margins and log-odds.
double decision_threshold(const ClassifierModel& model);

std::vector<int> predict_labels(const ClassifierModel& model, const Matrix& x);

/// Mean logistic loss of a one-hidden-layer tanh net and its gradient.
double mlp_loss_and_gradient(const MlpModel& model, const Matrix& x, std::span<const int> y,
                             MlpParams& grad);

/// Regression tree on real targets (squared-error splits, mean leaves).
TreeModel fit_regression_tree(const Matrix& x, std::span<const double> targets, int max_depth,
                              int min_samples_leaf);

// ─── Persistence ─────────────────────────────────────────────────────────────

std::string encode_model(const RegressorModel& model);
std::string encode_model(const ClassifierModel& model);
RegressorModel decode_regressor(std::string_view bytes);
ClassifierModel decode_classifier(std::string_view bytes);

void save_model(const RegressorModel& model, const std::filesystem::path& path);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
RegressorModel load_regressor(const std::filesystem::path& path);
ClassifierModel load_classifier(const std::filesystem::path& path);

}  // namespace quantsig::models
