#pragma once

#include "quantsig/models.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace quantsig::models::detail {

struct Resolved {
    int epochs;
    double learning_rate;
    double l2;
    int max_depth;
    int hidden_size;
};

Resolved resolve(const TrainConfig& cfg, ClassifierFamily family);
Resolved resolve(const TrainConfig& cfg, RegressorFamily family);

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// Adam with bias correction over a list of parameter blocks.
class Adam {
public:
    Adam(const std::vector<std::span<double>>& blocks, double lr, double beta1 = 0.9,
         double beta2 = 0.999, double eps = 1e-8);

    void step(const std::vector<std::span<double>>& params, const std::vector<std::span<double>>& grads);

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

/// Scales every gradient block so the global L2 norm is at most max_norm.
void clip_global_norm(const std::vector<std::span<double>>& grads, double max_norm);

void require_shape(const Matrix& x, std::size_t expected_cols);
void require_binary_labels(std::span<const int> y, std::size_t rows);

/// Optimised CART over (row, target) pairs. `targets` are 0/1 labels for
/// classification or reals for regression.
struct TreeParams {
    bool classification = true;
    int max_depth = 10;
    int min_samples_leaf = 2;
    int max_features = 0;  ///< 0 = all
};

TreeModel build_tree(const Matrix& x, std::span<const double> targets,
                     std::span<const std::size_t> sample_rows, const TreeParams& params,
                     std::uint64_t seed);

TreeModel fit_decision_tree(const Matrix& x, std::span<const int> y, const TrainConfig& cfg);
ForestModel fit_random_forest(const Matrix& x, std::span<const int> y, const TrainConfig& cfg);
GbtModel fit_gradient_boosting(const Matrix& x, std::span<const int> y, const TrainConfig& cfg);

}  // namespace quantsig::models::detail
