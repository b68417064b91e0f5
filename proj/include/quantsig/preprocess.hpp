#pragma once

#include "quantsig/feature_matrix.hpp"
#include "quantsig/matrix.hpp"

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace quantsig::preprocess {

// ─── Min-max scaling ─────────────────────────────────────────────────────────

struct ScalerParams {
    std::vector<std::string> columns;
    std::vector<double> min;
    std::vector<double> max;

    bool operator==(const ScalerParams&) const = default;
};

ScalerParams fit_minmax(const FeatureMatrix& matrix);
ScalerParams fit_minmax(const Matrix& matrix);

/// (a - min) / (max - min) per column; constant columns map to 0 and values
/// outside the fitted range are not clipped. Throws Error{ColumnMismatch}.
FeatureMatrix apply_minmax(const FeatureMatrix& matrix, const ScalerParams& params);
Matrix apply_minmax(const Matrix& matrix, const ScalerParams& params);

double minmax_scale(double value, double lo, double hi);
double minmax_unscale(double scaled, double lo, double hi);

// ─── Correlation filter ──────────────────────────────────────────────────────

/// Pearson correlation. Throws Error{LengthMismatch | ZeroVariance}.
double pearson(std::span<const double> x, std::span<const double> y);

enum class SelectionStatus { kept, redundant, zero_variance, not_reached };

struct SelectionEntry {
    std::string column;
    std::size_t rank = 0;  ///< 1-based position in the |corr| ranking; 0 if unranked
    double score = 0.0;    ///< pearson(column, target)
    SelectionStatus status = SelectionStatus::kept;
    std::string reason;
};

struct SelectionReport {
    std::vector<SelectionEntry> entries;  ///< ranking order, unranked last
    std::vector<std::string> kept;        ///< in ranking order

    [[nodiscard]] std::string to_csv() const;
};

/// Ranks columns by |pearson(column, target)| (ties by column order) and keeps
/// them greedily, dropping any whose |pearson| with an already-kept column
/// exceeds `redundancy`, until `top_k` are kept.
std::pair<FeatureMatrix, SelectionReport> select_features(const FeatureMatrix& matrix,
                                                          std::size_t top_k,
                                                          double redundancy = 0.95);

std::string_view to_string(SelectionStatus status);

// ─── Chronological split ─────────────────────────────────────────────────────

struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;  ///< exclusive
    [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
    bool operator==(const RowRange&) const = default;
};

struct SplitIndices {
    RowRange train;
    RowRange validation;
    RowRange test;
};

/// Boundaries at floor(n*f_train) and floor(n*(f_train+f_val)).
/// Throws Error{BadFractions} unless fractions are positive and sum to 1.
SplitIndices chronological_split(std::size_t n_rows,
                                 std::array<double, 3> fractions = {0.70, 0.15, 0.15});

// ─── PCA ─────────────────────────────────────────────────────────────────────

struct PcaModel {
    std::vector<double> mean;
    Matrix components;                ///< n_components x n_cols, orthonormal rows
    std::vector<double> eigenvalues;  ///< kept eigenvalues, descending
    double total_variance = 0.0;      ///< trace of the sample covariance

    [[nodiscard]] std::size_t n_components() const noexcept { return components.rows(); }
};

/// Sample covariance eigendecomposed by cyclic Jacobi; each component's
/// largest-magnitude entry is made positive. Throws Error{TooManyComponents}.
PcaModel pca_fit(const Matrix& matrix, std::size_t n_components);

/// Smallest component count whose cumulative eigenvalue share reaches
/// `fraction` (at least 1).
PcaModel pca_fit_variance(const Matrix& matrix, double fraction);

/// (rows - mean) * components^T. Throws Error{ShapeMismatch}.
Matrix pca_transform(const Matrix& matrix, const PcaModel& model);
Matrix pca_inverse_transform(const Matrix& projected, const PcaModel& model);

Matrix sample_covariance(const Matrix& matrix, std::span<const double> mean);

}  // namespace quantsig::preprocess
