#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace quantsig::metrics {

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    [[nodiscard]] std::size_t total() const noexcept { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

/// Zero-denominator ratios are reported as 0 with the matching flag set.
struct ClassificationReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    ConfusionMatrix matrix;
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
};

struct RegressionReport {
    double r2 = 0.0;
    double explained_variance_score = 0.0;  ///< 1 - var(y - yhat) / var(y)
    double ev_raw = 0.0;                    ///< sum (yhat - mean(y))^2
    double mape_percent = 0.0;              ///< over non-zero targets only
    double rmse = 0.0;
    double mae = 0.0;
    std::size_t n = 0;
    std::size_t mape_excluded = 0;  ///< zero targets left out of MAPE
};

struct RocCurve {
    std::vector<std::pair<double, double>> points;  ///< (fpr, tpr), (0,0) .. (1,1)
    double auc = 0.0;
};

/// Throws Error{LengthMismatch | ZeroVariance}.
RegressionReport regression_report(std::span<const double> y, std::span<const double> yhat);

/// Labels are 0/1. Throws Error{LengthMismatch}.
ClassificationReport classification_report(std::span<const int> y, std::span<const int> yhat);

/// Thresholds sweep the distinct scores in descending order; tied scores
/// form one diagonal step. AUC by the trapezoidal rule.
/// Throws Error{LengthMismatch | SingleClass}.
RocCurve roc_auc(std::span<const int> y, std::span<const double> scores);

/// Fixed-width, left-aligned first column, right-aligned others.
std::string render_text_table(const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& rows);

/// Metric names in table order.
inline const std::vector<std::string>& regression_metric_names() {
    static const std::vector<std::string> names{"R2", "Explained Variation", "MAPE", "RMSE", "MAE"};
    return names;
}
inline const std::vector<std::string>& classification_metric_names() {
    static const std::vector<std::string> names{"Precision", "Recall", "F1-score", "Accuracy", "AUC"};
    return names;
}

/// Values in regression_metric_names() order.
std::vector<double> regression_row(const RegressionReport& r);
/// Values in classification_metric_names() order.
std::vector<double> classification_row(const ClassificationReport& r, double auc);

}  // namespace quantsig::metrics
