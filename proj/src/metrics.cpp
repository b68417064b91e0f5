#include "quantsig/metrics.hpp"

#include "quantsig/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace quantsig::metrics {

RegressionReport regression_report(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) throw Error(Errc::LengthMismatch, "y and yhat differ in length");
    if (y.size() < 2) throw Error(Errc::InvalidArgument, "regression report needs >= 2 points");
    const double n = static_cast<double>(y.size());
    const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;

    double ss_res = 0.0, ss_tot = 0.0, ev_raw = 0.0, abs_sum = 0.0, ape_sum = 0.0;
    double resid_sum = 0.0;
    std::size_t ape_n = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - yhat[i];
        ss_res += e * e;
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
        ev_raw += (yhat[i] - mean_y) * (yhat[i] - mean_y);
        abs_sum += std::fabs(e);
        resid_sum += e;
        if (y[i] != 0.0) {
            ape_sum += std::fabs(e / y[i]);
            ++ape_n;
        }
    }
    if (ss_tot == 0.0) throw Error(Errc::ZeroVariance, "targets are constant; R2 is undefined");
    const double resid_mean = resid_sum / n;
    double resid_var = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = (y[i] - yhat[i]) - resid_mean;
        resid_var += d * d;
    }

    RegressionReport r;
    r.n = y.size();
    r.r2 = 1.0 - ss_res / ss_tot;
    r.explained_variance_score = 1.0 - resid_var / ss_tot;
    r.ev_raw = ev_raw;
    r.rmse = std::sqrt(ss_res / n);
    r.mae = abs_sum / n;
    r.mape_excluded = y.size() - ape_n;
    r.mape_percent = ape_n ? 100.0 * ape_sum / static_cast<double>(ape_n)
                           : std::numeric_limits<double>::quiet_NaN();
    return r;
}

ClassificationReport classification_report(std::span<const int> y, std::span<const int> yhat) {
    if (y.size() != yhat.size()) throw Error(Errc::LengthMismatch, "y and yhat differ in length");
    if (y.empty()) throw Error(Errc::InvalidArgument, "classification report needs >= 1 sample");
    ClassificationReport r;
    auto& m = r.matrix;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const bool truth = y[i] != 0;
        const bool pred = yhat[i] != 0;
        if (truth && pred) ++m.tp;
        else if (!truth && pred) ++m.fp;
        else if (truth && !pred) ++m.fn;
        else ++m.tn;
    }
    const auto ratio = [](std::size_t num, std::size_t den, bool& undefined) {
        undefined = den == 0;
        return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    r.precision = ratio(m.tp, m.tp + m.fp, r.precision_undefined);
    r.recall = ratio(m.tp, m.tp + m.fn, r.recall_undefined);
    r.f1_undefined = r.precision + r.recall == 0.0;
    r.f1 = r.f1_undefined ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    r.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
    return r;
}

RocCurve roc_auc(std::span<const int> y, std::span<const double> scores) {
    if (y.size() != scores.size()) throw Error(Errc::LengthMismatch, "labels and scores differ in length");
    const auto positives = static_cast<std::size_t>(std::count_if(y.begin(), y.end(), [](int v) { return v != 0; }));
    const std::size_t negatives = y.size() - positives;
    if (positives == 0 || negatives == 0) throw Error(Errc::SingleClass, "ROC needs both classes");

    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0;
    double area = 0.0;
    const double p = static_cast<double>(positives);
    const double q = static_cast<double>(negatives);
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        const std::size_t tp0 = tp, fp0 = fp;
        for (; i < order.size() && scores[order[i]] == s; ++i) {
            if (y[order[i]] != 0) ++tp;
            else ++fp;
        }
        // Trapezoid in count space keeps the sum exact until the final division.
        area += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0);
        curve.points.emplace_back(static_cast<double>(fp) / q, static_cast<double>(tp) / p);
    }
    curve.auc = area / (2.0 * p * q);
    return curve;
}

std::string render_text_table(const std::vector<std::string>& header,
                              const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());

    auto line = [&](const std::vector<std::string>& cells) {
        std::string out;
        for (std::size_t c = 0; c < width.size(); ++c) {
            const std::string cell = c < cells.size() ? cells[c] : "";
            const std::string pad(width[c] - cell.size(), ' ');
            out += c == 0 ? cell + pad : "  " + pad + cell;
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        return out + "\n";
    };
    std::string out = line(header);
    std::size_t total = 0;
    for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c ? 2 : 0);
    out += std::string(total, '-') + "\n";
    for (const auto& row : rows) out += line(row);
    return out;
}

std::vector<double> regression_row(const RegressionReport& r) {
    return {r.r2, r.explained_variance_score, r.mape_percent, r.rmse, r.mae};
}

std::vector<double> classification_row(const ClassificationReport& r, double auc) {
    return {r.precision, r.recall, r.f1, r.accuracy, auc};
}

}  // namespace quantsig::metrics
