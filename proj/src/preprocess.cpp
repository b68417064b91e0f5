#include "quantsig/preprocess.hpp"

#include "quantsig/error.hpp"
#include "quantsig/io.hpp"
#include "quantsig/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace quantsig::preprocess {

ScalerParams fit_minmax(const Matrix& matrix) {
    if (matrix.rows() == 0) throw Error(Errc::InvalidArgument, "cannot fit a scaler on zero rows");
    ScalerParams p;
    p.min.assign(matrix.cols(), 0.0);
    p.max.assign(matrix.cols(), 0.0);
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
        p.columns.push_back("x" + std::to_string(c));
        double lo = matrix(0, c);
        double hi = lo;
        for (std::size_t r = 1; r < matrix.rows(); ++r) {
            lo = std::min(lo, matrix(r, c));
            hi = std::max(hi, matrix(r, c));
        }
        p.min[c] = lo;
        p.max[c] = hi;
    }
    return p;
}

ScalerParams fit_minmax(const FeatureMatrix& matrix) {
    ScalerParams p = fit_minmax(matrix.rows);
    p.columns = matrix.column_names;
    return p;
}

double minmax_scale(double value, double lo, double hi) {
    return hi == lo ? 0.0 : (value - lo) / (hi - lo);
}

double minmax_unscale(double scaled, double lo, double hi) { return lo + scaled * (hi - lo); }

Matrix apply_minmax(const Matrix& matrix, const ScalerParams& params) {
    if (params.min.size() != matrix.cols() || params.max.size() != matrix.cols())
        throw Error(Errc::ColumnMismatch, "scaler fitted on " + std::to_string(params.min.size()) +
                                              " columns, matrix has " + std::to_string(matrix.cols()));
    Matrix out(matrix.rows(), matrix.cols());
    for (std::size_t r = 0; r < matrix.rows(); ++r)
        for (std::size_t c = 0; c < matrix.cols(); ++c)
            out(r, c) = minmax_scale(matrix(r, c), params.min[c], params.max[c]);
    return out;
}

FeatureMatrix apply_minmax(const FeatureMatrix& matrix, const ScalerParams& params) {
    if (params.columns != matrix.column_names)
        throw Error(Errc::ColumnMismatch, "scaler columns differ from matrix columns");
    FeatureMatrix out = matrix;
    out.rows = apply_minmax(matrix.rows, params);
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(Errc::LengthMismatch, "pearson inputs differ in length");
    if (x.size() < 2) throw Error(Errc::InvalidArgument, "pearson needs at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error(Errc::ZeroVariance, "pearson input is constant");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string_view to_string(SelectionStatus status) {
    switch (status) {
        case SelectionStatus::kept: return "kept";
        case SelectionStatus::redundant: return "redundant";
        case SelectionStatus::zero_variance: return "zero_variance";
        case SelectionStatus::not_reached: return "not_reached";
    }
    return "unknown";
}

std::pair<FeatureMatrix, SelectionReport> select_features(const FeatureMatrix& matrix,
                                                          std::size_t top_k, double redundancy) {
    if (top_k < 1) throw Error(Errc::InvalidArgument, "top_k must be >= 1");
    if (matrix.target.size() != matrix.n_rows())
        throw Error(Errc::ShapeMismatch, "matrix has no aligned target");

    SelectionReport report;
    std::vector<std::vector<double>> columns(matrix.n_cols());
    std::vector<std::pair<std::size_t, double>> ranked;
    std::vector<SelectionEntry> unranked;
    for (std::size_t c = 0; c < matrix.n_cols(); ++c) {
        columns[c] = matrix.rows.column(c);
        try {
            ranked.emplace_back(c, pearson(columns[c], matrix.target));
        } catch (const Error& e) {
            if (e.code() != Errc::ZeroVariance) throw;
            unranked.push_back({matrix.column_names[c], 0, 0.0, SelectionStatus::zero_variance,
                                "constant column"});
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return std::fabs(a.second) > std::fabs(b.second);
    });

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto [col, score] = ranked[i];
        SelectionEntry entry{matrix.column_names[col], i + 1, score, SelectionStatus::kept, ""};
        if (kept.size() >= top_k) {
            entry.status = SelectionStatus::not_reached;
            entry.reason = "top_k reached";
        } else {
            for (std::size_t k : kept) {
                const double r = pearson(columns[col], columns[k]);
                if (std::fabs(r) > redundancy) {
                    entry.status = SelectionStatus::redundant;
                    entry.reason = "|corr| with " + matrix.column_names[k] + " = " + io::format_fixed(std::fabs(r), 6);
                    break;
                }
            }
            if (entry.status == SelectionStatus::kept) kept.push_back(col);
        }
        report.entries.push_back(std::move(entry));
    }
    report.entries.insert(report.entries.end(), unranked.begin(), unranked.end());
    for (std::size_t k : kept) report.kept.push_back(matrix.column_names[k]);
    if (kept.empty()) throw Error(Errc::ZeroVariance, "no column has usable variance");
    return {matrix.select_columns(kept), std::move(report)};
}

std::string SelectionReport::to_csv() const {
    std::string out = "column,rank,score,status,reason\n";
    for (const auto& e : entries) {
        out += io::csv_line({e.column, std::to_string(e.rank), io::format_real(e.score),
                             std::string(to_string(e.status)), e.reason});
    }
    return out;
}

SplitIndices chronological_split(std::size_t n_rows, std::array<double, 3> fractions) {
    const double sum = fractions[0] + fractions[1] + fractions[2];
    for (double f : fractions) {
        if (!(f > 0.0)) throw Error(Errc::BadFractions, "fractions must be positive");
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw Error(Errc::BadFractions, "fractions must sum to 1");
    if (n_rows < 3) throw Error(Errc::BadFractions, "need at least 3 rows to split");
    const double n = static_cast<double>(n_rows);
    const auto a = static_cast<std::size_t>(std::floor(n * fractions[0]));
    const auto b = static_cast<std::size_t>(std::floor(n * (fractions[0] + fractions[1])));
    if (a == 0 || b <= a || b >= n_rows)
        throw Error(Errc::BadFractions, "a split would be empty for " + std::to_string(n_rows) + " rows");
    return {{0, a}, {a, b}, {b, n_rows}};
}

Matrix sample_covariance(const Matrix& matrix, std::span<const double> mean) {
    const std::size_t n = matrix.rows();
    const std::size_t d = matrix.cols();
    Matrix cov(d, d);
    std::vector<double> centered(d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) centered[c] = matrix(r, c) - mean[c];
        for (std::size_t i = 0; i < d; ++i) {
            const double ci = centered[i];
            if (ci == 0.0) continue;
            auto row = cov.row(i);
            for (std::size_t j = i; j < d; ++j) row[j] += ci * centered[j];
        }
    }
    const double denom = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            cov(i, j) /= denom;
            cov(j, i) = cov(i, j);
        }
    }
    return cov;
}

namespace {

struct FullPca {
    std::vector<double> mean;
    linalg::SymmetricEigen eig;
    double trace = 0.0;
};

FullPca decompose(const Matrix& matrix) {
    if (matrix.rows() < 2) throw Error(Errc::InvalidArgument, "PCA needs at least two rows");
    FullPca f;
    f.mean.assign(matrix.cols(), 0.0);
    for (std::size_t r = 0; r < matrix.rows(); ++r)
        for (std::size_t c = 0; c < matrix.cols(); ++c) f.mean[c] += matrix(r, c);
    for (auto& m : f.mean) m /= static_cast<double>(matrix.rows());
    const Matrix cov = sample_covariance(matrix, f.mean);
    for (std::size_t i = 0; i < cov.rows(); ++i) f.trace += cov(i, i);
    f.eig = linalg::jacobi_eigen(cov, 1e-12, 100);
    return f;
}

PcaModel truncate(const FullPca& f, std::size_t k) {
    const std::size_t d = f.mean.size();
    PcaModel model;
    model.mean = f.mean;
    model.total_variance = f.trace;
    model.components = Matrix(k, d);
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t argmax = 0;
        for (std::size_t i = 1; i < d; ++i) {
            if (std::fabs(f.eig.vectors(i, j)) > std::fabs(f.eig.vectors(argmax, j))) argmax = i;
        }
        const double sign = f.eig.vectors(argmax, j) < 0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < d; ++i) model.components(j, i) = sign * f.eig.vectors(i, j);
        // Round-off can leave tiny negatives on a PSD covariance.
        model.eigenvalues.push_back(std::max(0.0, f.eig.values[j]));
    }
    return model;
}

}  // namespace

PcaModel pca_fit(const Matrix& matrix, std::size_t n_components) {
    if (n_components > matrix.cols() || n_components == 0)
        throw Error(Errc::TooManyComponents, std::to_string(n_components) + " components for " +
                                                 std::to_string(matrix.cols()) + " columns");
    return truncate(decompose(matrix), n_components);
}

PcaModel pca_fit_variance(const Matrix& matrix, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw Error(Errc::InvalidArgument, "variance fraction must be in (0, 1]");
    const FullPca f = decompose(matrix);
    double total = 0.0;
    for (double v : f.eig.values) total += std::max(0.0, v);
    std::size_t k = 1;
    if (total > 0.0) {
        double acc = 0.0;
        for (k = 0; k < f.eig.values.size();) {
            acc += std::max(0.0, f.eig.values[k]);
            ++k;
            if (acc >= fraction * total - 1e-15 * total) break;
        }
    }
    return truncate(f, std::max<std::size_t>(k, 1));
}

Matrix pca_transform(const Matrix& matrix, const PcaModel& model) {
    if (matrix.cols() != model.mean.size())
        throw Error(Errc::ShapeMismatch, "PCA input width differs from fitted width");
    Matrix out(matrix.rows(), model.n_components());
    std::vector<double> centered(matrix.cols());
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        for (std::size_t c = 0; c < matrix.cols(); ++c) centered[c] = matrix(r, c) - model.mean[c];
        for (std::size_t j = 0; j < model.n_components(); ++j) out(r, j) = dot(centered, model.components.row(j));
    }
    return out;
}

Matrix pca_inverse_transform(const Matrix& projected, const PcaModel& model) {
    if (projected.cols() != model.n_components())
        throw Error(Errc::ShapeMismatch, "projected width differs from component count");
    Matrix out = matmul(projected, model.components);
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += model.mean[c];
    return out;
}

}  // namespace quantsig::preprocess
