#include "internal.hpp"

#include "quantsig/error.hpp"
#include "quantsig/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace quantsig::models {

std::vector<std::span<double>> MlpParams::blocks() {
    return {std::span<double>(w_hidden.data()), std::span<double>(b_hidden), std::span<double>(w_out),
            std::span<double>(&b_out, 1)};
}

std::size_t MlpParams::size() const { return w_hidden.data().size() + b_hidden.size() + w_out.size() + 1; }

namespace {

using detail::sigmoid;
using detail::softplus;

void require_finite(const Matrix& x) {
    for (double v : x.data()) {
        if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "non-finite feature value");
    }
}

// ─── Logistic regression ─────────────────────────────────────────────────────

// Mean logistic loss + l2/2 ||w||^2 at (w, b); fills the gradient.
double logistic_objective(const Matrix& x, std::span<const int> y, const std::vector<double>& w, double b,
                          double l2, std::vector<double>& gw, double& gb) {
    const std::size_t n = x.rows();
    std::fill(gw.begin(), gw.end(), 0.0);
    gb = 0.0;
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = x.row(r);
        const double z = dot(w, row) + b;
        loss += softplus(z) - y[r] * z;
        const double e = sigmoid(z) - y[r];
        for (std::size_t c = 0; c < w.size(); ++c) gw[c] += e * row[c];
        gb += e;
    }
    const double inv = 1.0 / static_cast<double>(n);
    double reg = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) {
        gw[c] = gw[c] * inv + l2 * w[c];
        reg += w[c] * w[c];
    }
    gb *= inv;
    return loss * inv + 0.5 * l2 * reg;
}

LogisticModel fit_logistic(const Matrix& x, std::span<const int> y, const TrainConfig& cfg) {
    const auto r = detail::resolve(cfg, ClassifierFamily::lr);
    if (r.epochs < 1) throw Error(Errc::InvalidArgument, "epochs must be >= 1");
    if (!(r.learning_rate > 0.0)) throw Error(Errc::InvalidArgument, "learning_rate must be positive");

    auto attempt = [&](double lr, bool& monotone) {
        LogisticModel m;
        m.w.assign(x.cols(), 0.0);
        m.learning_rate = lr;
        std::vector<double> gw(x.cols());
        double gb = 0.0;
        monotone = true;
        for (int epoch = 0; epoch <= r.epochs; ++epoch) {
            const double loss = logistic_objective(x, y, m.w, m.b, r.l2, gw, gb);
            if (!std::isfinite(loss)) throw Error(Errc::DivergedLoss, "non-finite logistic loss");
            if (!m.loss_history.empty() && loss > m.loss_history.back() + 1e-12) monotone = false;
            m.loss_history.push_back(loss);
            if (epoch == r.epochs) break;
            for (std::size_t c = 0; c < m.w.size(); ++c) m.w[c] -= lr * gw[c];
            m.b -= lr * gb;
        }
        return m;
    };

    bool monotone = true;
    auto model = attempt(r.learning_rate, monotone);
    if (!monotone) model = attempt(r.learning_rate / 2.0, monotone);
    return model;
}

// ─── Naive Bayes ─────────────────────────────────────────────────────────────

GnbModel fit_gnb(const Matrix& x, std::span<const int> y) {
    const std::size_t d = x.cols();
    const std::size_t n = x.rows();
    GnbModel m;
    double count[2] = {0.0, 0.0};
    for (int c = 0; c < 2; ++c) {
        m.mean[c].assign(d, 0.0);
        m.var[c].assign(d, 0.0);
    }
    for (std::size_t r = 0; r < n; ++r) {
        const int c = y[r];
        count[c] += 1.0;
        const auto row = x.row(r);
        for (std::size_t j = 0; j < d; ++j) m.mean[c][j] += row[j];
    }
    for (int c = 0; c < 2; ++c)
        for (auto& v : m.mean[c]) v /= count[c];
    for (std::size_t r = 0; r < n; ++r) {
        const int c = y[r];
        const auto row = x.row(r);
        for (std::size_t j = 0; j < d; ++j) {
            const double dv = row[j] - m.mean[c][j];
            m.var[c][j] += dv * dv;
        }
    }
    for (int c = 0; c < 2; ++c)
        for (auto& v : m.var[c]) v /= count[c];

    // Floor = 1e-9 times the largest per-feature variance of the whole sample.
    double max_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += x(r, j);
        mean /= static_cast<double>(n);
        double v = 0.0;
        for (std::size_t r = 0; r < n; ++r) v += (x(r, j) - mean) * (x(r, j) - mean);
        max_var = std::max(max_var, v / static_cast<double>(n));
    }
    m.var_floor = max_var > 0.0 ? 1e-9 * max_var : 1e-9;
    for (int c = 0; c < 2; ++c)
        for (auto& v : m.var[c]) v += m.var_floor;
    m.prior[0] = count[0] / static_cast<double>(n);
    m.prior[1] = count[1] / static_cast<double>(n);
    return m;
}

std::vector<double> gnb_scores(const GnbModel& m, const Matrix& x) {
    detail::require_shape(x, m.mean[0].size());
    std::vector<double> out(x.rows());
    const double base = std::log(m.prior[1]) - std::log(m.prior[0]);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto row = x.row(r);
        double s = base;
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double d1 = row[j] - m.mean[1][j];
            const double d0 = row[j] - m.mean[0][j];
            s += -0.5 * std::log(m.var[1][j]) - d1 * d1 / (2.0 * m.var[1][j]);
            s -= -0.5 * std::log(m.var[0][j]) - d0 * d0 / (2.0 * m.var[0][j]);
        }
        out[r] = s;
    }
    return out;
}

BnbModel fit_bnb(const Matrix& x, std::span<const int> y) {
    for (std::size_t i = 0; i < x.data().size(); ++i) {
        const double v = x.data()[i];
        if (v != 0.0 && v != 1.0)
            throw Error(Errc::NonBinaryFeatures, "value " + std::to_string(v) + " at row " +
                                                     std::to_string(i / std::max<std::size_t>(1, x.cols())) +
                                                     " is not 0 or 1");
    }
    const std::size_t d = x.cols();
    BnbModel m;
    double count[2] = {0.0, 0.0};
    m.prob[0].assign(d, 0.0);
    m.prob[1].assign(d, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const int c = y[r];
        count[c] += 1.0;
        const auto row = x.row(r);
        for (std::size_t j = 0; j < d; ++j) m.prob[c][j] += row[j];
    }
    for (int c = 0; c < 2; ++c)
        for (auto& p : m.prob[c]) p = (p + 1.0) / (count[c] + 2.0);
    const double n = static_cast<double>(x.rows());
    m.prior[0] = count[0] / n;
    m.prior[1] = count[1] / n;
    return m;
}

std::vector<double> bnb_scores(const BnbModel& m, const Matrix& x) {
    detail::require_shape(x, m.prob[0].size());
    const std::size_t d = m.prob[0].size();
    // Score = base + sum_j x_j * delta_j, with base holding the all-zero terms.
    double base = std::log(m.prior[1]) - std::log(m.prior[0]);
    std::vector<double> delta(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double off = std::log1p(-m.prob[1][j]) - std::log1p(-m.prob[0][j]);
        base += off;
        delta[j] = std::log(m.prob[1][j]) - std::log(m.prob[0][j]) - off;
    }
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = base + dot(delta, x.row(r));
    return out;
}

// ─── k nearest neighbours ────────────────────────────────────────────────────

std::vector<double> knn_scores(const KnnModel& m, const Matrix& x) {
    detail::require_shape(x, m.x.cols());
    const std::size_t n = m.x.rows();
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(m.k), n);
    std::vector<std::pair<double, std::size_t>> dist(n);
    std::vector<double> out(x.rows());
    for (std::size_t q = 0; q < x.rows(); ++q) {
        const auto query = x.row(q);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = m.x.row(i);
            double s = 0.0;
            if (m.metric == DistanceMetric::euclidean) {
                for (std::size_t j = 0; j < row.size(); ++j) s += (row[j] - query[j]) * (row[j] - query[j]);
            } else {
                for (std::size_t j = 0; j < row.size(); ++j) s += std::fabs(row[j] - query[j]);
            }
            dist[i] = {s, i};
        }
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
        int ones = 0;
        for (std::size_t i = 0; i < k; ++i) ones += m.y[dist[i].second];
        out[q] = static_cast<double>(ones) / static_cast<double>(k);
    }
    return out;
}

// ─── Linear SVM ──────────────────────────────────────────────────────────────

// Bias is the weight of a constant feature, so it is regularised and projected.
double svm_objective(const SvmModel& m, const Matrix& x, std::span<const int> y) {
    double hinge = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double s = y[r] ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - s * (dot(m.w, x.row(r)) + m.b));
    }
    return hinge / static_cast<double>(x.rows()) + 0.5 * m.lambda * (dot(m.w, m.w) + m.b * m.b);
}

SvmModel fit_svm(const Matrix& x, std::span<const int> y, const TrainConfig& cfg) {
    const auto r = detail::resolve(cfg, ClassifierFamily::svm);
    if (r.epochs < 1) throw Error(Errc::InvalidArgument, "epochs must be >= 1");
    if (!(r.l2 > 0.0)) throw Error(Errc::InvalidArgument, "svm lambda must be positive");
    SvmModel m;
    m.lambda = r.l2;
    m.w.assign(x.cols(), 0.0);
    const std::size_t n = x.rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    CounterRng shuffler = CounterRng(cfg.seed).split(0);
    const double radius = 1.0 / std::sqrt(m.lambda);
    // w is kept as scale * v so the shrink step is O(1).
    std::vector<double> v(x.cols(), 0.0);
    double scale = 1.0;
    double bias = 0.0;
    double sq = 0.0;  // ||v||^2, tracked incrementally
    long t = 0;
    for (int epoch = 0; epoch < r.epochs; ++epoch) {
        shuffler.shuffle(std::span<std::size_t>(order));
        for (auto i : order) {
            ++t;
            const double eta = 1.0 / (m.lambda * static_cast<double>(t));
            const auto row = x.row(i);
            const double s = y[i] ? 1.0 : -1.0;
            const double margin = s * (scale * dot(v, row) + bias);
            const double shrink = 1.0 - eta * m.lambda;
            if (shrink <= 0.0) {
                std::fill(v.begin(), v.end(), 0.0);
                scale = 1.0;
                sq = 0.0;
                bias = 0.0;
            } else {
                scale *= shrink;
                bias *= shrink;
            }
            if (margin < 1.0) {
                const double step = eta * s / scale;
                for (std::size_t j = 0; j < v.size(); ++j) {
                    const double nv = v[j] + step * row[j];
                    sq += nv * nv - v[j] * v[j];
                    v[j] = nv;
                }
                bias += eta * s;
            }
            const double norm = std::sqrt(std::max(0.0, scale * scale * sq + bias * bias));
            if (norm > radius) {
                const double f = radius / norm;
                scale *= f;
                bias *= f;
            }
            if (scale < 1e-100) {
                for (double& e : v) e *= scale;
                sq = dot(v, v);
                scale = 1.0;
            }
        }
        for (std::size_t j = 0; j < v.size(); ++j) m.w[j] = scale * v[j];
        m.b = bias;
        m.objective_history.push_back(svm_objective(m, x, y));
        // Resync the running square norm against drift.
        sq = dot(v, v);
    }
    return m;
}

// ─── MLP ─────────────────────────────────────────────────────────────────────

MlpParams mlp_zeros(std::size_t hidden, std::size_t inputs) {
    return {Matrix(hidden, inputs), std::vector<double>(hidden, 0.0), std::vector<double>(hidden, 0.0), 0.0};
}

// Adds the gradient of weight * BCE(row, label) into grad; returns the loss.
double mlp_accumulate(const MlpParams& p, std::span<const double> row, int label, double weight,
                      MlpParams& grad, std::vector<double>& h) {
    const std::size_t hs = p.b_hidden.size();
    for (std::size_t k = 0; k < hs; ++k) h[k] = std::tanh(dot(p.w_hidden.row(k), row) + p.b_hidden[k]);
    const double z = dot(p.w_out, h) + p.b_out;
    const double loss = softplus(z) - label * z;
    const double dz = weight * (sigmoid(z) - label);
    grad.b_out += dz;
    for (std::size_t k = 0; k < hs; ++k) {
        grad.w_out[k] += dz * h[k];
        const double da = dz * p.w_out[k] * (1.0 - h[k] * h[k]);
        if (da == 0.0) continue;
        grad.b_hidden[k] += da;
        auto g = grad.w_hidden.row(k);
        for (std::size_t j = 0; j < row.size(); ++j) g[j] += da * row[j];
    }
    return loss;
}

std::vector<double> mlp_scores(const MlpModel& m, const Matrix& x) {
    detail::require_shape(x, m.params.w_hidden.cols());
    std::vector<double> out(x.rows());
    std::vector<double> h(m.hidden_size);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto row = x.row(r);
        for (std::size_t k = 0; k < m.hidden_size; ++k)
            h[k] = std::tanh(dot(m.params.w_hidden.row(k), row) + m.params.b_hidden[k]);
        out[r] = sigmoid(dot(m.params.w_out, h) + m.params.b_out);
    }
    return out;
}

MlpModel fit_mlp(const Matrix& x, std::span<const int> y, const TrainConfig& cfg) {
    const auto r = detail::resolve(cfg, ClassifierFamily::ann);
    if (r.hidden_size < 1) throw Error(Errc::InvalidArgument, "hidden_size must be >= 1");
    if (r.epochs < 1) throw Error(Errc::InvalidArgument, "epochs must be >= 1");
    if (cfg.batch_size < 1) throw Error(Errc::InvalidArgument, "batch_size must be >= 1");
    if (!(r.learning_rate > 0.0)) throw Error(Errc::InvalidArgument, "learning_rate must be positive");
    const auto hs = static_cast<std::size_t>(r.hidden_size);
    const std::size_t d = x.cols();
    MlpModel m;
    m.hidden_size = hs;
    m.params = mlp_zeros(hs, d);

    CounterRng rng(cfg.seed);
    CounterRng init = rng.split(0);
    const double a_hidden = std::sqrt(6.0 / static_cast<double>(d + hs));
    const double a_out = std::sqrt(6.0 / static_cast<double>(hs + 1));
    for (double& v : m.params.w_hidden.data()) v = init.uniform(-a_hidden, a_hidden);
    for (double& v : m.params.w_out) v = init.uniform(-a_out, a_out);

    const std::size_t n = x.rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    CounterRng shuffler = rng.split(1);
    detail::Adam adam(m.params.blocks(), r.learning_rate);
    MlpParams grad = mlp_zeros(hs, d);
    std::vector<double> h(hs);
    const auto batch = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 0; epoch < r.epochs; ++epoch) {
        shuffler.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            for (auto blk : grad.blocks()) std::fill(blk.begin(), blk.end(), 0.0);
            const double w = 1.0 / static_cast<double>(end - start);
            for (std::size_t j = start; j < end; ++j)
                epoch_loss += mlp_accumulate(m.params, x.row(order[j]), y[order[j]], w, grad, h);
            adam.step(m.params.blocks(), grad.blocks());
        }
        epoch_loss /= static_cast<double>(n);
        if (!std::isfinite(epoch_loss))
            throw Error(Errc::DivergedLoss, "non-finite MLP loss at epoch " + std::to_string(epoch));
        m.loss_history.push_back(epoch_loss);
    }
    return m;
}

}  // namespace

double mlp_loss_and_gradient(const MlpModel& model, const Matrix& x, std::span<const int> y, MlpParams& grad) {
    detail::require_shape(x, model.params.w_hidden.cols());
    if (y.size() != x.rows()) throw Error(Errc::ShapeMismatch, "label count differs from row count");
    grad = mlp_zeros(model.hidden_size, x.cols());
    std::vector<double> h(model.hidden_size);
    const double w = 1.0 / static_cast<double>(x.rows());
    double loss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) loss += mlp_accumulate(model.params, x.row(r), y[r], w, grad, h);
    return loss * w;
}

ClassifierModel fit_classifier(const Matrix& x, std::span<const int> y, ClassifierFamily family,
                               const TrainConfig& cfg) {
    detail::require_binary_labels(y, x.rows());
    require_finite(x);
    switch (family) {
        case ClassifierFamily::lr: return fit_logistic(x, y, cfg);
        case ClassifierFamily::gnb: return fit_gnb(x, y);
        case ClassifierFamily::bnb: return fit_bnb(x, y);
        case ClassifierFamily::dt: return detail::fit_decision_tree(x, y, cfg);
        case ClassifierFamily::rf: return detail::fit_random_forest(x, y, cfg);
        case ClassifierFamily::knn: {
            if (cfg.k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
            return KnnModel{x, std::vector<int>(y.begin(), y.end()), cfg.k, cfg.metric};
        }
        case ClassifierFamily::svm: return fit_svm(x, y, cfg);
        case ClassifierFamily::xgb: return detail::fit_gradient_boosting(x, y, cfg);
        case ClassifierFamily::ann: return fit_mlp(x, y, cfg);
    }
    throw Error(Errc::InvalidArgument, "unknown classifier family");
}

std::vector<double> decision_scores(const ClassifierModel& model, const Matrix& x) {
    struct Visitor {
        const Matrix& x;
        std::vector<double> operator()(const LogisticModel& m) const {
            detail::require_shape(x, m.w.size());
            std::vector<double> out(x.rows());
            for (std::size_t r = 0; r < x.rows(); ++r) out[r] = sigmoid(dot(m.w, x.row(r)) + m.b);
            return out;
        }
        std::vector<double> operator()(const GnbModel& m) const { return gnb_scores(m, x); }
        std::vector<double> operator()(const BnbModel& m) const { return bnb_scores(m, x); }
        std::vector<double> operator()(const TreeModel& m) const {
            detail::require_shape(x, m.n_features);
            std::vector<double> out(x.rows());
            for (std::size_t r = 0; r < x.rows(); ++r) out[r] = m.evaluate(x.row(r));
            return out;
        }
        std::vector<double> operator()(const ForestModel& m) const {
            std::vector<double> out(x.rows(), 0.0);
            for (const auto& t : m.trees) {
                detail::require_shape(x, t.n_features);
                for (std::size_t r = 0; r < x.rows(); ++r) out[r] += t.evaluate(x.row(r));
            }
            for (double& v : out) v /= static_cast<double>(m.trees.size());
            return out;
        }
        std::vector<double> operator()(const KnnModel& m) const { return knn_scores(m, x); }
        std::vector<double> operator()(const SvmModel& m) const {
            detail::require_shape(x, m.w.size());
            std::vector<double> out(x.rows());
            for (std::size_t r = 0; r < x.rows(); ++r) out[r] = dot(m.w, x.row(r)) + m.b;
            return out;
        }
        std::vector<double> operator()(const GbtModel& m) const {
            std::vector<double> out(x.rows(), m.initial_log_odds);
            for (const auto& t : m.trees) {
                detail::require_shape(x, t.n_features);
                for (std::size_t r = 0; r < x.rows(); ++r) out[r] += m.learning_rate * t.evaluate(x.row(r));
            }
            return out;
        }
        std::vector<double> operator()(const MlpModel& m) const { return mlp_scores(m, x); }
    };
    return std::visit(Visitor{x}, model);
}

double decision_threshold(const ClassifierModel& model) {
    switch (family_of(model)) {
        case ClassifierFamily::gnb:
        case ClassifierFamily::bnb:
        case ClassifierFamily::svm:
        case ClassifierFamily::xgb:
            return 0.0;
        default:
            return 0.5;
    }
}

std::vector<int> predict_labels(const ClassifierModel& model, const Matrix& x) {
    const auto scores = decision_scores(model, x);
    const double thr = decision_threshold(model);
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= thr ? 1 : 0;
    return out;
}

}  // namespace quantsig::models
