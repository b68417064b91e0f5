#include "internal.hpp"

#include "quantsig/error.hpp"
#include "quantsig/linalg.hpp"
#include "quantsig/preprocess.hpp"
#include "quantsig/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace quantsig::models {

// ─── Linear regression ───────────────────────────────────────────────────────

LinearModel fit_linear_regression(const Matrix& x, std::span<const double> y, double ridge,
                                  std::vector<std::string> feature_names) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != n) throw Error(Errc::ShapeMismatch, "target length differs from row count");
    if (ridge < 0.0) throw Error(Errc::InvalidArgument, "ridge must be non-negative");
    if (n == 0) throw Error(Errc::InvalidArgument, "no training rows");
    for (double v : x.data()) {
        if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "non-finite feature value");
    }
    if (!feature_names.empty() && feature_names.size() != d)
        throw Error(Errc::ShapeMismatch, "feature name count differs from column count");

    // [X 1; sqrt(ridge) I 0] w = [y; 0]: the intercept is not penalised.
    const std::size_t extra = ridge > 0.0 ? d : 0;
    Matrix a(n + extra, d + 1);
    std::vector<double> b(n + extra, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) a(r, c) = x(r, c);
        a(r, d) = 1.0;
        b[r] = y[r];
    }
    const double s = std::sqrt(ridge);
    for (std::size_t j = 0; j < extra; ++j) a(n + j, j) = s;

    const auto coef = linalg::least_squares_qr(std::move(a), std::move(b));
    LinearModel m;
    m.weights.assign(coef.begin(), coef.begin() + static_cast<std::ptrdiff_t>(d));
    m.intercept = coef[d];
    m.feature_names = std::move(feature_names);
    return m;
}

// ─── LSTM ────────────────────────────────────────────────────────────────────

std::vector<std::span<double>> LstmParams::blocks() {
    return {std::span<double>(w_input.data()), std::span<double>(w_recurrent.data()), std::span<double>(bias),
            std::span<double>(head_w), std::span<double>(&head_b, 1)};
}

std::size_t LstmParams::size() const {
    return w_input.data().size() + w_recurrent.data().size() + bias.size() + head_w.size() + 1;
}

namespace {

LstmParams zeros_like(const LstmModel& m) {
    const std::size_t h = m.hidden_size;
    return {Matrix(4 * h, m.input_size), Matrix(4 * h, h), std::vector<double>(4 * h, 0.0),
            std::vector<double>(h, 0.0), 0.0};
}

struct StepCache {
    std::vector<double> i, f, o, g, c, h;
};

// Runs one window; fills caches when given. Returns the scalar output.
double run_window(const LstmModel& m, std::span<const double> window, std::vector<StepCache>* caches) {
    const std::size_t hs = m.hidden_size;
    const std::size_t in = m.input_size;
    const std::size_t steps = window.size() / in;
    const auto& p = m.params;
    std::vector<double> h(hs, 0.0), c(hs, 0.0), z(4 * hs);
    if (caches) caches->resize(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        const auto xt = window.subspan(t * in, in);
        for (std::size_t r = 0; r < 4 * hs; ++r) {
            double s = p.bias[r];
            auto wx = p.w_input.row(r);
            for (std::size_t k = 0; k < in; ++k) s += wx[k] * xt[k];
            auto wh = p.w_recurrent.row(r);
            for (std::size_t k = 0; k < hs; ++k) s += wh[k] * h[k];
            z[r] = s;
        }
        StepCache local;
        StepCache& sc = caches ? (*caches)[t] : local;
        sc.i.resize(hs);
        sc.f.resize(hs);
        sc.o.resize(hs);
        sc.g.resize(hs);
        for (std::size_t k = 0; k < hs; ++k) {
            sc.i[k] = detail::sigmoid(z[k]);
            sc.f[k] = detail::sigmoid(z[hs + k]);
            sc.o[k] = detail::sigmoid(z[2 * hs + k]);
            sc.g[k] = std::tanh(z[3 * hs + k]);
            c[k] = sc.f[k] * c[k] + sc.i[k] * sc.g[k];
            h[k] = sc.o[k] * std::tanh(c[k]);
        }
        if (caches) {
            sc.c = c;
            sc.h = h;
        }
    }
    return dot(p.head_w, h) + p.head_b;
}

void check_lstm_shape(const LstmModel& m, std::size_t width) {
    if (width != m.window_length * m.input_size)
        throw Error(Errc::ShapeMismatch, "window width " + std::to_string(width) + ", model expects " +
                                             std::to_string(m.window_length * m.input_size));
}

void accumulate_window_gradient(const LstmModel& m, std::span<const double> window, double target,
                                double weight, LstmParams& grad, double& loss) {
    const std::size_t hs = m.hidden_size;
    const std::size_t in = m.input_size;
    const std::size_t steps = window.size() / in;
    const auto& p = m.params;
    std::vector<StepCache> caches;
    const double out = run_window(m, window, &caches);
    const double err = out - target;
    loss += weight * err * err;

    const double dout = 2.0 * err * weight;
    const auto& h_last = caches.back().h;
    for (std::size_t k = 0; k < hs; ++k) grad.head_w[k] += dout * h_last[k];
    grad.head_b += dout;

    std::vector<double> dh(hs), dc(hs, 0.0), dz(4 * hs), dh_prev(hs);
    for (std::size_t k = 0; k < hs; ++k) dh[k] = dout * p.head_w[k];
    for (std::size_t t = steps; t-- > 0;) {
        const auto& sc = caches[t];
        const std::vector<double>* c_prev = t > 0 ? &caches[t - 1].c : nullptr;
        const std::vector<double>* h_prev = t > 0 ? &caches[t - 1].h : nullptr;
        for (std::size_t k = 0; k < hs; ++k) {
            const double tc = std::tanh(sc.c[k]);
            const double d_o = dh[k] * tc;
            dc[k] += dh[k] * sc.o[k] * (1.0 - tc * tc);
            const double d_i = dc[k] * sc.g[k];
            const double d_g = dc[k] * sc.i[k];
            const double d_f = c_prev ? dc[k] * (*c_prev)[k] : 0.0;
            dz[k] = d_i * sc.i[k] * (1.0 - sc.i[k]);
            dz[hs + k] = d_f * sc.f[k] * (1.0 - sc.f[k]);
            dz[2 * hs + k] = d_o * sc.o[k] * (1.0 - sc.o[k]);
            dz[3 * hs + k] = d_g * (1.0 - sc.g[k] * sc.g[k]);
            dc[k] *= sc.f[k];
        }
        const auto xt = window.subspan(t * in, in);
        std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
        for (std::size_t r = 0; r < 4 * hs; ++r) {
            const double g = dz[r];
            if (g == 0.0) continue;
            grad.bias[r] += g;
            auto gx = grad.w_input.row(r);
            for (std::size_t k = 0; k < in; ++k) gx[k] += g * xt[k];
            auto wh = p.w_recurrent.row(r);
            if (h_prev) {
                auto gh = grad.w_recurrent.row(r);
                for (std::size_t k = 0; k < hs; ++k) gh[k] += g * (*h_prev)[k];
            }
            for (std::size_t k = 0; k < hs; ++k) dh_prev[k] += wh[k] * g;
        }
        dh.swap(dh_prev);
    }
}

}  // namespace

void make_windows(std::span<const double> scaled, std::size_t window, Matrix& windows,
                  std::vector<double>& targets) {
    if (window == 0 || scaled.size() <= window) throw Error(Errc::SeriesTooShort, "series shorter than window + 1");
    const std::size_t n = scaled.size() - window;
    windows = Matrix(n, window);
    targets.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(scaled.begin() + static_cast<std::ptrdiff_t>(i),
                  scaled.begin() + static_cast<std::ptrdiff_t>(i + window), windows.row(i).begin());
        targets[i] = scaled[i + window];
    }
}

std::vector<double> lstm_forward(const LstmModel& model, const Matrix& scaled_windows) {
    check_lstm_shape(model, scaled_windows.cols());
    std::vector<double> out(scaled_windows.rows());
    for (std::size_t r = 0; r < scaled_windows.rows(); ++r) out[r] = run_window(model, scaled_windows.row(r), nullptr);
    return out;
}

double lstm_loss_and_gradient(const LstmModel& model, const Matrix& scaled_windows,
                              std::span<const double> targets, LstmParams& grad) {
    check_lstm_shape(model, scaled_windows.cols());
    if (targets.size() != scaled_windows.rows()) throw Error(Errc::ShapeMismatch, "target count differs from windows");
    grad = zeros_like(model);
    double loss = 0.0;
    const double w = 1.0 / static_cast<double>(scaled_windows.rows());
    for (std::size_t r = 0; r < scaled_windows.rows(); ++r)
        accumulate_window_gradient(model, scaled_windows.row(r), targets[r], w, grad, loss);
    return loss;
}

LstmModel fit_lstm(std::span<const double> scaled, const TrainConfig& cfg, double scale_min, double scale_max) {
    const auto r = detail::resolve(cfg, RegressorFamily::lstm);
    if (r.hidden_size < 1) throw Error(Errc::InvalidArgument, "hidden_size must be >= 1");
    if (cfg.window_length < 1) throw Error(Errc::InvalidArgument, "window_length must be >= 1");
    if (r.epochs < 1) throw Error(Errc::InvalidArgument, "epochs must be >= 1");
    if (cfg.batch_size < 1) throw Error(Errc::InvalidArgument, "batch_size must be >= 1");
    if (!(r.learning_rate > 0.0)) throw Error(Errc::InvalidArgument, "learning_rate must be positive");
    const auto window = static_cast<std::size_t>(cfg.window_length);
    if (scaled.size() <= window)
        throw Error(Errc::SeriesTooShort, std::to_string(scaled.size()) + " points for window " + std::to_string(window));

    LstmModel m;
    m.hidden_size = static_cast<std::size_t>(r.hidden_size);
    m.input_size = 1;
    m.window_length = window;
    m.scale_min = scale_min;
    m.scale_max = scale_max;
    m.params = zeros_like(m);

    CounterRng rng(cfg.seed);
    CounterRng init = rng.split(0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.hidden_size));
    for (double& v : m.params.w_input.data()) v = init.uniform(-bound, bound);
    for (double& v : m.params.w_recurrent.data()) v = init.uniform(-bound, bound);
    for (double& v : m.params.head_w) v = init.uniform(-bound, bound);
    for (std::size_t k = 0; k < m.hidden_size; ++k) m.params.bias[m.hidden_size + k] = 1.0;

    Matrix windows;
    std::vector<double> targets;
    make_windows(scaled, window, windows, targets);
    const std::size_t n = windows.rows();

    auto param_blocks = m.params.blocks();
    detail::Adam adam(param_blocks, r.learning_rate);
    LstmParams grad = zeros_like(m);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    CounterRng shuffler = rng.split(1);
    const auto batch = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 0; epoch < r.epochs; ++epoch) {
        shuffler.shuffle(std::span<std::size_t>(order));
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            grad = zeros_like(m);
            double loss = 0.0;
            const double w = 1.0 / static_cast<double>(end - start);
            for (std::size_t j = start; j < end; ++j)
                accumulate_window_gradient(m, windows.row(order[j]), targets[order[j]], w, grad, loss);
            if (!std::isfinite(loss)) throw Error(Errc::DivergedLoss, "non-finite LSTM loss at epoch " + std::to_string(epoch));
            auto grad_blocks = grad.blocks();
            detail::clip_global_norm(grad_blocks, cfg.clip_norm);
            adam.step(m.params.blocks(), grad_blocks);
        }
        const auto pred = lstm_forward(m, windows);
        double mse = 0.0;
        for (std::size_t i = 0; i < n; ++i) mse += (pred[i] - targets[i]) * (pred[i] - targets[i]);
        mse /= static_cast<double>(n);
        if (!std::isfinite(mse)) throw Error(Errc::DivergedLoss, "non-finite LSTM loss at epoch " + std::to_string(epoch));
        m.loss_history.push_back(mse);
    }
    return m;
}

std::vector<double> predict_regressor(const RegressorModel& model, const Matrix& x) {
    if (const auto* lin = std::get_if<LinearModel>(&model)) {
        detail::require_shape(x, lin->weights.size());
        std::vector<double> out(x.rows());
        for (std::size_t r = 0; r < x.rows(); ++r) out[r] = dot(lin->weights, x.row(r)) + lin->intercept;
        return out;
    }
    const auto& lstm = std::get<LstmModel>(model);
    check_lstm_shape(lstm, x.cols());
    Matrix scaled(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c)
            scaled(r, c) = preprocess::minmax_scale(x(r, c), lstm.scale_min, lstm.scale_max);
    auto out = lstm_forward(lstm, scaled);
    for (double& v : out) v = preprocess::minmax_unscale(v, lstm.scale_min, lstm.scale_max);
    return out;
}

}  // namespace quantsig::models
