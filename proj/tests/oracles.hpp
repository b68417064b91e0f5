#pragma once

// Naive reference implementations used as independent oracles. Each one is
// written from the definition, with no shared code or shortcuts from the
// library (no running sums, no presorting, no pivot tricks beyond partial
// pivoting).

#include "quantsig/marketdata.hpp"
#include "quantsig/matrix.hpp"
#include "quantsig/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <unistd.h>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Series = std::vector<std::optional<double>>;

inline Series sma(const std::vector<double>& c, int window) {
    const auto n = static_cast<int>(c.size());
    Series out(c.size());
    for (int t = window; t < n; ++t) {
        double s = 0.0;
        for (int j = t - window; j < t; ++j) s += c[j];
        out[t] = s / window;
    }
    return out;
}

inline Series ema(const std::vector<double>& c, int span) {
    const auto n = static_cast<int>(c.size());
    Series out(c.size());
    const double g = 2.0 / (span + 1.0);
    double seed = 0.0;
    for (int j = 0; j < span; ++j) seed += c[j];
    double e = seed / span;
    out[span - 1] = e;
    for (int t = span; t < n; ++t) {
        e = g * c[t] + (1.0 - g) * e;
        out[t] = e;
    }
    return out;
}

inline Series macd(const std::vector<double>& c, int k, int d) {
    const auto a = ema(c, k);
    const auto b = ema(c, d);
    Series out(c.size());
    for (std::size_t t = 0; t < c.size(); ++t)
        if (a[t] && b[t]) out[t] = *a[t] - *b[t];
    return out;
}

inline Series obv(const std::vector<double>& c, const std::vector<double>& v) {
    Series out(c.size());
    for (std::size_t t = 0; t < c.size(); ++t) {
        double s = 0.0;
        for (std::size_t j = 1; j <= t; ++j) {
            if (c[j] > c[j - 1]) s += v[j];
            if (c[j] < c[j - 1]) s -= v[j];
        }
        out[t] = s;
    }
    return out;
}

inline Series rsi(const std::vector<double>& c, int period, bool standard) {
    const auto n = static_cast<int>(c.size());
    Series out(c.size());
    for (int t = period; t < n; ++t) {
        std::vector<double> gains, losses;
        for (int j = t - period + 1; j <= t; ++j) {
            const double d = c[j] - c[j - 1];
            gains.push_back(d > 0 ? d : 0.0);
            losses.push_back(d < 0 ? -d : 0.0);
        }
        double g = 0.0, l = 0.0;
        for (double x : gains) g += x;
        for (double x : losses) l += x;
        g /= period;
        l /= period;
        if (g == 0.0 && l == 0.0) out[t] = 50.0;
        else if (l == 0.0) out[t] = standard ? 100.0 : 0.0;
        else out[t] = standard ? 100.0 - 100.0 / (1.0 + g / l) : 100.0 / (1.0 + g / l);
    }
    return out;
}

/// Fraction of (positive, negative) pairs ranked correctly; ties count half.
inline double auc_pairs(const std::vector<int>& y, const std::vector<double>& s) {
    double good = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[j] != 0) continue;
            pairs += 1.0;
            if (s[i] > s[j]) good += 1.0;
            else if (s[i] == s[j]) good += 0.5;
        }
    }
    return good / pairs;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        if (a[col][col] == 0.0) throw std::runtime_error("singular");
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

/// Least squares with intercept via the normal equations [1 X]^T [1 X].
/// Returns {intercept, w...}.
inline std::vector<double> normal_equations(const quantsig::Matrix& x, const std::vector<double>& y) {
    const std::size_t n = x.rows(), d = x.cols() + 1;
    std::vector<std::vector<double>> ata(d, std::vector<double>(d, 0.0));
    std::vector<double> aty(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<double> row{1.0};
        for (std::size_t c = 0; c < x.cols(); ++c) row.push_back(x(r, c));
        for (std::size_t i = 0; i < d; ++i) {
            aty[i] += row[i] * y[r];
            for (std::size_t j = 0; j < d; ++j) ata[i][j] += row[i] * row[j];
        }
    }
    return gauss_solve(ata, aty);
}

/// Class-1 fraction of the k nearest training rows; full sort of every
/// distance, ties by lower row index.
inline std::vector<double> knn_scores(const quantsig::Matrix& train, const std::vector<int>& y,
                                      const quantsig::Matrix& query, int k, bool manhattan) {
    std::vector<double> out;
    for (std::size_t q = 0; q < query.rows(); ++q) {
        std::vector<std::pair<double, std::size_t>> d;
        for (std::size_t r = 0; r < train.rows(); ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < train.cols(); ++c) {
                const double diff = train(r, c) - query(q, c);
                s += manhattan ? std::fabs(diff) : diff * diff;
            }
            d.emplace_back(manhattan ? s : std::sqrt(s), r);
        }
        std::sort(d.begin(), d.end());
        const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), d.size());
        double ones = 0.0;
        for (std::size_t i = 0; i < kk; ++i) ones += y[d[i].second];
        out.push_back(ones / static_cast<double>(kk));
    }
    return out;
}

inline std::vector<double> random_walk(quantsig::CounterRng& rng, std::size_t n, double start = 100.0) {
    std::vector<double> c(n);
    double p = start;
    for (auto& v : c) {
        p *= std::exp(0.02 * rng.normal());
        // Round to cents so exact ties (zero changes) occur now and then.
        v = std::round(p * 100.0) / 100.0;
    }
    return c;
}

/// Business-day OHLCV random walk starting 2015-01-05.
inline quantsig::marketdata::OhlcvSeries synthetic_series(std::size_t n, std::uint64_t seed) {
    using quantsig::Date;
    quantsig::CounterRng rng(seed);
    quantsig::marketdata::OhlcvSeries s;
    s.symbol = "TEST";
    auto d = Date::from_ymd(2015, 1, 5);
    double close = 50.0;
    while (s.bars.size() < n) {
        const auto weekday = ((d.days() % 7) + 7 + 3) % 7;
        if (weekday < 5) {
            const double open = close * std::exp(0.004 * rng.normal());
            close = open * std::exp(0.015 * rng.normal());
            quantsig::marketdata::OhlcvBar b;
            b.date = d;
            b.open = open;
            b.close = close;
            b.adj_close = close;
            b.high = std::max(open, close) * (1.0 + 0.003 * std::fabs(rng.normal()));
            b.low = std::min(open, close) * (1.0 - 0.003 * std::fabs(rng.normal()));
            b.volume = 1000000 + static_cast<std::int64_t>(rng.below(500000));
            s.bars.push_back(b);
        }
        d = Date::from_days(d.days() + 1);
    }
    return s;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("quantsig_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace oracle
