#include "quantsig/error.hpp"
#include "quantsig/persist.hpp"
#include "quantsig/preprocess.hpp"

#include "oracles.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace quantsig;
using namespace quantsig::preprocess;

namespace {

FeatureMatrix frame_from_columns(const std::vector<std::vector<double>>& cols, std::vector<double> target) {
    FeatureMatrix f;
    const std::size_t n = target.size();
    f.rows = Matrix(n, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        f.column_names.push_back("c" + std::to_string(c));
        for (std::size_t r = 0; r < n; ++r) f.rows(r, c) = cols[c][r];
    }
    f.target = std::move(target);
    for (std::size_t r = 0; r < n; ++r) f.index.push_back(std::to_string(r));
    return f;
}

double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

}  // namespace

TEST(MinMax, EndpointsConstantAndNoClipping) {
    Matrix m(3, 2);
    m(0, 0) = 3; m(1, 0) = 7; m(2, 0) = 5;
    m(0, 1) = 4; m(1, 1) = 4; m(2, 1) = 4;
    const auto p = fit_minmax(m);
    EXPECT_EQ(p.min[0], 3.0);
    EXPECT_EQ(p.max[0], 7.0);
    const auto s = apply_minmax(m, p);
    EXPECT_EQ(s(0, 0), 0.0);
    EXPECT_EQ(s(1, 0), 1.0);
    EXPECT_EQ(s(2, 0), 0.5);
    for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(s(r, 1), 0.0);
    EXPECT_EQ(minmax_scale(15.0, 0.0, 10.0), 1.5);
    EXPECT_DOUBLE_EQ(minmax_unscale(minmax_scale(12.3, 2.0, 40.0), 2.0, 40.0), 12.3);
}

TEST(MinMax, ColumnMismatch) {
    const auto p = fit_minmax(Matrix(4, 2, 1.0));
    try {
        apply_minmax(Matrix(4, 3), p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ColumnMismatch);
    }
}

TEST(Pearson, HandValuesAndSymmetries) {
    EXPECT_NEAR(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 5}), 0.9819805060619657, 1e-12);
    CounterRng rng(8);
    std::vector<double> x(50), neg(50);
    for (std::size_t i = 0; i < 50; ++i) neg[i] = -(x[i] = rng.normal());
    EXPECT_NEAR(pearson(x, x), 1.0, 1e-12);
    EXPECT_NEAR(pearson(x, neg), -1.0, 1e-12);
    try {
        pearson(x, std::vector<double>(50, 1.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ZeroVariance);
    }
}

TEST(Selection, TargetCopyRankedFirstAndDuplicatesDropped) {
    CounterRng rng(4);
    std::vector<double> y(80), noise(80), dup(80);
    for (std::size_t i = 0; i < 80; ++i) {
        y[i] = rng.normal();
        noise[i] = rng.normal();
    }
    dup = noise;
    const auto f = frame_from_columns({noise, y, dup, std::vector<double>(80, 2.0)}, y);
    const auto [kept, report] = select_features(f, 10, 0.95);
    ASSERT_FALSE(report.kept.empty());
    EXPECT_EQ(report.kept[0], "c1");
    const bool has0 = std::count(report.kept.begin(), report.kept.end(), "c0") > 0;
    const bool has2 = std::count(report.kept.begin(), report.kept.end(), "c2") > 0;
    EXPECT_NE(has0, has2);
    int redundant = 0, zero = 0;
    for (const auto& e : report.entries) {
        redundant += e.status == SelectionStatus::redundant;
        zero += e.status == SelectionStatus::zero_variance;
    }
    EXPECT_EQ(redundant, 1);
    EXPECT_EQ(zero, 1);
    EXPECT_EQ(kept.n_cols(), report.kept.size());
}

TEST(Selection, MatchesExhaustiveOracle) {
    CounterRng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 120;
        std::vector<double> y(n);
        for (auto& v : y) v = rng.normal();
        std::vector<std::vector<double>> cols(5, std::vector<double>(n));
        const double mix[5] = {0.9, 0.5, 0.2, 0.0, 0.7};
        for (std::size_t c = 0; c < 5; ++c)
            for (std::size_t r = 0; r < n; ++r) cols[c][r] = mix[c] * y[r] + (1 - mix[c]) * rng.normal();
        // plant a near-copy of column 0
        for (std::size_t r = 0; r < n; ++r) cols[4][r] = cols[0][r] + 0.01 * rng.normal();
        const std::size_t top_k = 1 + rng.below(5);
        const double rho = trial % 2 ? 0.95 : 0.6;

        // every correlation, evaluated directly
        std::vector<double> ct(5);
        std::vector<std::vector<double>> cc(5, std::vector<double>(5));
        for (std::size_t a = 0; a < 5; ++a) {
            ct[a] = naive_pearson(cols[a], y);
            for (std::size_t b = 0; b < 5; ++b) cc[a][b] = naive_pearson(cols[a], cols[b]);
        }
        std::vector<std::size_t> order{0, 1, 2, 3, 4};
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return std::fabs(ct[a]) > std::fabs(ct[b]); });
        std::vector<std::string> want;
        std::vector<std::size_t> chosen;
        for (auto c : order) {
            if (want.size() == top_k) break;
            bool ok = true;
            for (auto k : chosen) ok = ok && std::fabs(cc[c][k]) <= rho;
            if (ok) {
                chosen.push_back(c);
                want.push_back("c" + std::to_string(c));
            }
        }
        const auto [m, report] = select_features(frame_from_columns(cols, y), top_k, rho);
        EXPECT_EQ(report.kept, want) << "trial " << trial;
        for (const auto& e : report.entries) {
            const auto c = static_cast<std::size_t>(std::stoi(e.column.substr(1)));
            EXPECT_NEAR(e.score, ct[c], 1e-12);
        }
    }
}

TEST(Split, FloorArithmetic) {
    auto s = chronological_split(100);
    EXPECT_EQ(s.train, (RowRange{0, 70}));
    EXPECT_EQ(s.validation, (RowRange{70, 85}));
    EXPECT_EQ(s.test, (RowRange{85, 100}));
    s = chronological_split(10, {0.8, 0.1, 0.1});
    EXPECT_EQ(s.train.size(), 8u);
    EXPECT_EQ(s.validation.size(), 1u);
    EXPECT_EQ(s.test.size(), 1u);
    for (auto bad : {std::array<double, 3>{0.5, 0.5, 0.5}, std::array<double, 3>{1.0, 0.0, 0.0},
                     std::array<double, 3>{-0.1, 0.6, 0.5}}) {
        try {
            chronological_split(100, bad);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::BadFractions);
        }
    }
}

TEST(Split, PartitionsEveryRowInOrder) {
    for (std::size_t n = 20; n < 400; n += 17) {
        const auto s = chronological_split(n);
        EXPECT_EQ(s.train.begin, 0u);
        EXPECT_EQ(s.train.end, s.validation.begin);
        EXPECT_EQ(s.validation.end, s.test.begin);
        EXPECT_EQ(s.test.end, n);
    }
}

TEST(Pca, PointsOnALine) {
    Matrix m(20, 2);
    for (std::size_t r = 0; r < 20; ++r) {
        m(r, 0) = static_cast<double>(r);
        m(r, 1) = 3.0 * static_cast<double>(r) - 2.0;
    }
    const auto p = pca_fit(m, 2);
    EXPECT_GE(p.eigenvalues[0] / p.total_variance, 1.0 - 1e-9);
    EXPECT_EQ(pca_fit_variance(m, 0.95).n_components(), 1u);
}

TEST(Pca, FullRoundTrip) {
    CounterRng rng(6);
    Matrix m(40, 5);
    for (auto& v : m.data()) v = rng.normal(2.0, 3.0);
    const auto p = pca_fit(m, 5);
    const auto back = pca_inverse_transform(pca_transform(m, p), p);
    for (std::size_t i = 0; i < m.data().size(); ++i) EXPECT_NEAR(back.data()[i], m.data()[i], 1e-9);
}

TEST(Pca, EigenvaluesMatchIndependentSolver) {
    CounterRng rng(21);
    const std::size_t n = 60, d = 6;
    Matrix m(n, d);
    Eigen::MatrixXd em(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) em(static_cast<int>(r), static_cast<int>(c)) = m(r, c) = rng.normal() * (1.0 + static_cast<double>(c));
    const auto p = pca_fit(m, d);
    const Eigen::MatrixXd centered = em.rowwise() - em.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(p.eigenvalues[i], solver.eigenvalues()(static_cast<int>(d - 1 - i)), 1e-8);
    EXPECT_NEAR(p.total_variance, cov.trace(), 1e-9);
    // orthonormal rows, largest-magnitude entry positive
    for (std::size_t a = 0; a < d; ++a) {
        double biggest = 0.0;
        for (std::size_t c = 0; c < d; ++c)
            if (std::fabs(p.components(a, c)) > std::fabs(biggest)) biggest = p.components(a, c);
        EXPECT_GT(biggest, 0.0);
        for (std::size_t b = 0; b < d; ++b) EXPECT_NEAR(dot(p.components.row(a), p.components.row(b)), a == b ? 1.0 : 0.0, 1e-10);
    }
}

TEST(Pca, VarianceFractionPicksSmallestCount) {
    CounterRng rng(13);
    Matrix m(100, 4);
    for (std::size_t r = 0; r < 100; ++r) {
        const double t = rng.normal();
        m(r, 0) = 10 * t;
        m(r, 1) = 10 * t + 0.5 * rng.normal();
        m(r, 2) = rng.normal();
        m(r, 3) = 0.1 * rng.normal();
    }
    const auto full = pca_fit(m, 4);
    for (double frac : {0.5, 0.9, 0.95, 0.999, 1.0}) {
        const auto p = pca_fit_variance(m, frac);
        double cum = 0.0;
        std::size_t want = 0;
        while (want < 4 && cum < frac * full.total_variance - 1e-12) cum += full.eigenvalues[want++];
        EXPECT_EQ(p.n_components(), std::max<std::size_t>(want, 1)) << frac;
    }
    try {
        pca_fit(m, 5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TooManyComponents);
    }
}

TEST(Pca, PersistRoundTrip) {
    CounterRng rng(3);
    Matrix m(30, 3);
    for (auto& v : m.data()) v = rng.normal();
    const auto p = pca_fit(m, 2);
    const auto q = persist::decode_pca(persist::encode_pca(p));
    EXPECT_EQ(pca_transform(m, q), pca_transform(m, p));
    const auto s = fit_minmax(m);
    EXPECT_EQ(persist::decode_scaler(persist::encode_scaler(s)), s);
}
