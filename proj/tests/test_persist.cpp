#include "quantsig/error.hpp"
#include "quantsig/models.hpp"
#include "quantsig/persist.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstring>

using namespace quantsig;
using namespace quantsig::models;

namespace {

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::IoError;
}

Matrix make_sample(std::size_t n, std::size_t d, std::uint64_t seed, bool binary, std::vector<int>* y = nullptr) {
    CounterRng rng(seed);
    Matrix x(n, d);
    if (y) y->resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const int label = static_cast<int>(r % 2);
        if (y) (*y)[r] = label;
        for (std::size_t c = 0; c < d; ++c) {
            const double v = rng.normal() + label;
            x(r, c) = binary ? (v > 0.5 ? 1.0 : 0.0) : v;
        }
    }
    return x;
}

}  // namespace

class RoundTrip : public ::testing::TestWithParam<ClassifierFamily> {};

TEST_P(RoundTrip, SaveLoadGivesIdenticalScores) {
    const auto f = GetParam();
    const bool binary = f == ClassifierFamily::bnb;
    std::vector<int> y;
    const auto x = make_sample(80, 4, 1, binary, &y);
    TrainConfig cfg;
    cfg.n_trees = 7;
    cfg.n_rounds = 10;
    cfg.hidden_size = 5;
    cfg.epochs = 10;
    const auto model = fit_classifier(x, y, f, cfg);
    oracle::TempDir dir("persist");
    const auto path = dir.path() / "m.qsm";
    save_model(model, path);
    const auto loaded = load_classifier(path);
    EXPECT_EQ(family_of(loaded), f);
    const auto probe = make_sample(50, 4, 2, binary);
    const auto a = decision_scores(model, probe), b = decision_scores(loaded, probe);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
    EXPECT_EQ(a, b);  // binary64 payloads round-trip exactly
    EXPECT_EQ(encode_model(loaded), encode_model(model));
}

INSTANTIATE_TEST_SUITE_P(Zoo, RoundTrip, ::testing::ValuesIn(all_classifier_families()),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Persist, RegressorsRoundTrip) {
    const auto x = make_sample(30, 3, 4, false);
    std::vector<double> y(30);
    for (std::size_t r = 0; r < 30; ++r) y[r] = x(r, 0) - 2 * x(r, 2);
    RegressorModel lin = fit_linear_regression(x, y, 1e-8, {"a", "b", "c"});
    const auto lin2 = decode_regressor(encode_model(lin));
    EXPECT_EQ(std::get<LinearModel>(lin2).feature_names, std::get<LinearModel>(lin).feature_names);
    EXPECT_EQ(predict_regressor(lin2, x), predict_regressor(lin, x));

    std::vector<double> s(40);
    for (std::size_t i = 0; i < 40; ++i) s[i] = 0.5 + 0.4 * std::sin(0.2 * static_cast<double>(i));
    TrainConfig cfg;
    cfg.hidden_size = 3;
    cfg.window_length = 5;
    cfg.epochs = 2;
    RegressorModel lstm = fit_lstm(s, cfg, 10.0, 20.0);
    oracle::TempDir dir("persist_lstm");
    save_model(lstm, dir.path() / "lstm.qsm");
    const auto back = load_regressor(dir.path() / "lstm.qsm");
    Matrix w(3, 5);
    for (std::size_t i = 0; i < w.data().size(); ++i) w.data()[i] = 10.0 + static_cast<double>(i);
    EXPECT_EQ(predict_regressor(back, w), predict_regressor(lstm, w));
    EXPECT_EQ(std::get<LstmModel>(back).loss_history, std::get<LstmModel>(lstm).loss_history);
}

TEST(Persist, CorruptInputs) {
    std::vector<int> y;
    const auto x = make_sample(40, 3, 5, false, &y);
    const auto bytes = encode_model(fit_classifier(x, y, ClassifierFamily::lr, {}));
    ASSERT_EQ(bytes.substr(0, 8), "QSMODEL1");
    EXPECT_EQ(code_of([&] { decode_classifier(bytes.substr(0, bytes.size() - 3)); }), Errc::CorruptRecord);
    EXPECT_EQ(code_of([&] { decode_classifier(bytes.substr(0, 20)); }), Errc::CorruptRecord);
    EXPECT_EQ(code_of([&] { decode_classifier(bytes + "x"); }), Errc::CorruptRecord);
    EXPECT_EQ(code_of([&] { decode_classifier("XXXX" + bytes.substr(4)); }), Errc::BadMagic);
    EXPECT_EQ(code_of([&] { decode_classifier("XXXX"); }), Errc::BadMagic);
    // version follows magic, tag length and tag
    std::uint32_t tag_len = 0;
    std::memcpy(&tag_len, bytes.data() + 8, 4);
    auto v2 = bytes;
    v2[12 + tag_len] = 2;
    EXPECT_EQ(code_of([&] { decode_classifier(v2); }), Errc::VersionUnsupported);
    // a regressor file is not a classifier
    RegressorModel lin = LinearModel{{1.0}, 0.0, {}};
    EXPECT_EQ(code_of([&] { decode_classifier(encode_model(lin)); }), Errc::CorruptRecord);
    oracle::TempDir dir("persist_missing");
    EXPECT_THROW(load_classifier(dir.path() / "none.qsm"), Error);
}

TEST(Records, EveryKindRoundTrips) {
    persist::RecordWriter w("demo");
    w.put_int("i", -42);
    w.put_real("r", 0.1);
    w.put_string("s", "h\xC3\xA9llo");
    w.put_reals("rs", {1.5, -2.25, 1e-300});
    w.put_ints("is", {1, -2, 3});
    Matrix m(2, 3);
    for (std::size_t i = 0; i < 6; ++i) m.data()[i] = static_cast<double>(i) / 3.0;
    w.put_matrix("m", m);
    w.put_strings("ss", {"a", "", "b,c"});
    const persist::RecordReader r(w.finish());
    EXPECT_EQ(r.family_tag(), "demo");
    EXPECT_EQ(r.get_int("i"), -42);
    EXPECT_EQ(r.get_real("r"), 0.1);
    EXPECT_EQ(r.get_string("s"), "h\xC3\xA9llo");
    EXPECT_EQ(r.get_reals("rs"), (std::vector<double>{1.5, -2.25, 1e-300}));
    EXPECT_EQ(r.get_ints("is"), (std::vector<std::int64_t>{1, -2, 3}));
    EXPECT_EQ(r.get_matrix("m"), m);
    EXPECT_EQ(r.get_strings("ss"), (std::vector<std::string>{"a", "", "b,c"}));
    EXPECT_EQ(code_of([&] { (void)r.get_int("r"); }), Errc::CorruptRecord);
    EXPECT_EQ(code_of([&] { (void)r.get_int("absent"); }), Errc::CorruptRecord);
}
