#include "quantsig/error.hpp"
#include "quantsig/io.hpp"
#include "quantsig/marketdata.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace quantsig;
using namespace quantsig::marketdata;

namespace {

const char* kFiveRows =
    "Date,Open,High,Low,Close,Adj Close,Volume\n"
    "2021-01-04,133.52,133.61,126.76,129.41,128.45,143301900\n"
    "2021-01-05,128.89,131.74,128.43,131.01,130.04,97664900\n"
    "2021-01-06,127.72,131.05,126.38,126.60,125.66,155088000\n"
    "2021-01-07,128.36,131.63,127.86,130.92,129.95,109578200\n"
    "2021-01-08,132.43,132.63,130.23,132.05,131.07,105158200\n";

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return Errc::IoError;
}

// Local HTTP server standing in for the quote endpoint.
class FixtureServer {
public:
    FixtureServer() {
        server_.Get(R"(/history/(\w+))", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests_;
            last_target_ = req.target;
            if (req.matches[1] == "NOPE") {
                res.status = 404;
                return;
            }
            if (req.matches[1] == "FAIL") {
                res.status = 500;
                return;
            }
            res.set_content(kFiveRows, "text/csv");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FixtureServer() {
        server_.stop();
        thread_.join();
    }

    EndpointConfig endpoint(const std::filesystem::path& cache) const {
        EndpointConfig cfg;
        cfg.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/history/{symbol}?from={start}&to={end}";
        cfg.cache_dir = cache;
        cfg.timeout_seconds = 5;
        return cfg;
    }
    int requests() const { return requests_; }
    std::string last_target() const { return last_target_; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> requests_{0};
    std::string last_target_;
};

}  // namespace

TEST(ParseOhlcv, TwoRowsInDateOrder) {
    const auto p = parse_ohlcv_csv(
        "Date,Open,High,Low,Close,Adj Close,Volume\n2021-01-04,1,2,0.5,1.5,1.4,100\n2021-01-05,1.5,2.5,1,2,1.9,200\n");
    ASSERT_EQ(p.series.size(), 2u);
    EXPECT_EQ(p.series.bars[0].date.iso(), "2021-01-04");
    EXPECT_EQ(p.series.bars[1].close, 2.0);
    EXPECT_EQ(p.series.bars[1].volume, 200);
    EXPECT_EQ(p.skipped_rows, 0u);
}

TEST(ParseOhlcv, ReverseOrderIsSorted) {
    const auto p = parse_ohlcv_csv(
        "Date,Open,High,Low,Close,Adj Close,Volume\n2021-01-05,1.5,2.5,1,2,1.9,200\n2021-01-04,1,2,0.5,1.5,1.4,100\n");
    ASSERT_EQ(p.series.size(), 2u);
    EXPECT_LT(p.series.bars[0].date, p.series.bars[1].date);
}

TEST(ParseOhlcv, BadVolumeNamesTheRow) {
    try {
        parse_ohlcv_csv("Date,Open,High,Low,Close,Adj Close,Volume\n2021-01-04,1,2,0.5,1.5,1.4,abc\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::MalformedNumber);
        EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
    }
}

TEST(ParseOhlcv, HeaderAndDuplicateErrors) {
    EXPECT_EQ(code_of([] { parse_ohlcv_csv("Date,Open,High,Close,Volume\n2021-01-04,1,2,1.5,3\n"); }),
              Errc::MalformedHeader);
    EXPECT_EQ(code_of([] {
                  parse_ohlcv_csv("Date,Open,High,Low,Close,Volume\n2021-01-04,1,2,0.5,1.5,1\n2021-01-04,1,2,0.5,1.5,1\n");
              }),
              Errc::DuplicateDate);
    EXPECT_EQ(code_of([] { parse_ohlcv_csv("Date,Open,High,Low,Close,Volume\n"); }), Errc::EmptySeries);
}

TEST(ParseOhlcv, NullRowsAreSkippedAndAdjCloseOptional) {
    const auto p = parse_ohlcv_csv("date,CLOSE,open,high,low,volume\n2021-01-04,1.5,1,2,0.5,7\n2021-01-05,null,null,null,null,null\n");
    ASSERT_EQ(p.series.size(), 1u);
    EXPECT_EQ(p.skipped_rows, 1u);
    EXPECT_EQ(p.series.bars[0].adj_close, 1.5);
}

TEST(ParseOhlcv, SerializeRoundTrips) {
    const auto s = oracle::synthetic_series(50, 4);
    const auto back = parse_ohlcv_csv(serialize_ohlcv_csv(s), s.symbol);
    EXPECT_EQ(back.series, s);
}

TEST(Validate, CleanSeriesHasNoViolations) { EXPECT_TRUE(validate_series(oracle::synthetic_series(300, 1)).empty()); }

TEST(Validate, HighBelowLowIsReported) {
    auto s = oracle::synthetic_series(20, 1);
    std::swap(s.bars[7].high, s.bars[7].low);
    const auto v = validate_series(s);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].index, 7u);
    EXPECT_EQ(v[0].kind, ViolationKind::PriceOrder);
}

TEST(Validate, ThirtyDayGap) {
    auto s = oracle::synthetic_series(20, 1);
    for (std::size_t i = 10; i < s.size(); ++i) s.bars[i].date = Date::from_days(s.bars[i].date.days() + 30);
    const auto v = validate_series(s, 7);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].kind, ViolationKind::Gap);
    EXPECT_EQ(v[0].index, 10u);
}

TEST(Endpoint, UrlExpansion) {
    const auto s = Date::from_ymd(2010, 1, 1), e = Date::from_ymd(2010, 1, 2);
    EXPECT_EQ(expand_url("x/{symbol}?a={start}&b={end}&c={start_epoch}&d={end_epoch}", "AAPL", s, e),
              "x/AAPL?a=2010-01-01&b=2010-01-02&c=1262304000&d=1262390400");
}

TEST(Endpoint, EnvironmentOverrides) {
    ::setenv("QUANTSIG_DATA_URL", "http://example.invalid/{symbol}", 1);
    ::setenv("QUANTSIG_CACHE", "/tmp/qs-cache", 1);
    const auto cfg = apply_env_overrides({});
    ::unsetenv("QUANTSIG_DATA_URL");
    ::unsetenv("QUANTSIG_CACHE");
    EXPECT_EQ(cfg.base_url, "http://example.invalid/{symbol}");
    EXPECT_EQ(cfg.cache_dir, "/tmp/qs-cache");
}

TEST(Fetch, FiveRowsMatchDirectParseAndSecondCallHitsCache) {
    FixtureServer server;
    oracle::TempDir dir("fetch");
    const auto cfg = server.endpoint(dir.path());
    const auto s = Date::from_ymd(2021, 1, 1), e = Date::from_ymd(2021, 1, 10);
    const auto first = fetch_history("AAPL", s, e, cfg);
    EXPECT_FALSE(first.cache_hit);
    EXPECT_EQ(server.requests(), 1);
    EXPECT_EQ(server.last_target(), "/history/AAPL?from=2021-01-01&to=2021-01-10");
    EXPECT_EQ(first.series, parse_ohlcv_csv(kFiveRows, "AAPL").series);
    EXPECT_EQ(first.series.size(), 5u);
    EXPECT_EQ(io::read_file(first.cache_file), kFiveRows);

    const auto second = fetch_history("AAPL", s, e, cfg);
    EXPECT_TRUE(second.cache_hit);
    EXPECT_EQ(server.requests(), 1);
    EXPECT_EQ(second.series, first.series);

    const auto refreshed = fetch_history("AAPL", s, e, cfg, true);
    EXPECT_FALSE(refreshed.cache_hit);
    EXPECT_EQ(server.requests(), 2);
}

TEST(Fetch, NotFoundAndServerErrors) {
    FixtureServer server;
    oracle::TempDir dir("fetch404");
    const auto cfg = server.endpoint(dir.path());
    const auto s = Date::from_ymd(2021, 1, 1), e = Date::from_ymd(2021, 1, 10);
    EXPECT_EQ(code_of([&] { fetch_history("NOPE", s, e, cfg); }), Errc::SymbolNotFound);
    EXPECT_EQ(code_of([&] { fetch_history("FAIL", s, e, cfg); }), Errc::NetworkError);
    EXPECT_FALSE(std::filesystem::exists(cache_path(cfg, "NOPE", s, e)));
    EXPECT_EQ(code_of([&] { fetch_history("AAPL", e, s, cfg); }), Errc::InvalidArgument);
}

TEST(Fetch, UnreachableHostIsNetworkError) {
    oracle::TempDir dir("fetchdown");
    EndpointConfig cfg;
    cfg.base_url = "http://127.0.0.1:1/{symbol}";
    cfg.cache_dir = dir.path();
    cfg.timeout_seconds = 2;
    EXPECT_EQ(code_of([&] { fetch_history("AAPL", Date::from_ymd(2021, 1, 1), Date::from_ymd(2021, 2, 1), cfg); }),
              Errc::NetworkError);
}
