// Writes the bundled synthetic datasets:
//   data/aapl_fixture.csv   business-day OHLCV, 2010-01-04 .. 2021-12-31,
//                           geometric Brownian motion with AAPL-like drift/vol
//   data/tweets_fixture.csv labelled finance tweets (-1 / 1), ~6000 rows
// Output is a pure function of the seed.

#include "quantsig/date.hpp"
#include "quantsig/io.hpp"
#include "quantsig/rng.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

using quantsig::CounterRng;
using quantsig::Date;

std::string price(double v) { return fmt::format("{:.6f}", v); }

std::string make_prices(std::uint64_t seed) {
    CounterRng rng(seed);
    CounterRng walk = rng.split(1);
    CounterRng bars = rng.split(2);
    const double mu = 0.26 / 252.0;
    const double sigma = 0.28 / std::sqrt(252.0);
    double close = 7.64;
    std::string out = "Date,Open,High,Low,Close,Adj Close,Volume\n";
    const auto first = Date::from_ymd(2010, 1, 4);
    const auto last = Date::from_ymd(2021, 12, 31);
    for (auto d = first; !(last < d); d = Date::from_days(d.days() + 1)) {
        const auto weekday = ((d.days() % 7) + 7 + 3) % 7;  // 0 = Monday
        if (weekday >= 5) continue;
        const double open = close * std::exp(0.006 * walk.normal());
        close = open * std::exp(mu - 0.5 * sigma * sigma + 0.9 * sigma * walk.normal());
        const double high = std::max(open, close) * (1.0 + 0.006 * std::fabs(bars.normal()));
        const double low = std::min(open, close) * (1.0 - 0.006 * std::fabs(bars.normal()));
        const auto volume = static_cast<long long>(std::exp(std::log(1.2e8) + 0.35 * bars.normal()));
        out += fmt::format("{},{},{},{},{},{},{}\n", d.iso(), price(open), price(high), price(low), price(close),
                           price(close), volume);
    }
    return out;
}

const std::vector<std::string> kPositive{
    "bullish", "buy", "long", "breakout", "rally", "gains", "strong", "beat", "upgrade", "soaring",
    "green", "higher", "surge", "moon", "calls", "support", "bounce", "record", "profit", "growth",
    "winner", "outperform", "crushing", "solid", "upside", "love", "great", "nice", "boom", "rocket",
    "accumulate", "undervalued", "momentum", "squeeze", "ripping", "strength", "recovery", "beats", "raised", "optimistic"};
const std::vector<std::string> kNegative{
    "bearish", "sell", "short", "breakdown", "crash", "losses", "weak", "miss", "downgrade", "plunging",
    "red", "lower", "dump", "puts", "resistance", "drop", "fear", "loss", "decline", "loser",
    "underperform", "tanking", "ugly", "downside", "hate", "bad", "terrible", "bust", "overvalued", "selloff",
    "collapse", "warning", "cut", "lawsuit", "recession", "bleeding", "fraud", "bubble", "lowered", "worried"};
const std::vector<std::string> kNeutral{
    "stock", "market", "today", "shares", "price", "earnings", "week", "chart", "trading", "volume",
    "open", "close", "watch", "index", "sector", "options", "report", "quarter", "guidance", "analyst",
    "target", "investors", "traders", "fed", "rates", "futures", "premarket", "afterhours", "session", "day",
    "update", "news", "company", "revenue", "eps", "dividend", "tech", "energy", "banks", "oil",
    "on", "the", "is", "for", "this", "at", "from", "with", "into", "after",
    "looking", "see", "just", "now", "next", "still", "back", "could", "will", "might",
    "level", "levels", "move", "trend", "setup", "position", "entry", "exit", "stop", "gap",
    "fund", "portfolio", "call", "yield", "bond", "dollar", "china", "tariff", "deal", "ceo"};
const std::vector<std::string> kTickers{
    "$AAPL", "$TSLA", "$AMZN", "$MSFT", "$NFLX", "$FB", "$GOOGL", "$NVDA", "$AMD", "$SPY",
    "$QQQ", "$BA", "$DIS", "$JPM", "$INTC", "$BABA", "$TWTR", "$SNAP", "$UBER", "$ROKU"};
const std::vector<std::string> kHashtags{"#stocks", "#trading", "#investing", "#wallstreet", "#daytrading",
                                         "#options", "#markets", "#finance"};

template <typename T>
const T& pick(CounterRng& rng, const std::vector<T>& v) {
    return v[static_cast<std::size_t>(rng.below(v.size()))];
}

// Zipf-like draw: word frequencies in real text fall off roughly as 1/rank.
template <typename T>
const T& pick_zipf(CounterRng& rng, const std::vector<T>& v) {
    const double h = std::log(static_cast<double>(v.size()) + 1.0);
    const auto i = static_cast<std::size_t>(std::exp(rng.uniform() * h) - 1.0);
    return v[std::min(i, v.size() - 1)];
}

std::string make_tweets(std::uint64_t seed, std::size_t count) {
    CounterRng rng(seed);
    CounterRng gen = rng.split(3);
    std::string out = "id,text,sentiment\n";
    for (std::size_t i = 0; i < count; ++i) {
        const int label = gen.uniform() < 0.63 ? 1 : -1;
        const auto& own = label > 0 ? kPositive : kNegative;
        const auto& other = label > 0 ? kNegative : kPositive;
        std::vector<std::string> words;
        words.push_back(pick(gen, kTickers));
        const std::size_t n_neutral = 4 + static_cast<std::size_t>(gen.below(10));
        for (std::size_t k = 0; k < n_neutral; ++k) words.push_back(pick_zipf(gen, kNeutral));
        // Up to three sentiment words; each comes from the wrong lexicon with
        // probability 0.15, and some tweets carry none at all.
        const double u = gen.uniform();
        const std::size_t n_sent = u < 0.05 ? 0 : (u < 0.45 ? 1 : (u < 0.85 ? 2 : 3));
        for (std::size_t k = 0; k < n_sent; ++k) {
            const bool flip = gen.uniform() < 0.15;
            std::string w = pick_zipf(gen, flip ? other : own);
            if (gen.uniform() < 0.06) w = "not " + pick_zipf(gen, flip ? own : other);
            words.insert(words.begin() + static_cast<std::ptrdiff_t>(gen.below(words.size() + 1)), w);
        }
        if (gen.uniform() < 0.35) words.push_back(pick(gen, kHashtags));
        if (gen.uniform() < 0.2) words.insert(words.begin(), fmt::format("@trader{}", gen.below(500)));
        if (gen.uniform() < 0.25) words.push_back(fmt::format("https://t.co/{:x}", gen.next_u64() & 0xffffffffULL));
        std::string text;
        for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
        // Labels themselves are noisy, as in hand-annotated corpora.
        const int noisy = gen.uniform() < 0.08 ? -label : label;
        out += quantsig::io::csv_line({fmt::format("t{:05d}", i + 1), text, std::to_string(noisy)});
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regenerate the bundled synthetic fixtures"};
    std::string out_dir = "data";
    std::uint64_t seed = 6;
    std::size_t tweets = 6000;
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "generator seed");
    app.add_option("--tweets", tweets, "number of tweets");
    CLI11_PARSE(app, argc, argv);

    std::filesystem::create_directories(out_dir);
    quantsig::io::write_file_atomic(std::filesystem::path(out_dir) / "aapl_fixture.csv", make_prices(seed));
    quantsig::io::write_file_atomic(std::filesystem::path(out_dir) / "tweets_fixture.csv", make_tweets(seed, tweets));
    std::cout << "wrote " << out_dir << "/aapl_fixture.csv and " << out_dir << "/tweets_fixture.csv\n";
    return 0;
}
