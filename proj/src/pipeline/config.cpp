#include "quantsig/date.hpp"
#include "quantsig/error.hpp"
#include "quantsig/io.hpp"
#include "quantsig/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>

namespace quantsig::pipeline {
namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
    throw Error(Errc::ConfigError, fmt::format("{} = '{}': expected {}", key, value, expected));
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
    T out{};
    const auto* first = value.data();
    const auto* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (value.empty() || ec != std::errc{} || ptr != last) bad_value(key, value, "an integer");
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    if (!io::parse_real(value, out)) bad_value(key, value, "a finite number");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    bad_value(key, value, "true or false");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    if (io::trim(value).empty()) return out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = value.find(',', pos);
        const auto item = io::trim(std::string_view(value).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        out.push_back(parse_integer<int>(key, item));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

template <typename T>
std::string opt_text(const std::optional<T>& v) {
    if (!v) return "";
    if constexpr (std::is_floating_point_v<T>) return io::format_real(*v);
    else return std::to_string(*v);
}

std::string date_value(const std::string& key, const std::string& value) {
    if (!Date::parse(value)) bad_value(key, value, "an ISO date YYYY-MM-DD");
    return value;
}

struct Entry {
    std::string name;
    std::string help;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<Entry>& entries() {
    static const std::vector<Entry> table = [] {
        std::vector<Entry> e;
        auto str = [&](std::string name, std::string help, std::string RunConfig::*field) {
            e.push_back({std::move(name), std::move(help),
                         [field](RunConfig& c, const std::string& v) { c.*field = v; },
                         [field](const RunConfig& c) { return c.*field; }});
        };
        str("symbol", "ticker to fetch", &RunConfig::symbol);
        e.push_back({"start", "first date of the price history",
                     [](RunConfig& c, const std::string& v) { c.start = date_value("start", v); },
                     [](const RunConfig& c) { return c.start; }});
        e.push_back({"end", "last date of the price history",
                     [](RunConfig& c, const std::string& v) { c.end = date_value("end", v); },
                     [](const RunConfig& c) { return c.end; }});
        e.push_back({"endpoint", "URL template with {symbol} {start} {end} {start_epoch} {end_epoch}",
                     [](RunConfig& c, const std::string& v) { c.endpoint.base_url = v; },
                     [](const RunConfig& c) { return c.endpoint.base_url; }});
        e.push_back({"timeout", "HTTP timeout in seconds",
                     [](RunConfig& c, const std::string& v) { c.endpoint.timeout_seconds = parse_double("timeout", v); },
                     [](const RunConfig& c) { return io::format_real(c.endpoint.timeout_seconds); }});
        e.push_back({"cache_dir", "directory for downloaded histories",
                     [](RunConfig& c, const std::string& v) { c.endpoint.cache_dir = v; },
                     [](const RunConfig& c) { return c.endpoint.cache_dir.generic_string(); }});
        str("price_csv", "local OHLCV CSV; when set no download happens", &RunConfig::price_csv);
        str("tweets_csv", "labelled tweet CSV for train-sentiment", &RunConfig::tweets_csv);
        e.push_back({"text_col", "tweet text column",
                     [](RunConfig& c, const std::string& v) { c.columns.text = v; },
                     [](const RunConfig& c) { return c.columns.text; }});
        e.push_back({"label_col", "tweet label column (values -1 / 1)",
                     [](RunConfig& c, const std::string& v) { c.columns.label = v; },
                     [](const RunConfig& c) { return c.columns.label; }});
        e.push_back({"id_col", "tweet id column (optional in the file)",
                     [](RunConfig& c, const std::string& v) { c.columns.id = v; },
                     [](const RunConfig& c) { return c.columns.id; }});
        e.push_back({"sma_windows", "SMA windows, comma separated",
                     [](RunConfig& c, const std::string& v) { c.indicators.sma_windows = parse_int_list("sma_windows", v); },
                     [](const RunConfig& c) { return join_ints(c.indicators.sma_windows); }});
        e.push_back({"ema_spans", "EMA spans, comma separated",
                     [](RunConfig& c, const std::string& v) { c.indicators.ema_spans = parse_int_list("ema_spans", v); },
                     [](const RunConfig& c) { return join_ints(c.indicators.ema_spans); }});
        e.push_back({"macd_short", "MACD short EMA span",
                     [](RunConfig& c, const std::string& v) { c.indicators.macd_short = parse_integer<int>("macd_short", v); },
                     [](const RunConfig& c) { return std::to_string(c.indicators.macd_short); }});
        e.push_back({"macd_long", "MACD long EMA span",
                     [](RunConfig& c, const std::string& v) { c.indicators.macd_long = parse_integer<int>("macd_long", v); },
                     [](const RunConfig& c) { return std::to_string(c.indicators.macd_long); }});
        e.push_back({"rsi_period", "RSI averaging period",
                     [](RunConfig& c, const std::string& v) { c.indicators.rsi_period = parse_integer<int>("rsi_period", v); },
                     [](const RunConfig& c) { return std::to_string(c.indicators.rsi_period); }});
        e.push_back({"rsi_variant", "standard (100 - 100/(1+RS)) or paper (100/(1+RS))",
                     [](RunConfig& c, const std::string& v) {
                         if (v == "standard") c.indicators.rsi_variant = indicators::RsiVariant::standard;
                         else if (v == "paper") c.indicators.rsi_variant = indicators::RsiVariant::paper;
                         else bad_value("rsi_variant", v, "standard or paper");
                     },
                     [](const RunConfig& c) {
                         return std::string(c.indicators.rsi_variant == indicators::RsiVariant::standard ? "standard" : "paper");
                     }});
        e.push_back({"lag_depths", "lagged-close depths, comma separated",
                     [](RunConfig& c, const std::string& v) { c.indicators.lag_depths = parse_int_list("lag_depths", v); },
                     [](const RunConfig& c) { return join_ints(c.indicators.lag_depths); }});
        e.push_back({"horizon", "target offset: 0 same-day close, 1 next-day close",
                     [](RunConfig& c, const std::string& v) { c.horizon = parse_integer<int>("horizon", v); },
                     [](const RunConfig& c) { return std::to_string(c.horizon); }});
        e.push_back({"train_fraction", "chronological training share",
                     [](RunConfig& c, const std::string& v) { c.split[0] = parse_double("train_fraction", v); },
                     [](const RunConfig& c) { return io::format_real(c.split[0]); }});
        e.push_back({"validation_fraction", "chronological validation share",
                     [](RunConfig& c, const std::string& v) { c.split[1] = parse_double("validation_fraction", v); },
                     [](const RunConfig& c) { return io::format_real(c.split[1]); }});
        e.push_back({"test_fraction", "chronological test share",
                     [](RunConfig& c, const std::string& v) { c.split[2] = parse_double("test_fraction", v); },
                     [](const RunConfig& c) { return io::format_real(c.split[2]); }});
        e.push_back({"top_k", "features kept by correlation selection",
                     [](RunConfig& c, const std::string& v) { c.top_k = parse_integer<std::size_t>("top_k", v); },
                     [](const RunConfig& c) { return std::to_string(c.top_k); }});
        e.push_back({"redundancy", "drop a feature whose |corr| with a kept one exceeds this",
                     [](RunConfig& c, const std::string& v) { c.redundancy = parse_double("redundancy", v); },
                     [](const RunConfig& c) { return io::format_real(c.redundancy); }});
        str("scaler_fit", "rows the scaler and PCA are fit on; only 'train' is allowed", &RunConfig::scaler_fit);
        str("pca_components", "auto (variance target), none, or a component count", &RunConfig::pca_components);
        e.push_back({"pca_variance", "cumulative variance target for pca_components = auto",
                     [](RunConfig& c, const std::string& v) { c.pca_variance = parse_double("pca_variance", v); },
                     [](const RunConfig& c) { return io::format_real(c.pca_variance); }});
        e.push_back({"vocab_min_df", "minimum document frequency of a vocabulary token",
                     [](RunConfig& c, const std::string& v) { c.vocab_min_df = parse_integer<std::size_t>("vocab_min_df", v); },
                     [](const RunConfig& c) { return std::to_string(c.vocab_min_df); }});
        e.push_back({"vocab_max_size", "vocabulary size cap",
                     [](RunConfig& c, const std::string& v) { c.vocab_max_size = parse_integer<std::size_t>("vocab_max_size", v); },
                     [](const RunConfig& c) { return std::to_string(c.vocab_max_size); }});
        e.push_back({"shuffle", "shuffle tweets (seeded) before the sentiment split",
                     [](RunConfig& c, const std::string& v) { c.shuffle = parse_bool("shuffle", v); },
                     [](const RunConfig& c) { return std::string(c.shuffle ? "true" : "false"); }});
        str("model", "price: linear | lstm; sentiment: family, comma list or all", &RunConfig::model);
        str("out", "output directory", &RunConfig::out);
        e.push_back({"seed", "global seed",
                     [](RunConfig& c, const std::string& v) { c.train.seed = parse_integer<std::uint64_t>("seed", v); },
                     [](const RunConfig& c) { return std::to_string(c.train.seed); }});

        // Training keys; an empty value means "family default".
        auto opt_int = [&](std::string name, std::string help, std::optional<int> models::TrainConfig::*field) {
            e.push_back({name, std::move(help),
                         [field, name](RunConfig& c, const std::string& v) {
                             c.train.*field = v.empty() ? std::nullopt : std::optional<int>(parse_integer<int>(name, v));
                         },
                         [field](const RunConfig& c) { return opt_text(c.train.*field); }});
        };
        auto opt_real = [&](std::string name, std::string help, std::optional<double> models::TrainConfig::*field) {
            e.push_back({name, std::move(help),
                         [field, name](RunConfig& c, const std::string& v) {
                             c.train.*field = v.empty() ? std::nullopt : std::optional<double>(parse_double(name, v));
                         },
                         [field](const RunConfig& c) { return opt_text(c.train.*field); }});
        };
        auto plain_int = [&](std::string name, std::string help, int models::TrainConfig::*field) {
            e.push_back({name, std::move(help),
                         [field, name](RunConfig& c, const std::string& v) { c.train.*field = parse_integer<int>(name, v); },
                         [field](const RunConfig& c) { return std::to_string(c.train.*field); }});
        };
        opt_int("epochs", "training epochs (empty: family default)", &models::TrainConfig::epochs);
        opt_real("learning_rate", "step size (empty: family default)", &models::TrainConfig::learning_rate);
        opt_real("l2", "L2 penalty; SVM lambda (empty: family default)", &models::TrainConfig::l2);
        opt_int("max_depth", "tree depth (empty: 10 for dt/rf, 3 for xgb)", &models::TrainConfig::max_depth);
        opt_int("hidden_size", "hidden units (empty: 64 ann, 32 lstm)", &models::TrainConfig::hidden_size);
        plain_int("k", "neighbours for knn", &models::TrainConfig::k);
        e.push_back({"metric", "knn distance: euclidean or manhattan",
                     [](RunConfig& c, const std::string& v) {
                         if (v == "euclidean") c.train.metric = models::DistanceMetric::euclidean;
                         else if (v == "manhattan") c.train.metric = models::DistanceMetric::manhattan;
                         else bad_value("metric", v, "euclidean or manhattan");
                     },
                     [](const RunConfig& c) {
                         return std::string(c.train.metric == models::DistanceMetric::euclidean ? "euclidean" : "manhattan");
                     }});
        plain_int("min_samples_leaf", "smallest tree leaf", &models::TrainConfig::min_samples_leaf);
        plain_int("n_trees", "random forest size", &models::TrainConfig::n_trees);
        plain_int("n_rounds", "boosting rounds", &models::TrainConfig::n_rounds);
        plain_int("max_features", "features tried per split (0: sqrt for rf, all for dt)", &models::TrainConfig::max_features);
        e.push_back({"bootstrap", "random forest bootstrap sampling",
                     [](RunConfig& c, const std::string& v) { c.train.bootstrap = parse_bool("bootstrap", v); },
                     [](const RunConfig& c) { return std::string(c.train.bootstrap ? "true" : "false"); }});
        plain_int("window_length", "LSTM input window", &models::TrainConfig::window_length);
        plain_int("batch_size", "minibatch size for lstm and ann", &models::TrainConfig::batch_size);
        e.push_back({"clip_norm", "LSTM gradient clipping norm",
                     [](RunConfig& c, const std::string& v) { c.train.clip_norm = parse_double("clip_norm", v); },
                     [](const RunConfig& c) { return io::format_real(c.train.clip_norm); }});

        std::sort(e.begin(), e.end(), [](const Entry& a, const Entry& b) { return a.name < b.name; });
        return e;
    }();
    return table;
}

const Entry* find_entry(const std::string& key) {
    for (const auto& e : entries()) {
        if (e.name == key) return &e;
    }
    return nullptr;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        const RunConfig defaults;
        for (const auto& e : entries()) out.push_back({e.name, e.get(defaults), e.help});
        return out;
    }();
    return keys;
}

namespace {
const std::set<std::string> kTrainingKeys{"epochs", "learning_rate", "l2", "max_depth", "hidden_size", "k",
                                          "metric", "min_samples_leaf", "n_trees", "n_rounds", "max_features",
                                          "bootstrap", "window_length", "batch_size", "clip_norm"};
}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (const auto dot = key.find('.'); dot != std::string::npos) {
        const auto family = key.substr(0, dot);
        const auto sub = key.substr(dot + 1);
        if (!models::parse_classifier_family(family) && !models::parse_regressor_family(family))
            throw Error(Errc::ConfigError, "unknown key '" + key + "': '" + family + "' is not a model family");
        if (!kTrainingKeys.count(sub))
            throw Error(Errc::ConfigError, "unknown key '" + key + "': '" + sub + "' is not a training key");
        RunConfig probe;
        find_entry(sub)->set(probe, value);  // validates the value
        cfg.family_overrides[family][sub] = value;
        return;
    }
    const auto* e = find_entry(key);
    if (!e) throw Error(Errc::ConfigError, "unknown key '" + key + "'");
    e->set(cfg, value);
}

RunConfig parse_run_config(std::string_view text) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = io::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::ConfigError, fmt::format("line {}: expected key = value", line_no));
        const auto key = io::trim(std::string_view(line).substr(0, eq));
        const auto value = io::trim(std::string_view(line).substr(eq + 1));
        if (!seen.insert(key).second) throw Error(Errc::ConfigError, fmt::format("line {}: '{}' set twice", line_no, key));
        try {
            set_config_value(cfg, key, value);
        } catch (const Error& err) {
            throw Error(Errc::ConfigError, fmt::format("line {}: {}", line_no, err.what()));
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(io::read_file(path)); }

models::TrainConfig train_config_for(const RunConfig& cfg, std::string_view family) {
    const auto it = cfg.family_overrides.find(std::string(family));
    if (it == cfg.family_overrides.end()) return cfg.train;
    RunConfig copy;
    copy.train = cfg.train;
    for (const auto& [key, value] : it->second) find_entry(key)->set(copy, value);
    return copy.train;
}

std::string canonical_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& e : entries()) {
        if (e.name == "out") continue;
        out += e.name + "=" + e.get(cfg) + "\n";
    }
    for (const auto& [family, keys] : cfg.family_overrides)
        for (const auto& [key, value] : keys) out += family + "." + key + "=" + value + "\n";
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_config(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

void validate_config(const RunConfig& cfg) {
    auto fail = [](const std::string& msg) { throw Error(Errc::ConfigError, msg); };
    const auto start = Date::parse(cfg.start);
    const auto end = Date::parse(cfg.end);
    if (!start || !end) fail("start and end must be ISO dates");
    if (!(*start < *end)) fail("start must be before end");
    if (!(cfg.endpoint.timeout_seconds > 0.0)) fail("timeout must be positive");
    if (cfg.horizon < 0) fail("horizon must be >= 0");
    for (double f : cfg.split)
        if (!(f > 0.0)) fail("split fractions must be positive");
    if (std::abs(cfg.split[0] + cfg.split[1] + cfg.split[2] - 1.0) > 1e-9) fail("split fractions must sum to 1");
    if (cfg.top_k < 1) fail("top_k must be >= 1");
    if (!(cfg.redundancy > 0.0 && cfg.redundancy <= 1.0)) fail("redundancy must be in (0, 1]");
    if (cfg.scaler_fit != "train")
        fail("scaler_fit = '" + cfg.scaler_fit + "' is refused: scaler and PCA must be fit on training rows only");
    if (cfg.pca_components != "auto" && cfg.pca_components != "none") {
        std::size_t n = 0;
        const auto& s = cfg.pca_components;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec != std::errc{} || ptr != s.data() + s.size() || n == 0)
            fail("pca_components must be auto, none or a positive count");
    }
    if (!(cfg.pca_variance > 0.0 && cfg.pca_variance <= 1.0)) fail("pca_variance must be in (0, 1]");
    if (cfg.vocab_min_df < 1) fail("vocab_min_df must be >= 1");
    if (cfg.vocab_max_size < 1) fail("vocab_max_size must be >= 1");
    try {
        cfg.indicators.validate();
    } catch (const Error& err) {
        fail(err.what());
    }
    if (cfg.out.empty()) fail("out must not be empty");
}

std::string display_name(std::string_view family) {
    if (family == "linear") return "Linear Regression";
    std::string out(family);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace quantsig::pipeline
