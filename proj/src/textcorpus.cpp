#include "quantsig/textcorpus.hpp"

#include "quantsig/error.hpp"
#include "quantsig/io.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace quantsig::textcorpus {
namespace {

bool is_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
    if (s.size() - pos < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        char c = s[pos + i];
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (c != prefix[i]) return false;
    }
    return true;
}

std::optional<int> parse_label(const std::string& cell) {
    double v = 0.0;
    if (!io::parse_real(cell, v)) return std::nullopt;
    if (v == 1.0) return 1;
    if (v == -1.0) return -1;
    return std::nullopt;
}

}  // namespace

LoadedCorpus parse_tweets_csv(std::string_view text, const CorpusColumns& columns) {
    const auto table = io::parse_csv(text);
    if (table.empty()) throw Error(Errc::MissingColumn, "corpus has no header");
    const auto& header = table[0];
    auto find = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (io::trim(header[i]) == name) return i;
        }
        return std::nullopt;
    };
    const auto c_text = find(columns.text);
    const auto c_label = find(columns.label);
    if (!c_text) throw Error(Errc::MissingColumn, "no column named '" + columns.text + "'");
    if (!c_label) throw Error(Errc::MissingColumn, "no column named '" + columns.label + "'");
    const auto c_id = find(columns.id);

    LoadedCorpus out;
    for (std::size_t r = 1; r < table.size(); ++r) {
        const auto& row = table[r];
        const std::string body = *c_text < row.size() ? row[*c_text] : std::string{};
        const auto label = *c_label < row.size() ? parse_label(row[*c_label]) : std::nullopt;
        if (io::trim(body).empty() || !label) {
            ++out.skipped;
            continue;
        }
        std::string id = (c_id && *c_id < row.size()) ? io::trim(row[*c_id]) : std::to_string(r);
        out.records.push_back({std::move(id), body, *label});
    }
    if (out.records.empty()) throw Error(Errc::EmptyCorpus, "no labeled tweets");
    return out;
}

LoadedCorpus load_tweets_csv(const std::filesystem::path& path, const CorpusColumns& columns) {
    return parse_tweets_csv(io::read_file(path), columns);
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 2) tokens.push_back(current);
        current.clear();
    };
    std::size_t i = 0;
    while (i < text.size()) {
        const bool at_word_start = i == 0 || is_space(text[i - 1]);
        if (at_word_start && (starts_with_ci(text, i, "http://") || starts_with_ci(text, i, "https://") ||
                              starts_with_ci(text, i, "www."))) {
            flush();
            while (i < text.size() && !is_space(text[i])) ++i;
            continue;
        }
        if (text[i] == '@' && (i == 0 || !is_alnum(text[i - 1]))) {
            flush();
            ++i;
            while (i < text.size() && (is_alnum(text[i]) || text[i] == '_')) ++i;
            continue;
        }
        const char c = text[i];
        if (is_alnum(c)) {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
        } else {
            flush();
        }
        ++i;
    }
    flush();
    return tokens;
}

std::optional<std::size_t> Vocabulary::find(const std::string& token) const {
    auto it = index.find(token);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

Vocabulary build_vocabulary(std::span<const TweetRecord> corpus, std::size_t min_df,
                            std::size_t max_size) {
    if (corpus.empty()) throw Error(Errc::EmptyCorpus, "cannot build a vocabulary from nothing");
    std::map<std::string, std::size_t> df;
    for (const auto& rec : corpus) {
        const auto toks = tokenize(rec.text);
        const std::set<std::string> unique(toks.begin(), toks.end());
        for (const auto& t : unique) ++df[t];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked;
    for (auto& [tok, count] : df) {
        if (count >= min_df) ranked.emplace_back(tok, count);
    }
    // map iteration is alphabetical, so a stable sort on df keeps ties alphabetical
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > max_size) ranked.resize(max_size);
    if (ranked.empty()) throw Error(Errc::EmptyVocabulary, "no token reaches min_df");

    Vocabulary v;
    v.min_df = min_df;
    v.max_size = max_size;
    for (auto& [tok, count] : ranked) {
        v.index.emplace(tok, v.tokens.size());
        v.tokens.push_back(tok);
        v.document_frequency.push_back(count);
    }
    return v;
}

double BowMatrix::at(std::size_t r, std::size_t c) const {
    for (const auto& [col, value] : rows.at(r)) {
        if (col == c) return value;
    }
    return 0.0;
}

Matrix BowMatrix::dense() const {
    Matrix m(rows.size(), n_cols);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (const auto& [col, value] : rows[r]) m(r, col) = value;
    return m;
}

BowMatrix vectorize(std::span<const TweetRecord> corpus, const Vocabulary& vocab, BowMode mode) {
    BowMatrix out;
    out.n_cols = vocab.size();
    out.mode = mode;
    out.rows.reserve(corpus.size());
    out.labels.reserve(corpus.size());
    for (const auto& rec : corpus) {
        std::map<std::uint32_t, double> counts;
        for (const auto& tok : tokenize(rec.text)) {
            if (auto idx = vocab.find(tok)) counts[static_cast<std::uint32_t>(*idx)] += 1.0;
        }
        std::vector<std::pair<std::uint32_t, double>> row;
        row.reserve(counts.size());
        for (const auto& [col, n] : counts) row.emplace_back(col, mode == BowMode::binary ? 1.0 : n);
        out.rows.push_back(std::move(row));
        out.labels.push_back(rec.label > 0 ? 1 : 0);
    }
    return out;
}

}  // namespace quantsig::textcorpus
