#pragma once

#include "quantsig/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace quantsig::textcorpus {

struct TweetRecord {
    std::string id;
    std::string text;
    int label = 1;  ///< -1 or +1

    bool operator==(const TweetRecord&) const = default;
};

struct CorpusColumns {
    std::string text = "text";
    std::string label = "sentiment";
    std::string id = "id";  ///< optional; row numbers are used when absent
};

struct LoadedCorpus {
    std::vector<TweetRecord> records;
    std::size_t skipped = 0;  ///< empty text or label outside {-1, +1}
};

/// Throws Error{MissingColumn | EmptyCorpus}.
LoadedCorpus parse_tweets_csv(std::string_view text, const CorpusColumns& columns = {});
LoadedCorpus load_tweets_csv(const std::filesystem::path& path, const CorpusColumns& columns = {});

/// Lowercases, strips URLs and @mentions, keeps $ticker/#hashtag bodies,
/// splits on anything that is not an ASCII letter or digit and drops
/// tokens shorter than two characters.
std::vector<std::string> tokenize(std::string_view text);

struct Vocabulary {
    std::vector<std::string> tokens;              ///< column order
    std::vector<std::size_t> document_frequency;  ///< parallel to tokens
    std::unordered_map<std::string, std::size_t> index;
    std::size_t min_df = 2;
    std::size_t max_size = 5000;

    [[nodiscard]] std::size_t size() const noexcept { return tokens.size(); }
    [[nodiscard]] std::optional<std::size_t> find(const std::string& token) const;
};

/// Tokens with df >= min_df, ordered by descending df then alphabetically,
/// truncated to max_size. Throws Error{EmptyCorpus | EmptyVocabulary}.
Vocabulary build_vocabulary(std::span<const TweetRecord> corpus, std::size_t min_df = 2,
                            std::size_t max_size = 5000);

enum class BowMode { binary, tf };

/// Sparse bag-of-words: each row lists (column, value) pairs by column.
struct BowMatrix {
    std::size_t n_cols = 0;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;
    BowMode mode = BowMode::tf;
    std::vector<int> labels;  ///< 0/1

    [[nodiscard]] std::size_t n_rows() const noexcept { return rows.size(); }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const;
    [[nodiscard]] Matrix dense() const;
};

/// Out-of-vocabulary tokens are ignored; every record yields a row.
BowMatrix vectorize(std::span<const TweetRecord> corpus, const Vocabulary& vocab, BowMode mode);

}  // namespace quantsig::textcorpus
