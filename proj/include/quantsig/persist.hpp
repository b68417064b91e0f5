#pragma once

#include "quantsig/matrix.hpp"
#include "quantsig/preprocess.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

/// QSMODEL1 container. Layout, all integers little-endian:
///
///   "QSMODEL1"                      8 bytes
///   u32 tag_len, tag bytes          family tag, UTF-8
///   u32 version                     currently 1
///   u64 record_count
///   record_count x {
///     u32 name_len, name bytes      UTF-8
///     u8  kind                      1 i64, 2 f64, 3 string, 4 f64[], 5 i64[]
///     u64 payload_len               bytes
///     payload                       IEEE-754 binary64 / two's-complement i64
///   }
///
/// Nothing may follow the last record.
namespace quantsig::persist {

inline constexpr std::string_view kMagic = "QSMODEL1";
inline constexpr std::uint32_t kVersion = 1;

class RecordWriter {
public:
    explicit RecordWriter(std::string family_tag) : tag_(std::move(family_tag)) {}

    void put_int(const std::string& name, std::int64_t v);
    void put_real(const std::string& name, double v);
    void put_string(const std::string& name, std::string_view v);
    void put_reals(const std::string& name, const std::vector<double>& v);
    void put_ints(const std::string& name, const std::vector<std::int64_t>& v);
    void put_matrix(const std::string& name, const Matrix& m);
    void put_strings(const std::string& name, const std::vector<std::string>& v);

    [[nodiscard]] std::string finish() const;

private:
    void put_raw(const std::string& name, std::uint8_t kind, std::string payload);

    std::string tag_;
    std::uint64_t count_ = 0;
    std::string body_;
};

class RecordReader {
public:
    /// Throws Error{BadMagic | VersionUnsupported | CorruptRecord}.
    explicit RecordReader(std::string_view bytes);

    [[nodiscard]] const std::string& family_tag() const noexcept { return tag_; }
    [[nodiscard]] bool has(const std::string& name) const { return records_.count(name) != 0; }

    // All getters throw Error{CorruptRecord} on a missing name or wrong kind.
    [[nodiscard]] std::int64_t get_int(const std::string& name) const;
    [[nodiscard]] double get_real(const std::string& name) const;
    [[nodiscard]] std::string get_string(const std::string& name) const;
    [[nodiscard]] std::vector<double> get_reals(const std::string& name) const;
    [[nodiscard]] std::vector<std::int64_t> get_ints(const std::string& name) const;
    [[nodiscard]] Matrix get_matrix(const std::string& name) const;
    [[nodiscard]] std::vector<std::string> get_strings(const std::string& name) const;

private:
    struct Record {
        std::uint8_t kind;
        std::string payload;
    };
    const Record& need(const std::string& name, std::uint8_t kind) const;

    std::string tag_;
    std::map<std::string, Record> records_;
};

std::string encode_scaler(const preprocess::ScalerParams& params);
preprocess::ScalerParams decode_scaler(std::string_view bytes);
std::string encode_pca(const preprocess::PcaModel& model);
preprocess::PcaModel decode_pca(std::string_view bytes);

}  // namespace quantsig::persist
