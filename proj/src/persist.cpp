#include "quantsig/persist.hpp"

#include "quantsig/error.hpp"

#include <bit>
#include <cstring>

namespace quantsig::persist {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void append_le(std::string& out, T v) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>(u & 0xFF));
        u = static_cast<U>(u >> 8);
    }
}

void append_f64(std::string& out, double v) { append_le(out, std::bit_cast<std::uint64_t>(v)); }

class Cursor {
public:
    explicit Cursor(std::string_view data) : data_(data) {}

    template <typename T>
    T read_le() {
        need(sizeof(T));
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }

    std::string read_bytes(std::uint64_t n) {
        need(n);
        std::string out(data_.substr(pos_, static_cast<std::size_t>(n)));
        pos_ += static_cast<std::size_t>(n);
        return out;
    }

    [[nodiscard]] bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::uint64_t n) const {
        if (n > data_.size() - pos_) throw Error(Errc::CorruptRecord, "unexpected end of model data");
    }

    std::string_view data_;
    std::size_t pos_ = 0;
};

enum Kind : std::uint8_t { kInt = 1, kReal = 2, kString = 3, kReals = 4, kInts = 5 };

}  // namespace

void RecordWriter::put_raw(const std::string& name, std::uint8_t kind, std::string payload) {
    append_le(body_, static_cast<std::uint32_t>(name.size()));
    body_ += name;
    body_.push_back(static_cast<char>(kind));
    append_le(body_, static_cast<std::uint64_t>(payload.size()));
    body_ += payload;
    ++count_;
}

void RecordWriter::put_int(const std::string& name, std::int64_t v) {
    std::string p;
    append_le(p, v);
    put_raw(name, kInt, std::move(p));
}

void RecordWriter::put_real(const std::string& name, double v) {
    std::string p;
    append_f64(p, v);
    put_raw(name, kReal, std::move(p));
}

void RecordWriter::put_string(const std::string& name, std::string_view v) {
    put_raw(name, kString, std::string(v));
}

void RecordWriter::put_reals(const std::string& name, const std::vector<double>& v) {
    std::string p;
    p.reserve(v.size() * 8);
    for (double x : v) append_f64(p, x);
    put_raw(name, kReals, std::move(p));
}

void RecordWriter::put_ints(const std::string& name, const std::vector<std::int64_t>& v) {
    std::string p;
    p.reserve(v.size() * 8);
    for (auto x : v) append_le(p, x);
    put_raw(name, kInts, std::move(p));
}

void RecordWriter::put_matrix(const std::string& name, const Matrix& m) {
    put_ints(name + ".shape", {static_cast<std::int64_t>(m.rows()), static_cast<std::int64_t>(m.cols())});
    put_reals(name, m.data());
}

void RecordWriter::put_strings(const std::string& name, const std::vector<std::string>& v) {
    put_int(name + ".count", static_cast<std::int64_t>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) put_string(name + "." + std::to_string(i), v[i]);
}

std::string RecordWriter::finish() const {
    std::string out(kMagic);
    append_le(out, static_cast<std::uint32_t>(tag_.size()));
    out += tag_;
    append_le(out, kVersion);
    append_le(out, count_);
    out += body_;
    return out;
}

RecordReader::RecordReader(std::string_view bytes) {
    if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic)
        throw Error(Errc::BadMagic, "not a QSMODEL1 file");
    Cursor cur(bytes.substr(kMagic.size()));
    const auto tag_len = cur.read_le<std::uint32_t>();
    tag_ = cur.read_bytes(tag_len);
    const auto version = cur.read_le<std::uint32_t>();
    if (version != kVersion) throw Error(Errc::VersionUnsupported, "model version " + std::to_string(version));
    const auto count = cur.read_le<std::uint64_t>();
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto name_len = cur.read_le<std::uint32_t>();
        std::string name = cur.read_bytes(name_len);
        const auto kind = cur.read_le<std::uint8_t>();
        const auto len = cur.read_le<std::uint64_t>();
        if (kind < kInt || kind > kInts) throw Error(Errc::CorruptRecord, "record " + name + " has unknown kind");
        if (kind != kString && len % 8 != 0) throw Error(Errc::CorruptRecord, "record " + name + " is misaligned");
        if ((kind == kInt || kind == kReal) && len != 8) throw Error(Errc::CorruptRecord, "record " + name + " has bad size");
        records_[name] = Record{kind, cur.read_bytes(len)};
    }
    if (!cur.at_end()) throw Error(Errc::CorruptRecord, "trailing bytes after last record");
}

const RecordReader::Record& RecordReader::need(const std::string& name, std::uint8_t kind) const {
    auto it = records_.find(name);
    if (it == records_.end()) throw Error(Errc::CorruptRecord, "missing record " + name);
    if (it->second.kind != kind) throw Error(Errc::CorruptRecord, "record " + name + " has wrong kind");
    return it->second;
}

std::int64_t RecordReader::get_int(const std::string& name) const {
    Cursor c(need(name, kInt).payload);
    return c.read_le<std::int64_t>();
}

double RecordReader::get_real(const std::string& name) const {
    Cursor c(need(name, kReal).payload);
    return std::bit_cast<double>(c.read_le<std::uint64_t>());
}

std::string RecordReader::get_string(const std::string& name) const { return need(name, kString).payload; }

std::vector<double> RecordReader::get_reals(const std::string& name) const {
    const auto& p = need(name, kReals).payload;
    Cursor c(p);
    std::vector<double> out(p.size() / 8);
    for (auto& x : out) x = std::bit_cast<double>(c.read_le<std::uint64_t>());
    return out;
}

std::vector<std::int64_t> RecordReader::get_ints(const std::string& name) const {
    const auto& p = need(name, kInts).payload;
    Cursor c(p);
    std::vector<std::int64_t> out(p.size() / 8);
    for (auto& x : out) x = c.read_le<std::int64_t>();
    return out;
}

Matrix RecordReader::get_matrix(const std::string& name) const {
    const auto shape = get_ints(name + ".shape");
    if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0)
        throw Error(Errc::CorruptRecord, "record " + name + " has a bad shape");
    auto values = get_reals(name);
    const auto rows = static_cast<std::size_t>(shape[0]);
    const auto cols = static_cast<std::size_t>(shape[1]);
    if (values.size() != rows * cols) throw Error(Errc::CorruptRecord, "record " + name + " size/shape mismatch");
    Matrix m(rows, cols);
    m.data() = std::move(values);
    return m;
}

std::vector<std::string> RecordReader::get_strings(const std::string& name) const {
    const auto n = get_int(name + ".count");
    if (n < 0) throw Error(Errc::CorruptRecord, "negative count for " + name);
    std::vector<std::string> out;
    for (std::int64_t i = 0; i < n; ++i) out.push_back(get_string(name + "." + std::to_string(i)));
    return out;
}

std::string encode_scaler(const preprocess::ScalerParams& params) {
    RecordWriter w("scaler");
    w.put_strings("columns", params.columns);
    w.put_reals("min", params.min);
    w.put_reals("max", params.max);
    return w.finish();
}

preprocess::ScalerParams decode_scaler(std::string_view bytes) {
    RecordReader r(bytes);
    if (r.family_tag() != "scaler") throw Error(Errc::CorruptRecord, "expected a scaler, found " + r.family_tag());
    preprocess::ScalerParams p{r.get_strings("columns"), r.get_reals("min"), r.get_reals("max")};
    if (p.min.size() != p.max.size() || p.columns.size() != p.min.size())
        throw Error(Errc::CorruptRecord, "scaler arrays differ in length");
    return p;
}

std::string encode_pca(const preprocess::PcaModel& model) {
    RecordWriter w("pca");
    w.put_reals("mean", model.mean);
    w.put_matrix("components", model.components);
    w.put_reals("eigenvalues", model.eigenvalues);
    w.put_real("total_variance", model.total_variance);
    return w.finish();
}

preprocess::PcaModel decode_pca(std::string_view bytes) {
    RecordReader r(bytes);
    if (r.family_tag() != "pca") throw Error(Errc::CorruptRecord, "expected a pca model, found " + r.family_tag());
    preprocess::PcaModel m;
    m.mean = r.get_reals("mean");
    m.components = r.get_matrix("components");
    m.eigenvalues = r.get_reals("eigenvalues");
    m.total_variance = r.get_real("total_variance");
    if (m.components.cols() != m.mean.size() || m.eigenvalues.size() != m.components.rows())
        throw Error(Errc::CorruptRecord, "pca arrays are inconsistent");
    return m;
}

}  // namespace quantsig::persist
