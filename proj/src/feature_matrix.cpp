#include "quantsig/feature_matrix.hpp"

#include "quantsig/error.hpp"
#include "quantsig/io.hpp"

#include <cmath>
#include <set>

namespace quantsig {

void FeatureMatrix::validate() const {
    if (rows.rows() == 0) throw Error(Errc::InvalidArgument, "feature matrix has no rows");
    if (column_names.size() != rows.cols())
        throw Error(Errc::ShapeMismatch, "column name count differs from matrix width");
    if (target.size() != rows.rows() || index.size() != rows.rows())
        throw Error(Errc::ShapeMismatch, "target/index length differs from row count");
    std::set<std::string_view> seen;
    for (const auto& n : column_names) {
        if (!seen.insert(n).second) throw Error(Errc::InvalidArgument, "duplicate column " + n);
    }
    for (double v : rows.data()) {
        if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "non-finite feature value");
    }
    for (double v : target) {
        if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "non-finite target value");
    }
}

std::size_t FeatureMatrix::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < column_names.size(); ++i) {
        if (column_names[i] == name) return i;
    }
    throw Error(Errc::ColumnMismatch, "no column named " + std::string(name));
}

FeatureMatrix FeatureMatrix::slice_rows(std::size_t first, std::size_t count) const {
    FeatureMatrix out;
    out.column_names = column_names;
    out.rows = rows.slice_rows(first, count);
    const auto b = static_cast<std::ptrdiff_t>(first);
    const auto e = static_cast<std::ptrdiff_t>(first + count);
    out.target.assign(target.begin() + b, target.begin() + e);
    out.index.assign(index.begin() + b, index.begin() + e);
    return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> cols) const {
    FeatureMatrix out;
    for (auto c : cols) out.column_names.push_back(column_names.at(c));
    out.rows = rows.select_cols(cols);
    out.target = target;
    out.index = index;
    return out;
}

std::string FeatureMatrix::to_csv(std::string_view index_name) const {
    io::CsvRow header{std::string(index_name)};
    header.insert(header.end(), column_names.begin(), column_names.end());
    header.emplace_back("target");
    std::string out = io::csv_line(header);
    for (std::size_t r = 0; r < n_rows(); ++r) {
        io::CsvRow line{index[r]};
        for (double v : rows.row(r)) line.push_back(io::format_real(v));
        line.push_back(io::format_real(target[r]));
        out += io::csv_line(line);
    }
    return out;
}

FeatureMatrix FeatureMatrix::from_csv(std::string_view text) {
    const auto table = io::parse_csv(text);
    if (table.size() < 2) throw Error(Errc::InvalidArgument, "feature CSV needs a header and rows");
    const auto& header = table[0];
    if (header.size() < 2 || header.back() != "target")
        throw Error(Errc::MalformedHeader, "feature CSV must end with a target column");
    FeatureMatrix fm;
    fm.column_names.assign(header.begin() + 1, header.end() - 1);
    fm.rows = Matrix(table.size() - 1, fm.column_names.size());
    for (std::size_t r = 1; r < table.size(); ++r) {
        const auto& row = table[r];
        if (row.size() != header.size())
            throw Error(Errc::ShapeMismatch, "row " + std::to_string(r) + " has wrong width");
        fm.index.push_back(row[0]);
        for (std::size_t c = 0; c < fm.column_names.size(); ++c) {
            if (!io::parse_real(row[c + 1], fm.rows(r - 1, c)))
                throw Error(Errc::MalformedNumber, "row " + std::to_string(r) + " column " + header[c + 1]);
        }
        double t = 0.0;
        if (!io::parse_real(row.back(), t))
            throw Error(Errc::MalformedNumber, "row " + std::to_string(r) + " target");
        fm.target.push_back(t);
    }
    fm.validate();
    return fm;
}

}  // namespace quantsig
