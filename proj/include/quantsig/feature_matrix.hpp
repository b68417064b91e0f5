#pragma once

#include "quantsig/matrix.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace quantsig {

/// Named feature columns, one target per row, and an ordered row key
/// (ISO dates for price data, record ids for tweets).
struct FeatureMatrix {
    std::vector<std::string> column_names;
    Matrix rows;
    std::vector<double> target;
    std::vector<std::string> index;

    [[nodiscard]] std::size_t n_rows() const noexcept { return rows.rows(); }
    [[nodiscard]] std::size_t n_cols() const noexcept { return rows.cols(); }

    /// Throws Error{ShapeMismatch | InvalidArgument} when the invariants
    /// (finite values, n_rows >= 1, unique names, aligned lengths) fail.
    void validate() const;

    /// Throws Error{ColumnMismatch} for unknown names.
    [[nodiscard]] std::size_t column_index(std::string_view name) const;

    [[nodiscard]] FeatureMatrix slice_rows(std::size_t first, std::size_t count) const;
    [[nodiscard]] FeatureMatrix select_columns(std::span<const std::size_t> cols) const;

    /// `<index_name>,<features...>,target` with shortest round-trip reals.
    [[nodiscard]] std::string to_csv(std::string_view index_name = "date") const;
    static FeatureMatrix from_csv(std::string_view text);

    bool operator==(const FeatureMatrix&) const = default;
};

}  // namespace quantsig
