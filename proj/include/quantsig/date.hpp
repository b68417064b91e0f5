#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace quantsig {

/// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
/// Text form is always ISO-8601 `YYYY-MM-DD`.
class Date {
public:
    constexpr Date() = default;
    static constexpr Date from_days(std::int64_t days) { Date d; d.days_ = days; return d; }
    static Date from_ymd(int year, unsigned month, unsigned day);

    /// Strict `YYYY-MM-DD`; rejects impossible days such as 2021-02-30.
    static std::optional<Date> parse(std::string_view text);

    [[nodiscard]] constexpr std::int64_t days() const { return days_; }
    [[nodiscard]] std::string iso() const;
    [[nodiscard]] int year() const;

    constexpr auto operator<=>(const Date&) const = default;

private:
    std::int64_t days_ = 0;
};

}  // namespace quantsig
