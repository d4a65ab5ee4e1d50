#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace foresight {

// A UTC calendar date. Cutoffs and resolution dates are day-granular.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
    Date(int year, unsigned month, unsigned day);

    // Accepts YYYY-MM-DD, or an ISO-8601 timestamp (YYYY-MM-DDTHH:MM[:SS][.fff](Z|±HH:MM)),
    // which is converted to its UTC calendar date.
    static Date parse(std::string_view text);

    std::string iso() const;
    constexpr std::chrono::sys_days sys_days() const noexcept { return days_; }

    constexpr Date plus_days(long n) const { return Date(days_ + std::chrono::days(n)); }
    constexpr Date minus_days(long n) const { return Date(days_ - std::chrono::days(n)); }

    friend constexpr long days_between(Date from, Date to) {
        return static_cast<long>((to.days_ - from.days_).count());
    }
    friend constexpr auto operator<=>(Date, Date) = default;

private:
    std::chrono::sys_days days_{};
};

}  // namespace foresight
