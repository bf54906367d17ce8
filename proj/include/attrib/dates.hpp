#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "attrib/errors.hpp"

namespace attrib {

/// Calendar date (no time zone, no time of day). ISO-8601 text form only.
class Date {
public:
    Date() = default;

    Date(int year, unsigned month, unsigned day)
        : day_{std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day}} {
        if (!std::chrono::year_month_day{day_}.ok()) {
            throw InputError("invalid calendar date: " + std::to_string(year) + "-" +
                             std::to_string(month) + "-" + std::to_string(day));
        }
    }

    explicit Date(std::chrono::sys_days d) : day_(d) {}

    /// Strict "YYYY-MM-DD"; nullopt on any deviation.
    static std::optional<Date> parse(std::string_view text) {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
        auto digits = [](std::string_view s) -> std::optional<int> {
            int v = 0;
            for (char c : s) {
                if (c < '0' || c > '9') return std::nullopt;
                v = v * 10 + (c - '0');
            }
            return v;
        };
        auto y = digits(text.substr(0, 4));
        auto m = digits(text.substr(5, 2));
        auto d = digits(text.substr(8, 2));
        if (!y || !m || !d) return std::nullopt;
        std::chrono::year_month_day ymd{std::chrono::year{*y},
                                        std::chrono::month{static_cast<unsigned>(*m)},
                                        std::chrono::day{static_cast<unsigned>(*d)}};
        if (!ymd.ok()) return std::nullopt;
        return Date{std::chrono::sys_days{ymd}};
    }

    std::string to_string() const {
        auto ymd = std::chrono::year_month_day{day_};
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        return buf;
    }

    int year() const { return static_cast<int>(std::chrono::year_month_day{day_}.year()); }
    unsigned month() const { return static_cast<unsigned>(std::chrono::year_month_day{day_}.month()); }
    unsigned day() const { return static_cast<unsigned>(std::chrono::year_month_day{day_}.day()); }

    /// ISO weekday, Monday = 1 .. Sunday = 7.
    unsigned iso_weekday() const { return std::chrono::weekday{day_}.iso_encoding(); }

    std::chrono::sys_days serial() const { return day_; }

    Date plus_days(int n) const { return Date{day_ + std::chrono::days{n}}; }

    auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days day_{};
};

/// Next Monday..Friday strictly after d.
inline Date next_weekday(Date d) {
    do {
        d = d.plus_days(1);
    } while (d.iso_weekday() > 5);
    return d;
}

inline Date last_day_of_month(int year, unsigned month) {
    auto ymdl = std::chrono::year{year} / std::chrono::month{month} / std::chrono::last;
    return Date{std::chrono::sys_days{ymdl}};
}

inline Date end_of_month(Date d) { return last_day_of_month(d.year(), d.month()); }

inline Date end_of_quarter(Date d) {
    unsigned qm = ((d.month() - 1) / 3) * 3 + 3;
    return last_day_of_month(d.year(), qm);
}

inline Date end_of_year(Date d) { return Date(d.year(), 12, 31); }

/// ISO week end: the Sunday on or after d.
inline Date iso_week_end(Date d) { return d.plus_days(static_cast<int>(7 - d.iso_weekday())); }

} // namespace attrib
