#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "attrib/core.hpp"

namespace attrib {

/// Sub-interval granularity of a reporting period.
enum class Granularity { Annual, Quarterly, Monthly, Weekly, Daily };

inline constexpr std::array<Granularity, 5> kAllGranularities{
    Granularity::Annual, Granularity::Quarterly, Granularity::Monthly, Granularity::Weekly,
    Granularity::Daily};

inline const char* to_string(Granularity g) {
    switch (g) {
        case Granularity::Annual: return "annual";
        case Granularity::Quarterly: return "quarterly";
        case Granularity::Monthly: return "monthly";
        case Granularity::Weekly: return "weekly";
        case Granularity::Daily: return "daily";
    }
    return "?";
}

inline std::optional<Granularity> parse_granularity(std::string_view s) {
    for (Granularity g : kAllGranularities) {
        if (s == to_string(g)) return g;
    }
    return std::nullopt;
}

namespace detail {

inline std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        std::string_view cell =
            (comma == std::string_view::npos) ? line.substr(start) : line.substr(start, comma - start);
        while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
        while (!cell.empty() &&
               (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
            cell.remove_suffix(1);
        }
        out.emplace_back(cell);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::optional<double> parse_number(std::string_view cell) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

} // namespace detail

struct ReadOptions {
    /// Columns whose source quotes values in percent; converted to decimals
    /// (divided by 100) on ingestion. Cells like "3%" are always rejected.
    std::vector<std::string> percent_columns;
};

/// Parse the canonical panel format: UTF-8 CSV, header "date,<factor>,...",
/// ISO-8601 dates, plain decimal numbers. Rows are sorted by date; duplicate
/// dates, missing values and unparsable cells are rejected (no imputation).
inline RiskFactorPanel read_panel(std::istream& in, const ReadOptions& opts = {}) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("panel: empty input, missing header row");
    auto header = detail::split_csv(line);
    if (header.size() < 2) {
        throw DataError("panel: header must name a date column and at least one factor");
    }
    {
        std::string head = header[0];
        for (char& c : head) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (head != "date") {
            throw DataError("panel: first header column must be 'date', got '" + header[0] + "'");
        }
    }
    std::vector<FactorId> factors;
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j].empty()) {
            throw DataError("panel: empty factor name in header column " + std::to_string(j + 1));
        }
        factors.push_back(FactorId{header[j]});
    }

    std::vector<bool> percent(factors.size(), false);
    for (const auto& name : opts.percent_columns) {
        auto it = std::find(factors.begin(), factors.end(), FactorId{name});
        if (it == factors.end()) {
            throw InputError("panel: percent column '" + name + "' is not in the header");
        }
        percent[static_cast<std::size_t>(it - factors.begin())] = true;
    }

    struct Row {
        Date date;
        std::vector<double> values;
    };
    std::vector<Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_csv(line);
        if (cells.size() != header.size()) {
            throw DataError("panel row " + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(cells.size()));
        }
        auto date = Date::parse(cells[0]);
        if (!date) {
            throw DataError("panel row " + std::to_string(lineno) +
                            ", column 1 (date): invalid date '" + cells[0] + "'");
        }
        Row row{*date, {}};
        row.values.reserve(factors.size());
        for (std::size_t j = 0; j < factors.size(); ++j) {
            const std::string& cell = cells[j + 1];
            const std::string where = "panel row " + std::to_string(lineno) + ", column " +
                                      std::to_string(j + 2) + " (" + factors[j].name + ")";
            if (cell.empty()) throw DataError(where + ": missing value");
            auto v = detail::parse_number(cell);
            if (!v) throw DataError(where + ": unparsable number '" + cell + "'");
            row.values.push_back(percent[j] ? *v / 100.0 : *v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("panel: no data rows");

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].date == rows[i - 1].date) {
            throw DataError("panel: duplicate date " + rows[i].date.to_string());
        }
    }

    std::vector<Date> dates;
    std::vector<double> values;
    dates.reserve(rows.size());
    values.reserve(rows.size() * factors.size());
    for (auto& r : rows) {
        dates.push_back(r.date);
        values.insert(values.end(), r.values.begin(), r.values.end());
    }
    return RiskFactorPanel(std::move(factors), std::move(dates), std::move(values));
}

inline RiskFactorPanel read_panel_file(const std::filesystem::path& path,
                                       const ReadOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open panel file: " + path.string());
    return read_panel(in, opts);
}

/// Write the canonical panel format. Values carry 17 significant digits so
/// that read_panel(write_panel(p)) reproduces p bit for bit.
inline void write_panel(const RiskFactorPanel& panel, std::ostream& out) {
    out << "date";
    for (const auto& f : panel.factors()) out << ',' << f.name;
    out << '\n';
    char buf[40];
    for (std::size_t r = 0; r < panel.n_dates(); ++r) {
        out << panel.dates()[r].to_string();
        for (std::size_t c = 0; c < panel.n_factors(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", panel.at(r, c));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("panel: write failed");
}

namespace detail {

inline std::optional<Date> last_panel_date_on_or_before(const RiskFactorPanel& panel,
                                                        const Date& d) {
    if (auto i = panel.last_on_or_before(d)) return panel.dates()[*i];
    return std::nullopt;
}

} // namespace detail

/// Partition [period_start, period_end] into calendar sub-intervals.
///
/// Boundaries are panel dates: the last observation on or before the period
/// start, one for each calendar sub-period end inside the period, and the
/// last observation on or before the period end. Duplicates collapse, so a
/// granularity coarser than the period degenerates to a single interval.
/// Weekly boundaries are ISO week ends (Sunday); Daily uses every panel date
/// in range.
inline PartitionSpec make_partition(const RiskFactorPanel& panel, const Date& period_start,
                                    const Date& period_end, Granularity granularity) {
    if (!(period_start < period_end)) {
        throw InputError("make_partition: period start " + period_start.to_string() +
                         " must precede period end " + period_end.to_string());
    }
    auto b0 = detail::last_panel_date_on_or_before(panel, period_start);
    if (!b0) {
        throw InputError("make_partition: no panel date on or before period start " +
                         period_start.to_string());
    }
    std::vector<Date> bounds{*b0};
    auto push = [&](const std::optional<Date>& c) {
        if (c && *c > bounds.back()) bounds.push_back(*c);
    };

    if (granularity == Granularity::Daily) {
        auto last = detail::last_panel_date_on_or_before(panel, period_end);
        if (last) {
            for (const auto& d : panel.dates()) {
                if (d > *b0 && d <= *last) push(d);
            }
        }
    } else {
        std::vector<Date> ends;
        switch (granularity) {
            case Granularity::Annual:
                for (int y = period_start.year(); y <= period_end.year(); ++y) {
                    ends.emplace_back(y, 12, 31);
                }
                break;
            case Granularity::Quarterly:
            case Granularity::Monthly: {
                const unsigned step = granularity == Granularity::Quarterly ? 3 : 1;
                for (int y = period_start.year(); y <= period_end.year(); ++y) {
                    for (unsigned m = step; m <= 12; m += step) {
                        ends.push_back(last_day_of_month(y, m));
                    }
                }
                break;
            }
            case Granularity::Weekly: {
                Date s = iso_week_end(period_start);
                if (s <= period_start) s = s.plus_days(7);
                for (; s < period_end; s = s.plus_days(7)) ends.push_back(s);
                break;
            }
            default: break;
        }
        for (const auto& e : ends) {
            if (period_start < e && e < period_end) {
                push(detail::last_panel_date_on_or_before(panel, e));
            }
        }
        push(detail::last_panel_date_on_or_before(panel, period_end));
    }

    if (bounds.size() < 2) {
        throw InputError("make_partition: no panel dates inside the period " +
                         period_start.to_string() + " .. " + period_end.to_string());
    }
    return PartitionSpec{std::move(bounds)};
}

/// Reporting periods for whole business years: for each year y in
/// [first_year, last_year], the pair (last panel date <= Dec 31 of y-1,
/// last panel date <= Dec 31 of y). Consecutive pairs chain.
inline std::vector<std::pair<Date, Date>> business_years(const RiskFactorPanel& panel,
                                                         int first_year, int last_year) {
    if (first_year > last_year) {
        throw InputError("business_years: first year is after last year");
    }
    std::vector<std::pair<Date, Date>> out;
    out.reserve(static_cast<std::size_t>(last_year - first_year + 1));
    for (int y = first_year; y <= last_year; ++y) {
        auto s = detail::last_panel_date_on_or_before(panel, Date(y - 1, 12, 31));
        if (!s) {
            throw InputError("business_years: panel does not span year " + std::to_string(y) +
                             " (no date on or before " + Date(y - 1, 12, 31).to_string() + ")");
        }
        auto e = detail::last_panel_date_on_or_before(panel, Date(y, 12, 31));
        if (!e || *e == *s) {
            throw InputError("business_years: panel has no observations in year " +
                             std::to_string(y));
        }
        out.emplace_back(*s, *e);
    }
    return out;
}

enum class WalkKind { Arithmetic, Geometric };

inline const char* to_string(WalkKind w) {
    return w == WalkKind::Arithmetic ? "arithmetic" : "geometric";
}

inline std::optional<WalkKind> parse_walk_kind(std::string_view s) {
    if (s == "arithmetic" || s == "arith") return WalkKind::Arithmetic;
    if (s == "geometric" || s == "geom") return WalkKind::Geometric;
    return std::nullopt;
}

struct SyntheticFactorSpec {
    FactorId id;
    double start = 0.0;
    double volatility = 0.0; // per step
    double drift = 0.0;      // per step
    WalkKind walk = WalkKind::Arithmetic;
};

/// Seeded random walks on consecutive weekdays: arithmetic steps for rates
/// and spreads, geometric steps for FX and equity levels. The same seed
/// reproduces the panel bit for bit (draws do not depend on the platform's
/// distribution implementation).
inline RiskFactorPanel generate_synthetic_panel(const std::vector<SyntheticFactorSpec>& specs,
                                                int steps, std::uint64_t seed,
                                                Date start_date = Date(2002, 12, 31)) {
    if (specs.empty()) throw InputError("synthetic panel: no factors");
    if (steps < 1) throw InputError("synthetic panel: steps must be >= 1");
    for (const auto& s : specs) {
        if (!(s.volatility >= 0.0)) {
            throw InputError("synthetic panel: negative volatility for '" + s.id.name + "'");
        }
        if (s.walk == WalkKind::Geometric && !(s.start > 0.0)) {
            throw InputError("synthetic panel: geometric walk needs a positive start for '" +
                             s.id.name + "'");
        }
    }

    std::mt19937_64 rng(seed);
    auto standard_normal = [&rng]() {
        // Box-Muller on raw 53-bit uniforms; u1 in (0,1], u2 in [0,1)
        const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    };

    const std::size_t n = specs.size();
    std::vector<FactorId> factors;
    factors.reserve(n);
    for (const auto& s : specs) factors.push_back(s.id);

    std::vector<Date> dates;
    dates.reserve(static_cast<std::size_t>(steps) + 1);
    dates.push_back(start_date);
    std::vector<double> values;
    values.reserve((static_cast<std::size_t>(steps) + 1) * n);
    std::vector<double> cur;
    cur.reserve(n);
    for (const auto& s : specs) cur.push_back(s.start);
    values.insert(values.end(), cur.begin(), cur.end());

    for (int k = 0; k < steps; ++k) {
        dates.push_back(next_weekday(dates.back()));
        for (std::size_t j = 0; j < n; ++j) {
            const double z = standard_normal();
            const double move = specs[j].drift + specs[j].volatility * z;
            if (specs[j].walk == WalkKind::Arithmetic) {
                cur[j] += move;
            } else {
                cur[j] *= std::exp(move);
            }
        }
        values.insert(values.end(), cur.begin(), cur.end());
    }
    return RiskFactorPanel(std::move(factors), std::move(dates), std::move(values));
}

} // namespace attrib
