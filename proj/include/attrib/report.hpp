#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "attrib/core.hpp"
#include "attrib/data.hpp"
#include "attrib/decomp.hpp"

namespace attrib {

/// Range (max minus min) of one factor's contribution across the complete
/// set of SU decompositions of the same interval. All d! permutations must
/// be present, one result each.
inline double permutation_range(const std::vector<AttributionResult>& results,
                                const FactorId& factor) {
    if (results.empty()) throw InputError("permutation_range: no results");
    const auto& factors = results.front().factors;
    for (const auto& r : results) {
        if (r.method != Method::Su) throw InputError("permutation_range: results must all be SU");
        if (!r.permutation) throw InputError("permutation_range: SU result lacks a permutation");
        if (r.factors != factors) {
            throw InputError("permutation_range: results have mixed factor sets");
        }
        if (r.partition != results.front().partition) {
            throw InputError("permutation_range: results cover different partitions");
        }
    }
    auto expected = enumerate_orders(factors);
    std::vector<UpdateOrder> seen;
    seen.reserve(results.size());
    for (const auto& r : results) seen.push_back(*r.permutation);
    std::sort(expected.begin(), expected.end());
    std::sort(seen.begin(), seen.end());
    if (seen != expected) {
        throw InputError("permutation_range: need exactly one result per permutation");
    }

    double lo = results.front().contribution(factor);
    double hi = lo;
    for (const auto& r : results) {
        const double c = r.contribution(factor);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    return hi - lo;
}

/// Mean absolute unexplained p&l across OAT results.
inline double mean_abs_unexplained(const std::vector<AttributionResult>& results) {
    if (results.empty()) throw InputError("mean_abs_unexplained: no results");
    CompensatedSum sum;
    for (const auto& r : results) {
        if (r.method != Method::Oat) {
            throw InputError("mean_abs_unexplained: results must all be OAT");
        }
        sum.add(std::abs(r.unexplained));
    }
    return sum.value() / static_cast<double>(results.size());
}

/// Range of one factor's ASU contribution across all five granularities.
inline double granularity_sensitivity(const std::map<Granularity, AttributionResult>& results,
                                      const FactorId& factor) {
    for (Granularity g : kAllGranularities) {
        if (!results.contains(g)) {
            throw InputError(std::string("granularity_sensitivity: missing granularity '") +
                             to_string(g) + "'");
        }
    }
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& [g, r] : results) {
        if (r.method != Method::Asu) {
            throw InputError("granularity_sensitivity: results must all be ASU");
        }
        const double c = r.contribution(factor);
        lo = first ? c : std::min(lo, c);
        hi = first ? c : std::max(hi, c);
        first = false;
    }
    return hi - lo;
}

struct TableRow {
    int year = 0;
    std::string method;      // "oat", "su", "asu", "asu_check"
    std::string order;       // e.g. "IR>CS>FX" for SU, empty otherwise
    std::string granularity; // "annual" .. "daily"
    std::vector<double> contributions; // raw units, aligned with table factors
    double unexplained = 0.0;
    double delta_p = 0.0;
};

/// Attribution rows keyed by (year, method, order, granularity). Values are
/// held in raw units (per unit nominal); emission adds the percentage-point
/// columns.
struct YearlyAttributionTable {
    std::vector<FactorId> factors;
    std::vector<TableRow> rows;
};

namespace detail {

inline std::string fixed6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline bool row_sums_consistent(const TableRow& row) {
    CompensatedSum s;
    double magnitude = std::abs(row.unexplained);
    for (double c : row.contributions) {
        s.add(c);
        magnitude = std::max(magnitude, std::abs(c));
    }
    s.add(row.unexplained);
    const double total = s.value();
    const double scale = std::max({std::abs(row.delta_p), std::abs(total), magnitude});
    return std::abs(total - row.delta_p) <= 1e-10 * scale;
}

inline std::vector<const TableRow*> sorted_rows(const YearlyAttributionTable& table) {
    for (const auto& row : table.rows) {
        if (row.contributions.size() != table.factors.size()) {
            throw InputError("table row has wrong contribution count");
        }
        if (!row_sums_consistent(row)) {
            throw InputError("table row violates contributions + unexplained = delta_p");
        }
    }
    std::vector<const TableRow*> rows;
    rows.reserve(table.rows.size());
    for (const auto& r : table.rows) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](const TableRow* a, const TableRow* b) {
        return std::tie(a->year, a->method, a->order, a->granularity) <
               std::tie(b->year, b->method, b->order, b->granularity);
    });
    return rows;
}

} // namespace detail

/// Wide CSV: one line per row, contributions in percentage points of the
/// nominal first, raw units in parallel columns. Fixed 6-decimal formatting;
/// equal tables produce byte-identical output.
inline void emit_table(const YearlyAttributionTable& table, std::ostream& out) {
    out << "year,method,order,granularity";
    for (const auto& f : table.factors) out << ',' << f.name << "_pct";
    out << ",unexplained_pct,delta_p_pct";
    for (const auto& f : table.factors) out << ',' << f.name << "_raw";
    out << ",unexplained_raw,delta_p_raw\n";

    for (const TableRow* row : detail::sorted_rows(table)) {
        out << row->year << ',' << row->method << ',' << row->order << ',' << row->granularity;
        for (double c : row->contributions) out << ',' << detail::fixed6(c * 100.0);
        out << ',' << detail::fixed6(row->unexplained * 100.0) << ','
            << detail::fixed6(row->delta_p * 100.0);
        for (double c : row->contributions) out << ',' << detail::fixed6(c);
        out << ',' << detail::fixed6(row->unexplained) << ',' << detail::fixed6(row->delta_p)
            << '\n';
    }
    if (!out) throw IoError("report: write failed");
}

/// Long CSV: one line per (row, series) with series covering each factor,
/// then delta_p, then unexplained. Plot-ready.
inline void emit_long(const YearlyAttributionTable& table, std::ostream& out) {
    out << "year,method,order,granularity,series,value_pct,value_raw\n";
    for (const TableRow* row : detail::sorted_rows(table)) {
        auto line = [&](const std::string& series, double v) {
            out << row->year << ',' << row->method << ',' << row->order << ','
                << row->granularity << ',' << series << ',' << detail::fixed6(v * 100.0) << ','
                << detail::fixed6(v) << '\n';
        };
        for (std::size_t i = 0; i < table.factors.size(); ++i) {
            line(table.factors[i].name, row->contributions[i]);
        }
        line("delta_p", row->delta_p);
        line("unexplained", row->unexplained);
    }
    if (!out) throw IoError("report: write failed");
}

/// One diagnostic statistic. `year` is a label ("2003" or "all"),
/// `factor` may be empty for factor-free statistics.
struct StatRow {
    std::string year;
    std::string granularity;
    std::string statistic;
    std::string factor;
    double value = 0.0;
};

inline void emit_stats(std::vector<StatRow> stats, std::ostream& out) {
    std::sort(stats.begin(), stats.end(), [](const StatRow& a, const StatRow& b) {
        return std::tie(a.statistic, a.year, a.granularity, a.factor) <
               std::tie(b.statistic, b.year, b.granularity, b.factor);
    });
    out << "year,granularity,statistic,factor,value_pct,value_raw\n";
    for (const auto& s : stats) {
        out << s.year << ',' << s.granularity << ',' << s.statistic << ',' << s.factor << ','
            << detail::fixed6(s.value * 100.0) << ',' << detail::fixed6(s.value) << '\n';
    }
    if (!out) throw IoError("report: write failed");
}

} // namespace attrib
