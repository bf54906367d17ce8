#pragma once

// Shared fixtures: frozen expected values, random model/panel generators and
// tolerance helpers used by both the unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "attrib/attrib.hpp"

namespace testsupport {

using namespace attrib;

// ---------------------------------------------------------------------------
// Frozen expected values.
//
// Computed by independent brute-force evaluation (direct arithmetic on the
// pricing formulas, scenario by scenario) in IEEE double precision, then
// frozen here. The bond case is maturity 10, (IR, CS, FX) moving
// (0.02, 0.01, 1.0) -> (0.03, 0.01, 1.1); the hedged-equity case is
// x0 = 0.95, y0 = 880 with FX 0.95 -> 0.79 and EQ 880 -> 1110.
// ---------------------------------------------------------------------------

inline constexpr double kBondPrice_r3_s1_x09 = 0.6080077519432188;  // 0.9 / 1.04^10
inline constexpr double kBondPrice_r2_s1_x10 = 0.7440939148967249;  // 1.0 / 1.03^10

inline constexpr double kBondP0 = 0.7440939148967249;
inline constexpr double kBondP1 = 0.7431205857083786;
inline constexpr double kBondDeltaP = -0.0009733291883463613;

inline constexpr double kOatIR = -0.06852974607092632;
inline constexpr double kOatFX = 0.07440939148967252;
inline constexpr double kOatUnexplained = -0.006852974607092555;

inline constexpr double kSuIRfirstIR = -0.06852974607092632; // order (IR, FX, CS)
inline constexpr double kSuIRfirstFX = 0.06755641688257996;
inline constexpr double kSuFXfirstFX = 0.07440939148967252; // order (FX, IR, CS)
inline constexpr double kSuFXfirstIR = -0.07538272067801888;

inline constexpr double kAsuIR = -0.0719562333744726;
inline constexpr double kAsuFX = 0.07098290418612624;

inline constexpr double kPermRangeIR = 0.006852974607092555;

inline constexpr double kHedgedP0 = 836.0;
inline constexpr double kHedgedP1 = 1017.7;
inline constexpr double kHedgedSuSecondX = -36.799999999999955;
inline constexpr double kHedgedAsuX = -18.399999999999977;
inline constexpr double kHedgedAsuY = 200.10000000000002;

// ---------------------------------------------------------------------------
// Tolerances
// ---------------------------------------------------------------------------

inline bool close_rel(double a, double b, double tol, double floor_scale = 0.0) {
    const double scale = std::max({std::abs(a), std::abs(b), floor_scale});
    return std::abs(a - b) <= tol * scale;
}

/// Sum of contributions vs delta_p, with the tolerance anchored to the
/// magnitudes involved so cancellation-heavy instances stay meaningful.
inline bool sums_to_delta(const AttributionResult& r, double tol) {
    CompensatedSum s;
    double mag = 0.0;
    for (double c : r.contributions) {
        s.add(c);
        mag = std::max(mag, std::abs(c));
    }
    const double total = s.value();
    const double scale = std::max({std::abs(r.delta_p), std::abs(total), mag});
    return std::abs(total - r.delta_p) <= tol * scale;
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

inline std::vector<FactorId> letter_factors(std::size_t d) {
    std::vector<FactorId> out;
    for (std::size_t i = 0; i < d; ++i) out.push_back(FactorId{std::string(1, char('A' + i))});
    return out;
}

inline RiskFactorPanel random_panel(std::mt19937_64& rng, const std::vector<FactorId>& factors,
                                    std::size_t n_dates, double lo = 0.5, double hi = 1.5) {
    std::vector<Date> dates;
    Date d(2020, 1, 2);
    for (std::size_t i = 0; i < n_dates; ++i) {
        dates.push_back(d);
        d = next_weekday(d);
    }
    std::vector<double> values;
    values.reserve(n_dates * factors.size());
    for (std::size_t i = 0; i < n_dates * factors.size(); ++i) {
        values.push_back(uniform(rng, lo, hi));
    }
    return RiskFactorPanel(factors, std::move(dates), std::move(values));
}

/// Panel suitable for the bond model: IR/CS in [0, 0.08], FX in [0.7, 1.4].
inline RiskFactorPanel random_bond_panel(std::mt19937_64& rng, std::size_t n_dates) {
    std::vector<FactorId> factors{{"IR"}, {"CS"}, {"FX"}};
    std::vector<Date> dates;
    Date d(2020, 1, 2);
    for (std::size_t i = 0; i < n_dates; ++i) {
        dates.push_back(d);
        d = next_weekday(d);
    }
    std::vector<double> values;
    for (std::size_t i = 0; i < n_dates; ++i) {
        values.push_back(uniform(rng, 0.0, 0.08));
        values.push_back(uniform(rng, 0.0, 0.08));
        values.push_back(uniform(rng, 0.7, 1.4));
    }
    return RiskFactorPanel(std::move(factors), std::move(dates), std::move(values));
}

/// Nonlinear model with pairwise and full interaction terms, so SU genuinely
/// depends on the order and OAT leaves a residual.
inline CallableModel random_poly_model(std::mt19937_64& rng, std::vector<FactorId> factors) {
    const std::size_t d = factors.size();
    const double c0 = uniform(rng, -1.0, 1.0);
    std::vector<double> lin(d);
    for (auto& a : lin) a = uniform(rng, -1.0, 1.0);
    std::vector<double> pair(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) pair[i * d + j] = uniform(rng, -0.5, 0.5);
    }
    const double full = uniform(rng, -0.5, 0.5);
    auto fn = [d, c0, lin, pair, full](std::span<const double> v) {
        double p = c0;
        double prod = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            p += lin[i] * v[i];
            prod *= v[i];
            for (std::size_t j = i + 1; j < d; ++j) p += pair[i * d + j] * v[i] * v[j];
        }
        return p + full * prod;
    };
    return CallableModel(std::move(factors), fn);
}

/// Additively separable model: P(v) = sum_f g_f(v_f) with cubic g_f.
inline CallableModel random_separable_model(std::mt19937_64& rng, std::vector<FactorId> factors) {
    const std::size_t d = factors.size();
    std::vector<double> a(d), b(d), c(d);
    for (std::size_t i = 0; i < d; ++i) {
        a[i] = uniform(rng, -1.0, 1.0);
        b[i] = uniform(rng, -0.5, 0.5);
        c[i] = uniform(rng, -0.2, 0.2);
    }
    auto fn = [d, a, b, c](std::span<const double> v) {
        double p = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            p += a[i] * v[i] + b[i] * v[i] * v[i] + c[i] * v[i] * v[i] * v[i];
        }
        return p;
    };
    return CallableModel(std::move(factors), fn);
}

/// Random partition over the panel's full span: first date, last date, and a
/// random strictly increasing interior subset.
inline PartitionSpec random_partition(std::mt19937_64& rng, const RiskFactorPanel& panel,
                                      std::size_t max_interior) {
    const auto& dates = panel.dates();
    std::vector<Date> bounds{dates.front()};
    if (dates.size() > 2 && max_interior > 0) {
        const std::size_t interior = rng() % (max_interior + 1);
        std::vector<std::size_t> idx;
        for (std::size_t i = 1; i + 1 < dates.size(); ++i) idx.push_back(i);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(std::min(interior, idx.size()));
        std::sort(idx.begin(), idx.end());
        for (std::size_t i : idx) bounds.push_back(dates[i]);
    }
    bounds.push_back(dates.back());
    return PartitionSpec{std::move(bounds)};
}

inline UpdateOrder random_order(std::mt19937_64& rng, std::vector<FactorId> factors) {
    std::shuffle(factors.begin(), factors.end(), rng);
    return factors;
}

// ---------------------------------------------------------------------------
// Filesystem helpers
// ---------------------------------------------------------------------------

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        std::random_device rd;
        path_ = base / ("attrib_" + tag + "_" + std::to_string(rd()) + "_" +
                        std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace testsupport
