#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "attrib/dates.hpp"
#include "attrib/errors.hpp"

namespace attrib {

/// Names a risk factor (e.g. "IR", "CS", "FX"). Factors are joined by name,
/// never by column position.
struct FactorId {
    std::string name;

    auto operator<=>(const FactorId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, const FactorId& f) { return os << f.name; }

/// Whether a scenario entry was taken from the interval start or end.
enum class Provenance : unsigned char { Start, End };

/// One value per factor, each tagged with its provenance. Mixed-time
/// evaluation points are the building block of every decomposition.
struct ScenarioVector {
    std::vector<FactorId> factors;
    std::vector<double> values;
    std::vector<Provenance> provenance;
};

/// Dated matrix of risk-factor observations. Immutable after construction;
/// safe to share across threads.
///
/// Invariants enforced here: dates strictly increasing, factor names
/// non-empty, unique and CSV-safe, every value finite, matrix dimensions
/// consistent.
class RiskFactorPanel {
public:
    RiskFactorPanel(std::vector<FactorId> factors, std::vector<Date> dates,
                    std::vector<double> values)
        : factors_(std::move(factors)), dates_(std::move(dates)), values_(std::move(values)) {
        if (factors_.empty()) throw InputError("panel: factor list is empty");
        for (const auto& f : factors_) {
            if (f.name.empty()) throw InputError("panel: empty factor name");
            if (f.name.find_first_of(",\r\n") != std::string::npos) {
                throw InputError("panel: factor name '" + f.name + "' contains CSV delimiters");
            }
        }
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            for (std::size_t j = i + 1; j < factors_.size(); ++j) {
                if (factors_[i] == factors_[j]) {
                    throw InputError("panel: duplicate factor '" + factors_[i].name + "'");
                }
            }
        }
        if (dates_.empty()) throw InputError("panel: no dates");
        for (std::size_t i = 1; i < dates_.size(); ++i) {
            if (!(dates_[i - 1] < dates_[i])) {
                throw InputError("panel: dates not strictly increasing at " + dates_[i].to_string());
            }
        }
        if (values_.size() != dates_.size() * factors_.size()) {
            throw InputError("panel: value matrix has wrong size");
        }
        for (double v : values_) {
            if (!std::isfinite(v)) throw InputError("panel: non-finite value");
        }
    }

    const std::vector<FactorId>& factors() const { return factors_; }
    const std::vector<Date>& dates() const { return dates_; }
    std::size_t n_factors() const { return factors_.size(); }
    std::size_t n_dates() const { return dates_.size(); }

    double at(std::size_t row, std::size_t col) const { return values_[row * factors_.size() + col]; }

    std::span<const double> row(std::size_t r) const {
        return {values_.data() + r * factors_.size(), factors_.size()};
    }

    std::optional<std::size_t> find_date(const Date& d) const {
        auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
        if (it == dates_.end() || *it != d) return std::nullopt;
        return static_cast<std::size_t>(it - dates_.begin());
    }

    std::optional<std::size_t> find_factor(const FactorId& f) const {
        auto it = std::find(factors_.begin(), factors_.end(), f);
        if (it == factors_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - factors_.begin());
    }

    std::size_t date_index(const Date& d) const {
        if (auto i = find_date(d)) return *i;
        throw InputError("panel: unknown date " + d.to_string());
    }

    std::size_t factor_index(const FactorId& f) const {
        if (auto i = find_factor(f)) return *i;
        throw InputError("panel: unknown factor '" + f.name + "'");
    }

    /// Index of the last date on or before d, if any.
    std::optional<std::size_t> last_on_or_before(const Date& d) const {
        auto it = std::upper_bound(dates_.begin(), dates_.end(), d);
        if (it == dates_.begin()) return std::nullopt;
        return static_cast<std::size_t>(it - dates_.begin()) - 1;
    }

    /// New panel with columns picked (and possibly renamed) from this one.
    /// `columns` maps new factor id -> existing factor id, in the new order.
    RiskFactorPanel select(const std::vector<std::pair<FactorId, FactorId>>& columns) const {
        std::vector<FactorId> new_factors;
        std::vector<std::size_t> src;
        new_factors.reserve(columns.size());
        src.reserve(columns.size());
        for (const auto& [to, from] : columns) {
            new_factors.push_back(to);
            src.push_back(factor_index(from));
        }
        std::vector<double> vals;
        vals.reserve(dates_.size() * columns.size());
        for (std::size_t r = 0; r < dates_.size(); ++r) {
            for (std::size_t c : src) vals.push_back(at(r, c));
        }
        return RiskFactorPanel(std::move(new_factors), dates_, std::move(vals));
    }

private:
    std::vector<FactorId> factors_;
    std::vector<Date> dates_;
    std::vector<double> values_; // row-major, one row per date
};

/// Ordered sub-interval boundaries t_0 < t_1 < ... < t_m within a reporting
/// period. Validated where consumed.
struct PartitionSpec {
    std::vector<Date> boundaries;

    std::size_t intervals() const { return boundaries.empty() ? 0 : boundaries.size() - 1; }

    bool operator==(const PartitionSpec&) const = default;
};

enum class Method { Oat, Su, Asu };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::Oat: return "oat";
        case Method::Su: return "su";
        case Method::Asu: return "asu";
    }
    return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
    if (s == "oat") return Method::Oat;
    if (s == "su") return Method::Su;
    if (s == "asu") return Method::Asu;
    return std::nullopt;
}

/// Per-factor contributions plus the unexplained residual.
///
/// SU and ASU explain the p&l in full, so `unexplained` is stored as exact
/// zero for them; for OAT it is delta_p minus the summed contributions.
struct AttributionResult {
    Method method = Method::Oat;
    std::vector<FactorId> factors;                      // model factor order
    std::optional<std::vector<FactorId>> permutation;   // present iff method == Su
    std::vector<double> contributions;                  // aligned with `factors`
    double unexplained = 0.0;
    double delta_p = 0.0;
    PartitionSpec partition;

    double contribution(const FactorId& f) const {
        for (std::size_t i = 0; i < factors.size(); ++i) {
            if (factors[i] == f) return contributions[i];
        }
        throw InputError("attribution result: unknown factor '" + f.name + "'");
    }
};

/// A pricing model: an ordered factor set plus a pure, deterministic price
/// function over a full factor-value assignment. Implementations must be
/// reentrant; evaluating twice on equal inputs must be bit-identical.
template <typename M>
concept PricingModel = requires(const M& m, std::span<const double> v) {
    { m.factor_set() } -> std::convertible_to<const std::vector<FactorId>&>;
    { m.price(v) } -> std::convertible_to<double>;
};

/// Pricing model defined by an arbitrary callable. Used for custom payoffs
/// and in tests; the two standard models live in models.hpp.
class CallableModel {
public:
    CallableModel(std::vector<FactorId> factors,
                  std::function<double(std::span<const double>)> price_fn)
        : factors_(std::move(factors)), price_fn_(std::move(price_fn)) {
        if (factors_.empty()) throw InputError("model: factor set is empty");
        if (!price_fn_) throw InputError("model: null price function");
    }

    const std::vector<FactorId>& factor_set() const { return factors_; }

    double price(std::span<const double> v) const {
        if (v.size() != factors_.size()) throw InputError("model: wrong scenario length");
        return price_fn_(v);
    }

private:
    std::vector<FactorId> factors_;
    std::function<double(std::span<const double>)> price_fn_;
};

/// Scenario whose entry for factor f is the panel value at end_date if f is
/// in end_set, else at start_date. Factor order follows the panel.
inline ScenarioVector make_scenario(const RiskFactorPanel& panel, const Date& start_date,
                                    const Date& end_date, const std::vector<FactorId>& end_set) {
    const std::size_t r0 = panel.date_index(start_date);
    const std::size_t r1 = panel.date_index(end_date);
    std::vector<bool> at_end(panel.n_factors(), false);
    for (const auto& f : end_set) at_end[panel.factor_index(f)] = true;

    ScenarioVector s;
    s.factors = panel.factors();
    s.values.reserve(panel.n_factors());
    s.provenance.reserve(panel.n_factors());
    for (std::size_t c = 0; c < panel.n_factors(); ++c) {
        s.values.push_back(panel.at(at_end[c] ? r1 : r0, c));
        s.provenance.push_back(at_end[c] ? Provenance::End : Provenance::Start);
    }
    return s;
}

/// Price the model at a scenario. The scenario must cover the model's factor
/// set exactly; entries are matched by name, so panel column order never
/// matters.
template <PricingModel M>
double evaluate(const M& model, const ScenarioVector& scenario) {
    const auto& fs = model.factor_set();
    if (scenario.factors.size() != fs.size()) {
        throw InputError("scenario does not cover the model's factor set exactly");
    }
    std::vector<double> v(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
        auto it = std::find(scenario.factors.begin(), scenario.factors.end(), fs[i]);
        if (it == scenario.factors.end()) {
            throw InputError("scenario is missing factor '" + fs[i].name + "'");
        }
        v[i] = scenario.values[static_cast<std::size_t>(it - scenario.factors.begin())];
    }
    double p = model.price(v);
    if (!std::isfinite(p)) throw EvaluationError("price is not finite");
    return p;
}

/// Neumaier compensated summation. Addition order is part of every
/// determinism contract in this library, so reductions use this accumulator
/// in a fixed order rather than relying on scheduling.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace attrib
