#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "attrib/core.hpp"

/// P&l decomposition principles over an interval [t0, t1] with factor values
/// taken from a panel.
///
/// Writing P(S) for the price with the factors in S at their t1 values and
/// all others at t0, and dP = P(F) - P(0):
///
///   OAT   contribution(f) = P({f}) - P(0); the shortfall
///         R = dP - sum_f contribution(f) is reported as unexplained p&l.
///
///   SU    given an update order (f_1, ..., f_d),
///         contribution(f_k) = P({f_1..f_k}) - P({f_1..f_{k-1}});
///         the terms telescope, so the p&l is explained in full but the
///         split depends on the order.
///
///   ASU   the average of all d! SU decompositions; equivalently the Shapley
///         value of the game v(S) = P(S) - P(0):
///         contribution(f) = sum_{S subset of F\{f}} |S|!(d-|S|-1)!/d!
///                           * [P(S + f) - P(S)].
///         Order-free and fully explaining.
///
/// A decomposition over m sub-intervals applies the static rule to each
/// sub-interval and sums contributions per factor.
///
/// Scaling: every path prices at most the 2^d distinct scenarios, memoized.
/// ASU walks all d! orders for d <= AsuOptions::permutation_cap (default 8,
/// i.e. 40320 walks over 256 cached prices) and otherwise switches to the
/// subset-weighted form, which is practical to about d = 20.
///
/// Determinism: per-factor averages accumulate in canonical (name-sorted)
/// lexicographic permutation order, or ascending subset order, with
/// compensated summation. Results are independent of scheduling and
/// bit-reproducible for a given panel, model and interval.
namespace attrib {

using UpdateOrder = std::vector<FactorId>;

/// All d! permutations of `factors`, in lexicographic order of positions.
inline std::vector<UpdateOrder> enumerate_orders(const std::vector<FactorId>& factors) {
    const std::size_t d = factors.size();
    if (d == 0) throw InputError("enumerate_orders: factor list is empty");
    if (d > 12) throw InputError("enumerate_orders: more than 12 factors (d! too large)");
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            if (factors[i] == factors[j]) {
                throw InputError("enumerate_orders: duplicate factor '" + factors[i].name + "'");
            }
        }
    }
    std::size_t count = 1;
    for (std::size_t k = 2; k <= d; ++k) count *= k;

    std::vector<std::size_t> idx(d);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<UpdateOrder> out;
    out.reserve(count);
    do {
        UpdateOrder o;
        o.reserve(d);
        for (std::size_t i : idx) o.push_back(factors[i]);
        out.push_back(std::move(o));
    } while (std::next_permutation(idx.begin(), idx.end()));
    return out;
}

struct AsuOptions {
    /// Walk all d! orders up to this factor count; use the subset-weighted
    /// form beyond it. 0 forces the subset form.
    std::size_t permutation_cap = 8;
};

namespace detail {

/// Start/end factor values for one interval, in model factor order, with
/// memoized prices per subset of end-dated factors (bit i of the mask means
/// model factor i is at its t1 value). Not thread-safe; use per operation.
template <PricingModel M>
class ScenarioTable {
public:
    ScenarioTable(const M& model, const RiskFactorPanel& panel, const Date& t0, const Date& t1)
        : model_(model) {
        if (!(t0 < t1)) {
            throw InputError("interval start " + t0.to_string() + " must precede end " +
                             t1.to_string());
        }
        const std::size_t r0 = panel.date_index(t0);
        const std::size_t r1 = panel.date_index(t1);
        const auto& fs = model.factor_set();
        d_ = fs.size();
        if (d_ == 0) throw InputError("model has no factors");
        if (d_ > 63) throw InputError("more than 63 factors are not supported");
        start_.resize(d_);
        end_.resize(d_);
        scratch_.resize(d_);
        for (std::size_t i = 0; i < d_; ++i) {
            const std::size_t col = panel.factor_index(fs[i]);
            start_[i] = panel.at(r0, col);
            end_[i] = panel.at(r1, col);
        }
        if (d_ <= kDenseBits) {
            dense_.assign(std::size_t{1} << d_, 0.0);
            dense_filled_.assign(std::size_t{1} << d_, 0);
        }
    }

    std::size_t size() const { return d_; }
    std::uint64_t full_mask() const { return (d_ == 64) ? ~0ull : ((std::uint64_t{1} << d_) - 1); }

    double price(std::uint64_t mask) const {
        if (!dense_.empty()) {
            if (dense_filled_[mask]) return dense_[mask];
            const double p = compute(mask);
            dense_[mask] = p;
            dense_filled_[mask] = 1;
            return p;
        }
        auto it = sparse_.find(mask);
        if (it != sparse_.end()) return it->second;
        const double p = compute(mask);
        sparse_.emplace(mask, p);
        return p;
    }

    double delta_p() const { return price(full_mask()) - price(0); }

private:
    static constexpr std::size_t kDenseBits = 20;

    double compute(std::uint64_t mask) const {
        for (std::size_t i = 0; i < d_; ++i) {
            scratch_[i] = (mask >> i) & 1 ? end_[i] : start_[i];
        }
        const double p = model_.price(scratch_);
        if (!std::isfinite(p)) {
            throw EvaluationError("price is not finite for scenario mask " + std::to_string(mask));
        }
        return p;
    }

    const M& model_;
    std::size_t d_ = 0;
    std::vector<double> start_;
    std::vector<double> end_;
    mutable std::vector<double> scratch_;
    mutable std::vector<double> dense_;
    mutable std::vector<char> dense_filled_;
    mutable std::unordered_map<std::uint64_t, double> sparse_;
};

/// Model factor indices sorted by factor name. ASU enumerates permutations
/// and subsets over this canonical order so that results are bitwise
/// invariant under consistent reordering of panel columns and factor sets.
inline std::vector<std::size_t> canonical_order(const std::vector<FactorId>& factors) {
    std::vector<std::size_t> idx(factors.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return factors[a].name < factors[b].name; });
    return idx;
}

/// Shapley subset weights w[k] = k! (d-1-k)! / d! = 1 / (d * C(d-1, k)).
inline std::vector<double> shapley_weights(std::size_t d) {
    std::vector<double> w(d);
    for (std::size_t k = 0; k < d; ++k) {
        long double binom = 1.0L;
        for (std::size_t i = 1; i <= k; ++i) {
            binom = binom * static_cast<long double>(d - 1 - k + i) / static_cast<long double>(i);
        }
        w[k] = static_cast<double>(1.0L / (static_cast<long double>(d) * binom));
    }
    return w;
}

inline void check_update_order(const std::vector<FactorId>& model_factors,
                               const UpdateOrder& order) {
    if (order.size() != model_factors.size()) {
        throw InputError("update order must list each model factor exactly once");
    }
    for (const auto& f : model_factors) {
        if (std::count(order.begin(), order.end(), f) != 1) {
            throw InputError("update order is not a bijection on the factor set (factor '" +
                             f.name + "')");
        }
    }
}

} // namespace detail

/// One-at-a-time ("bump and reset"). Does not explain the p&l in full; the
/// residual lands in `unexplained`.
template <PricingModel M>
AttributionResult oat_static(const M& model, const RiskFactorPanel& panel, const Date& t0,
                             const Date& t1) {
    detail::ScenarioTable<M> tbl(model, panel, t0, t1);
    const std::size_t d = tbl.size();
    const double base = tbl.price(0);

    AttributionResult res;
    res.method = Method::Oat;
    res.factors = model.factor_set();
    res.contributions.resize(d);
    CompensatedSum explained;
    for (std::size_t i = 0; i < d; ++i) {
        res.contributions[i] = tbl.price(std::uint64_t{1} << i) - base;
        explained.add(res.contributions[i]);
    }
    res.delta_p = tbl.price(tbl.full_mask()) - base;
    res.unexplained = res.delta_p - explained.value();
    res.partition = PartitionSpec{{t0, t1}};
    return res;
}

/// Sequential updating ("waterfall") along the given order. Telescopes to
/// the full p&l; `unexplained` is exact zero.
template <PricingModel M>
AttributionResult su_static(const M& model, const RiskFactorPanel& panel, const Date& t0,
                            const Date& t1, const UpdateOrder& order) {
    detail::check_update_order(model.factor_set(), order);
    detail::ScenarioTable<M> tbl(model, panel, t0, t1);
    const std::size_t d = tbl.size();
    const auto& fs = model.factor_set();

    AttributionResult res;
    res.method = Method::Su;
    res.factors = fs;
    res.permutation = order;
    res.contributions.resize(d);

    std::uint64_t mask = 0;
    double prev = tbl.price(0);
    for (const auto& f : order) {
        const std::size_t i =
            static_cast<std::size_t>(std::find(fs.begin(), fs.end(), f) - fs.begin());
        mask |= std::uint64_t{1} << i;
        const double cur = tbl.price(mask);
        res.contributions[i] = cur - prev;
        prev = cur;
    }
    res.delta_p = tbl.price(tbl.full_mask()) - tbl.price(0);
    res.unexplained = 0.0;
    res.partition = PartitionSpec{{t0, t1}};
    return res;
}

/// Average sequential updating: the Shapley value of the price-change game.
/// Order-free, fully explaining; `unexplained` is exact zero.
template <PricingModel M>
AttributionResult asu_static(const M& model, const RiskFactorPanel& panel, const Date& t0,
                             const Date& t1, const AsuOptions& opts = {}) {
    detail::ScenarioTable<M> tbl(model, panel, t0, t1);
    const std::size_t d = tbl.size();
    const auto& fs = model.factor_set();
    const auto canon = detail::canonical_order(fs);

    std::vector<CompensatedSum> acc(d); // indexed by canonical position
    std::vector<double> contributions(d);

    if (d <= opts.permutation_cap) {
        std::vector<std::size_t> pos(d);
        std::iota(pos.begin(), pos.end(), std::size_t{0});
        double n_orders = 0.0;
        do {
            std::uint64_t mask = 0;
            double prev = tbl.price(0);
            for (std::size_t k = 0; k < d; ++k) {
                const std::size_t ci = pos[k];
                mask |= std::uint64_t{1} << canon[ci];
                const double cur = tbl.price(mask);
                acc[ci].add(cur - prev);
                prev = cur;
            }
            n_orders += 1.0;
        } while (std::next_permutation(pos.begin(), pos.end()));
        for (std::size_t ci = 0; ci < d; ++ci) {
            contributions[canon[ci]] = acc[ci].value() / n_orders;
        }
    } else {
        if (d > 20) {
            throw InputError("asu: subset path supports at most 20 factors, got " +
                             std::to_string(d));
        }
        const auto weights = detail::shapley_weights(d);
        const std::uint64_t subsets = std::uint64_t{1} << d;
        for (std::size_t ci = 0; ci < d; ++ci) {
            const std::uint64_t fbit = std::uint64_t{1} << canon[ci];
            for (std::uint64_t cmask = 0; cmask < subsets; ++cmask) {
                if ((cmask >> ci) & 1) continue;
                // scatter canonical subset bits onto model factor positions
                std::uint64_t mmask = 0;
                for (std::size_t cj = 0; cj < d; ++cj) {
                    if ((cmask >> cj) & 1) mmask |= std::uint64_t{1} << canon[cj];
                }
                const double marginal = tbl.price(mmask | fbit) - tbl.price(mmask);
                acc[ci].add(weights[std::popcount(cmask)] * marginal);
            }
            contributions[canon[ci]] = acc[ci].value();
        }
    }

    AttributionResult res;
    res.method = Method::Asu;
    res.factors = fs;
    res.contributions = std::move(contributions);
    res.delta_p = tbl.price(tbl.full_mask()) - tbl.price(0);
    res.unexplained = 0.0;
    res.partition = PartitionSpec{{t0, t1}};
    return res;
}

/// Static decomposition applied to each sub-interval of the partition;
/// contributions sum per factor across sub-intervals. With a single
/// sub-interval this reproduces the static result bit for bit.
template <PricingModel M>
AttributionResult decompose_multiperiod(const M& model, const RiskFactorPanel& panel,
                                        const PartitionSpec& partition, Method method,
                                        const std::optional<UpdateOrder>& order = std::nullopt,
                                        const AsuOptions& asu_opts = {}) {
    const auto& b = partition.boundaries;
    if (b.size() < 2) throw InputError("partition needs at least two boundaries");
    for (std::size_t i = 1; i < b.size(); ++i) {
        if (!(b[i - 1] < b[i])) {
            throw InputError("partition boundaries not strictly increasing at " +
                             b[i].to_string());
        }
    }
    std::string missing;
    for (const auto& d : b) {
        if (!panel.find_date(d)) missing += (missing.empty() ? "" : ", ") + d.to_string();
    }
    if (!missing.empty()) {
        throw InputError("partition boundaries not in panel: " + missing);
    }
    if (method == Method::Su && !order) throw InputError("SU requires an update order");
    if (method != Method::Su && order) {
        throw InputError("an update order is only meaningful for SU");
    }

    const std::size_t d = model.factor_set().size();
    std::vector<CompensatedSum> acc(d);
    CompensatedSum unexplained;

    for (std::size_t k = 1; k < b.size(); ++k) {
        AttributionResult part;
        switch (method) {
            case Method::Oat: part = oat_static(model, panel, b[k - 1], b[k]); break;
            case Method::Su: part = su_static(model, panel, b[k - 1], b[k], *order); break;
            case Method::Asu: part = asu_static(model, panel, b[k - 1], b[k], asu_opts); break;
        }
        for (std::size_t i = 0; i < d; ++i) acc[i].add(part.contributions[i]);
        if (method == Method::Oat) unexplained.add(part.unexplained);
    }

    AttributionResult res;
    res.method = method;
    res.factors = model.factor_set();
    if (method == Method::Su) res.permutation = *order;
    res.contributions.resize(d);
    for (std::size_t i = 0; i < d; ++i) res.contributions[i] = acc[i].value();
    res.unexplained = (method == Method::Oat) ? unexplained.value() : 0.0;
    detail::ScenarioTable<M> horizon(model, panel, b.front(), b.back());
    res.delta_p = horizon.delta_p();
    res.partition = partition;
    return res;
}

/// The three contributions of the first factor of a partially hedged
/// two-factor model: OAT (= SU updating that factor first), SU updating it
/// second, and ASU.
struct HedgedContributions {
    double oat_su_first; // exact zero by the hedge condition
    double su_second;
    double asu;
};

/// Diagnostic wrapper for a two-factor model P(x, y) that is hedged in its
/// first factor: P(x1, y0) = P(x0, y0). Violations beyond 1e-12 relative are
/// rejected.
template <PricingModel M>
HedgedContributions hedged_contribution_x(const M& model, double x0, double x1, double y0,
                                          double y1) {
    if (model.factor_set().size() != 2) {
        throw InputError("hedged_contribution_x requires a two-factor model");
    }
    auto price = [&](double x, double y) {
        const std::array<double, 2> v{x, y};
        const double p = model.price(v);
        if (!std::isfinite(p)) throw EvaluationError("price is not finite");
        return p;
    };
    const double p00 = price(x0, y0);
    const double p10 = price(x1, y0);
    const double scale = std::max(std::abs(p00), std::abs(p10));
    if (std::abs(p10 - p00) > 1e-12 * scale) {
        throw InputError("model is not hedged in its first factor: |P(x1,y0) - P(x0,y0)| = " +
                         std::to_string(std::abs(p10 - p00)));
    }
    const double su_second = price(x1, y1) - price(x0, y1);
    return HedgedContributions{0.0, su_second, 0.5 * su_second};
}

} // namespace attrib
