#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "attrib/core.hpp"

namespace attrib {

/// Price per unit nominal of a constant-maturity bond held by a domestic
/// investor:
///
///     P(r, s, x) = x / (1 + r + s)^maturity
///
/// r: interest rate, s: credit spread (both absolute decimals, 0.03 = 3%),
/// x: exchange rate quoted domestic-per-foreign.
inline double bond_price(double r, double s, double x, double maturity) {
    const double base = 1.0 + r + s;
    if (!(base > 0.0)) {
        throw EvaluationError("bond price undefined: 1 + IR + CS = " + std::to_string(base) +
                              " is not positive");
    }
    if (!std::isfinite(x)) {
        throw EvaluationError("bond price undefined: FX value is not finite");
    }
    return x / std::pow(base, maturity);
}

/// Domestic-currency value of a foreign equity position hedged with a short
/// FX forward struck at the initial exchange rate:
///
///     P(x, y) = x * y + y0 * (x0 - x)
///
/// The hedge makes the value invariant to x while y stays at y0, yet the
/// position keeps joint FX exposure once y moves.
inline double hedged_price(double x, double y, double x0, double y0) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
        throw EvaluationError("hedged price undefined: non-finite input");
    }
    return x * y + y0 * (x0 - x);
}

/// Benchmark bond with fixed residual maturity at every valuation date (no
/// aging, no pull-to-par). Factors: IR, CS, FX.
class ConstantMaturityBond {
public:
    explicit ConstantMaturityBond(double maturity = 10.0) : maturity_(maturity) {
        if (!(maturity_ > 0.0)) throw InputError("bond: maturity must be positive");
    }

    const std::vector<FactorId>& factor_set() const { return factors_; }

    double price(std::span<const double> v) const {
        return bond_price(v[0], v[1], v[2], maturity_);
    }

    double maturity() const { return maturity_; }

private:
    double maturity_;
    std::vector<FactorId> factors_{{"IR"}, {"CS"}, {"FX"}};
};

/// Foreign equity position of y0 index points hedged with y0 FX forwards
/// struck at x0. Factors: FX (domestic-per-foreign), EQ (index level).
class HedgedForeignEquity {
public:
    HedgedForeignEquity(double x0, double y0) : x0_(x0), y0_(y0) {
        if (!(x0_ > 0.0)) throw InputError("hedged equity: x0 must be positive");
        if (!(y0_ > 0.0)) throw InputError("hedged equity: y0 must be positive");
    }

    const std::vector<FactorId>& factor_set() const { return factors_; }

    double price(std::span<const double> v) const { return hedged_price(v[0], v[1], x0_, y0_); }

    double x0() const { return x0_; }
    double y0() const { return y0_; }

private:
    double x0_;
    double y0_;
    std::vector<FactorId> factors_{{"FX"}, {"EQ"}};
};

} // namespace attrib
