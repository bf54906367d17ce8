#include <catch2/catch_amalgamated.hpp>

#include "attrib/models.hpp"
#include "test_support.hpp"

using namespace attrib;
using namespace testsupport;
using Catch::Approx;

TEST_CASE("bond price formula") {
    REQUIRE(bond_price(0.0, 0.0, 1.0, 10.0) == 1.0);
    REQUIRE(bond_price(0.03, 0.01, 0.9, 10.0) == Approx(kBondPrice_r3_s1_x09).epsilon(1e-12));
    REQUIRE(bond_price(0.02, 0.01, 1.0, 10.0) == Approx(kBondPrice_r2_s1_x10).epsilon(1e-12));

    SECTION("domain error names the offending rate sum") {
        REQUIRE_THROWS_WITH(bond_price(-0.7, -0.4, 1.0, 10.0),
                            Catch::Matchers::ContainsSubstring("IR + CS"));
        REQUIRE_THROWS_AS(bond_price(-0.7, -0.4, 1.0, 10.0), EvaluationError);
    }
    SECTION("maturity must be positive") {
        REQUIRE_THROWS_AS(ConstantMaturityBond(0.0), InputError);
        REQUIRE_THROWS_AS(ConstantMaturityBond(-1.0), InputError);
    }
}

TEST_CASE("bond price properties") {
    std::mt19937_64 rng(7001);
    for (int i = 0; i < 200; ++i) {
        const double r = uniform(rng, -0.02, 0.10);
        const double s = uniform(rng, 0.0, 0.05);
        const double x = uniform(rng, 0.5, 2.0);

        // linear in FX: price(2x) = 2 price(x)
        REQUIRE(bond_price(r, s, 2.0 * x, 10.0) ==
                Approx(2.0 * bond_price(r, s, x, 10.0)).epsilon(1e-12));
        // strictly decreasing in IR and CS for positive FX
        REQUIRE(bond_price(r + 0.01, s, x, 10.0) < bond_price(r, s, x, 10.0));
        REQUIRE(bond_price(r, s + 0.01, x, 10.0) < bond_price(r, s, x, 10.0));
    }
}

TEST_CASE("hedged price formula") {
    REQUIRE(hedged_price(0.95, 880.0, 0.95, 880.0) == Approx(0.95 * 880.0).epsilon(1e-15));
    REQUIRE(hedged_price(0.95, 880.0, 0.95, 880.0) == 836.0);
    REQUIRE(hedged_price(0.79, 1110.0, 0.95, 880.0) == Approx(kHedgedP1).margin(1e-9));

    SECTION("hedge invariance: value does not move while EQ stays at y0") {
        std::mt19937_64 rng(7002);
        for (int i = 0; i < 500; ++i) {
            const double x0 = uniform(rng, 0.5, 2.0);
            const double y0 = uniform(rng, 100.0, 5000.0);
            const double x = uniform(rng, 0.5, 2.0);
            REQUIRE(close_rel(hedged_price(x, y0, x0, y0), x0 * y0, 1e-12));
        }
    }
    SECTION("parameters must be positive") {
        REQUIRE_THROWS_AS(HedgedForeignEquity(0.0, 880.0), InputError);
        REQUIRE_THROWS_AS(HedgedForeignEquity(0.95, -1.0), InputError);
    }
}

TEST_CASE("model factor sets") {
    REQUIRE(ConstantMaturityBond().factor_set() ==
            std::vector<FactorId>{{"IR"}, {"CS"}, {"FX"}});
    REQUIRE(HedgedForeignEquity(0.95, 880.0).factor_set() ==
            std::vector<FactorId>{{"FX"}, {"EQ"}});
}
