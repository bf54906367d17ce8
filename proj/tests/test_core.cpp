#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <limits>

#include "attrib/models.hpp"
#include "test_support.hpp"

using namespace attrib;
using namespace testsupport;
using Catch::Approx;

namespace {

RiskFactorPanel three_factor_panel() {
    return RiskFactorPanel({{"IR"}, {"CS"}, {"FX"}},
                           {Date(2021, 12, 31), Date(2022, 12, 30)},
                           {0.02, 0.01, 1.0, 0.03, 0.01, 1.1});
}

} // namespace

TEST_CASE("panel validation") {
    SECTION("dates must be strictly increasing") {
        REQUIRE_THROWS_AS(RiskFactorPanel({{"IR"}}, {Date(2022, 1, 3), Date(2022, 1, 3)},
                                          {1.0, 2.0}),
                          InputError);
        REQUIRE_THROWS_AS(RiskFactorPanel({{"IR"}}, {Date(2022, 1, 4), Date(2022, 1, 3)},
                                          {1.0, 2.0}),
                          InputError);
    }
    SECTION("values must be finite") {
        REQUIRE_THROWS_AS(RiskFactorPanel({{"IR"}}, {Date(2022, 1, 3)},
                                          {std::numeric_limits<double>::quiet_NaN()}),
                          InputError);
    }
    SECTION("matrix shape must match") {
        REQUIRE_THROWS_AS(RiskFactorPanel({{"IR"}, {"CS"}}, {Date(2022, 1, 3)}, {1.0}),
                          InputError);
    }
    SECTION("factor names unique and non-empty") {
        REQUIRE_THROWS_AS(RiskFactorPanel({{"IR"}, {"IR"}}, {Date(2022, 1, 3)}, {1.0, 2.0}),
                          InputError);
        REQUIRE_THROWS_AS(RiskFactorPanel({{""}}, {Date(2022, 1, 3)}, {1.0}), InputError);
    }
}

TEST_CASE("make_scenario picks start and end values by factor") {
    auto panel = three_factor_panel();
    const Date t0 = panel.dates()[0];
    const Date t1 = panel.dates()[1];

    SECTION("empty end set returns the start row exactly") {
        auto s = make_scenario(panel, t0, t1, {});
        REQUIRE(s.values == std::vector<double>{0.02, 0.01, 1.0});
        for (auto p : s.provenance) REQUIRE(p == Provenance::Start);
    }
    SECTION("full end set returns the end row exactly") {
        auto s = make_scenario(panel, t0, t1, panel.factors());
        REQUIRE(s.values == std::vector<double>{0.03, 0.01, 1.1});
        for (auto p : s.provenance) REQUIRE(p == Provenance::End);
    }
    SECTION("end set {CS} equals the start vector because CS is unchanged") {
        auto s = make_scenario(panel, t0, t1, {FactorId{"CS"}});
        REQUIRE(s.values == std::vector<double>{0.02, 0.01, 1.0});
        REQUIRE(s.provenance[0] == Provenance::Start);
        REQUIRE(s.provenance[1] == Provenance::End);
        REQUIRE(s.provenance[2] == Provenance::Start);
    }
    SECTION("unknown date and unknown factor are named in the error") {
        REQUIRE_THROWS_WITH(make_scenario(panel, Date(1999, 1, 1), t1, {}),
                            Catch::Matchers::ContainsSubstring("1999-01-01"));
        REQUIRE_THROWS_WITH(make_scenario(panel, t0, t1, {FactorId{"EQ"}}),
                            Catch::Matchers::ContainsSubstring("EQ"));
    }
}

TEST_CASE("evaluate prices a scenario through the model") {
    auto panel = three_factor_panel();
    const Date t0 = panel.dates()[0];
    const Date t1 = panel.dates()[1];
    const ConstantMaturityBond bond(10.0);

    SECTION("zero rates and unit FX give par") {
        RiskFactorPanel p({{"IR"}, {"CS"}, {"FX"}}, {Date(2022, 1, 3), Date(2022, 1, 4)},
                          {0.0, 0.0, 1.0, 0.0, 0.0, 1.0});
        REQUIRE(evaluate(bond, make_scenario(p, p.dates()[0], p.dates()[1], {})) == 1.0);
    }
    SECTION("golden bond price") {
        RiskFactorPanel p({{"IR"}, {"CS"}, {"FX"}}, {Date(2022, 1, 3), Date(2022, 1, 4)},
                          {0.03, 0.01, 0.9, 0.03, 0.01, 0.9});
        const double v = evaluate(bond, make_scenario(p, p.dates()[0], p.dates()[1], {}));
        REQUIRE(v == Approx(kBondPrice_r3_s1_x09).epsilon(1e-12));
    }
    SECTION("golden hedged-equity start price") {
        const HedgedForeignEquity hedged(0.95, 880.0);
        RiskFactorPanel p({{"FX"}, {"EQ"}}, {Date(2002, 12, 31), Date(2003, 12, 31)},
                          {0.95, 880.0, 0.79, 1110.0});
        const double v = evaluate(hedged, make_scenario(p, p.dates()[0], p.dates()[1], {}));
        REQUIRE(v == 836.0);
    }
    SECTION("purity: repeated evaluation is bit-identical") {
        auto s = make_scenario(panel, t0, t1, {FactorId{"FX"}});
        const double a = evaluate(bond, s);
        const double b = evaluate(bond, s);
        REQUIRE(std::memcmp(&a, &b, sizeof a) == 0);
    }
    SECTION("join is by name: permuting panel columns changes nothing") {
        auto permuted = panel.select({{FactorId{"FX"}, FactorId{"FX"}},
                                      {FactorId{"IR"}, FactorId{"IR"}},
                                      {FactorId{"CS"}, FactorId{"CS"}}});
        auto s1 = make_scenario(panel, t0, t1, {FactorId{"FX"}});
        auto s2 = make_scenario(permuted, t0, t1, {FactorId{"FX"}});
        REQUIRE(evaluate(bond, s1) == evaluate(bond, s2));
    }
    SECTION("scenario must cover the factor set exactly") {
        RiskFactorPanel two({{"IR"}, {"CS"}}, {Date(2022, 1, 3), Date(2022, 1, 4)},
                            {0.01, 0.01, 0.02, 0.02});
        REQUIRE_THROWS_AS(evaluate(bond, make_scenario(two, two.dates()[0], two.dates()[1], {})),
                          InputError);
    }
}

TEST_CASE("panel select keeps values and validates names") {
    auto panel = three_factor_panel();
    auto sub = panel.select({{FactorId{"x"}, FactorId{"FX"}}});
    REQUIRE(sub.n_factors() == 1);
    REQUIRE(sub.at(0, 0) == 1.0);
    REQUIRE(sub.at(1, 0) == 1.1);
    REQUIRE_THROWS_AS(panel.select({{FactorId{"x"}, FactorId{"nope"}}}), InputError);
}

TEST_CASE("compensated sum is exact for a single addend") {
    CompensatedSum s;
    s.add(0.1234);
    REQUIRE(s.value() == 0.1234);
}

TEST_CASE("date parsing and calendar helpers") {
    REQUIRE(Date::parse("2022-12-31").has_value());
    REQUIRE(!Date::parse("2022-13-01").has_value());
    REQUIRE(!Date::parse("2022/12/31").has_value());
    REQUIRE(!Date::parse("20221231").has_value());
    REQUIRE(Date::parse("2022-12-31")->to_string() == "2022-12-31");

    REQUIRE(end_of_month(Date(2020, 2, 3)) == Date(2020, 2, 29)); // leap year
    REQUIRE(end_of_quarter(Date(2022, 5, 17)) == Date(2022, 6, 30));
    REQUIRE(end_of_year(Date(2022, 5, 17)) == Date(2022, 12, 31));
    REQUIRE(Date(2022, 12, 31).iso_weekday() == 6); // Saturday
    REQUIRE(iso_week_end(Date(2022, 12, 31)) == Date(2023, 1, 1));
    REQUIRE(next_weekday(Date(2022, 12, 30)) == Date(2023, 1, 2)); // Fri -> Mon
}
