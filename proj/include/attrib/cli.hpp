#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "attrib/core.hpp"
#include "attrib/data.hpp"
#include "attrib/decomp.hpp"
#include "attrib/models.hpp"
#include "attrib/report.hpp"

namespace attrib::cli {

inline constexpr const char* kOutDirEnvVar = "ATTRIB_OUT_DIR";

struct ModelConfig {
    std::string type = "bond"; // "bond" or "hedged_equity"
    double maturity = 10.0;    // bond
    double x0 = 0.0;           // hedged_equity
    double y0 = 0.0;           // hedged_equity
};

struct SyntheticConfig {
    std::uint64_t seed = 1;
    int steps = 252;
    Date start_date = Date(2002, 12, 31);
    std::vector<SyntheticFactorSpec> factors;
};

/// A fully reproducible run: panel source, model, factor mapping, methods,
/// granularities and year range. Identical configs and inputs produce
/// byte-identical report files.
struct RunConfig {
    std::string panel_path;                  // mutually exclusive with `synthetic`
    std::optional<SyntheticConfig> synthetic;
    ModelConfig model;
    std::map<std::string, std::string> factor_mapping; // model factor -> panel column
    std::vector<std::string> percent_columns;
    std::vector<Method> methods;
    bool su_all = false;
    std::vector<UpdateOrder> su_orders; // used when !su_all
    std::vector<Granularity> granularities;
    int first_year = 0;
    int last_year = 0;
    std::string out_dir = ".";
    bool combined = false;
};

inline std::vector<FactorId> model_factor_set(const ModelConfig& m) {
    if (m.type == "bond") return {{"IR"}, {"CS"}, {"FX"}};
    if (m.type == "hedged_equity") return {{"FX"}, {"EQ"}};
    throw InputError("config: unknown model type '" + m.type + "'");
}

inline void validate(const RunConfig& cfg) {
    if (cfg.panel_path.empty() == !cfg.synthetic.has_value()) {
        throw InputError("config: exactly one of 'panel' and 'synthetic' must be given");
    }
    const auto factors = model_factor_set(cfg.model);
    if (cfg.model.type == "bond" && !(cfg.model.maturity > 0.0)) {
        throw InputError("config: bond maturity must be positive");
    }
    if (cfg.model.type == "hedged_equity" && (!(cfg.model.x0 > 0.0) || !(cfg.model.y0 > 0.0))) {
        throw InputError("config: hedged_equity needs positive x0 and y0");
    }
    if (cfg.factor_mapping.size() != factors.size()) {
        throw InputError("config: factor mapping must cover the model's factor set exactly");
    }
    for (const auto& f : factors) {
        auto it = cfg.factor_mapping.find(f.name);
        if (it == cfg.factor_mapping.end() || it->second.empty()) {
            throw InputError("config: factor mapping is missing model factor '" + f.name + "'");
        }
    }
    if (cfg.methods.empty()) throw InputError("config: method set is empty");
    {
        std::set<Method> seen(cfg.methods.begin(), cfg.methods.end());
        if (seen.size() != cfg.methods.size()) throw InputError("config: duplicate method");
    }
    const bool wants_su =
        std::find(cfg.methods.begin(), cfg.methods.end(), Method::Su) != cfg.methods.end();
    if (wants_su && !cfg.su_all) {
        if (cfg.su_orders.empty()) {
            throw InputError("config: SU requested but no update orders given (use \"all\")");
        }
        for (const auto& order : cfg.su_orders) detail::check_update_order(factors, order);
    }
    if (cfg.granularities.empty()) throw InputError("config: granularity list is empty");
    {
        std::set<Granularity> seen(cfg.granularities.begin(), cfg.granularities.end());
        if (seen.size() != cfg.granularities.size()) {
            throw InputError("config: duplicate granularity");
        }
    }
    if (cfg.first_year > cfg.last_year) throw InputError("config: year range is empty");
    if (cfg.out_dir.empty()) throw InputError("config: output directory is empty");
    if (cfg.synthetic) {
        if (cfg.synthetic->factors.empty()) {
            throw InputError("config: synthetic mode needs at least one factor spec");
        }
        if (cfg.synthetic->steps < 1) throw InputError("config: synthetic steps must be >= 1");
    }
}

/// Parse the JSON run configuration. Unknown keys are rejected so typos
/// cannot silently change a run.
inline RunConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("config: top level must be a JSON object");
    static const std::set<std::string> known{
        "panel", "synthetic", "model",        "factors",    "percent_columns", "methods",
        "su_orders", "granularities", "years", "out_dir", "combined"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw InputError("config: unknown key '" + key + "'");
    }
    RunConfig cfg;
    try {
        if (j.contains("panel")) cfg.panel_path = j.at("panel").get<std::string>();
        if (j.contains("synthetic")) {
            const auto& s = j.at("synthetic");
            SyntheticConfig sc;
            sc.seed = s.value("seed", std::uint64_t{1});
            sc.steps = s.value("steps", 252);
            if (s.contains("start_date")) {
                auto d = Date::parse(s.at("start_date").get<std::string>());
                if (!d) throw InputError("config: invalid synthetic start_date");
                sc.start_date = *d;
            }
            for (const auto& f : s.at("factors")) {
                SyntheticFactorSpec spec;
                spec.id = FactorId{f.at("name").get<std::string>()};
                spec.start = f.at("start").get<double>();
                spec.volatility = f.value("volatility", 0.0);
                spec.drift = f.value("drift", 0.0);
                auto walk = parse_walk_kind(f.value("walk", "arithmetic"));
                if (!walk) {
                    throw InputError("config: unknown walk kind for factor '" + spec.id.name +
                                     "'");
                }
                spec.walk = *walk;
                sc.factors.push_back(std::move(spec));
            }
            cfg.synthetic = std::move(sc);
        }
        if (j.contains("model")) {
            const auto& m = j.at("model");
            cfg.model.type = m.value("type", "bond");
            cfg.model.maturity = m.value("maturity", 10.0);
            cfg.model.x0 = m.value("x0", 0.0);
            cfg.model.y0 = m.value("y0", 0.0);
        }
        if (j.contains("factors")) {
            for (const auto& [k, v] : j.at("factors").items()) {
                cfg.factor_mapping[k] = v.get<std::string>();
            }
        }
        if (j.contains("percent_columns")) {
            cfg.percent_columns = j.at("percent_columns").get<std::vector<std::string>>();
        }
        for (const auto& m : j.value("methods", std::vector<std::string>{})) {
            auto method = parse_method(m);
            if (!method) throw InputError("config: unknown method '" + m + "'");
            cfg.methods.push_back(*method);
        }
        if (j.contains("su_orders")) {
            const auto& o = j.at("su_orders");
            if (o.is_string() && o.get<std::string>() == "all") {
                cfg.su_all = true;
            } else if (o.is_array()) {
                for (const auto& one : o) {
                    UpdateOrder order;
                    for (const auto& f : one) order.push_back(FactorId{f.get<std::string>()});
                    cfg.su_orders.push_back(std::move(order));
                }
            } else {
                throw InputError("config: su_orders must be \"all\" or a list of orders");
            }
        }
        for (const auto& g : j.value("granularities", std::vector<std::string>{})) {
            auto gran = parse_granularity(g);
            if (!gran) throw InputError("config: unknown granularity '" + g + "'");
            cfg.granularities.push_back(*gran);
        }
        if (j.contains("years")) {
            const auto& y = j.at("years");
            cfg.first_year = y.at("first").get<int>();
            cfg.last_year = y.at("last").get<int>();
        }
        cfg.out_dir = j.value("out_dir", std::string{"."});
        cfg.combined = j.value("combined", false);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline RunConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("config: invalid JSON in " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

namespace detail {

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + tmp.string() + " -> " + path.string());
}

inline std::string order_label(const UpdateOrder& order) {
    std::string s;
    for (const auto& f : order) {
        if (!s.empty()) s += '>';
        s += f.name;
    }
    return s;
}

inline bool close_rel(double a, double b, double tol) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= tol * scale;
}

template <PricingModel M>
void run_with_model(const RunConfig& cfg, const RiskFactorPanel& raw_panel, const M& model) {
    namespace fs = std::filesystem;
    const auto& factors = model.factor_set();

    std::vector<std::pair<FactorId, FactorId>> columns;
    for (const auto& f : factors) {
        columns.emplace_back(f, FactorId{cfg.factor_mapping.at(f.name)});
    }
    const RiskFactorPanel panel = raw_panel.select(columns);

    const auto years = business_years(panel, cfg.first_year, cfg.last_year);

    std::vector<UpdateOrder> orders = cfg.su_orders;
    const bool wants_su =
        std::find(cfg.methods.begin(), cfg.methods.end(), Method::Su) != cfg.methods.end();
    if (wants_su && cfg.su_all) orders = enumerate_orders(factors);

    std::vector<Granularity> grans;
    for (Granularity g : kAllGranularities) {
        if (std::find(cfg.granularities.begin(), cfg.granularities.end(), g) !=
            cfg.granularities.end()) {
            grans.push_back(g);
        }
    }

    // tables keyed by (year, method label); stats inputs collected as we go
    std::map<std::pair<int, std::string>, YearlyAttributionTable> tables;
    auto add_row = [&](int year, const std::string& method, const std::string& order,
                       Granularity g, const AttributionResult& r) {
        auto& table = tables[{year, method}];
        if (table.factors.empty()) table.factors = factors;
        TableRow row;
        row.year = year;
        row.method = method;
        row.order = order;
        row.granularity = to_string(g);
        row.contributions = r.contributions;
        row.unexplained = r.unexplained;
        row.delta_p = r.delta_p;
        table.rows.push_back(std::move(row));
    };

    std::map<Granularity, std::vector<AttributionResult>> oat_by_gran;
    std::vector<StatRow> stats;

    for (std::size_t yi = 0; yi < years.size(); ++yi) {
        const int year = cfg.first_year + static_cast<int>(yi);
        const auto [ys, ye] = years[yi];
        std::map<Granularity, AttributionResult> asu_by_gran;

        for (Granularity g : grans) {
            const PartitionSpec part = make_partition(panel, ys, ye, g);

            std::optional<AttributionResult> asu_result;
            const bool wants_asu = std::find(cfg.methods.begin(), cfg.methods.end(),
                                             Method::Asu) != cfg.methods.end();
            if (wants_asu || (wants_su && cfg.su_all)) {
                asu_result = decompose_multiperiod(model, panel, part, Method::Asu);
            }

            for (Method m : cfg.methods) {
                switch (m) {
                    case Method::Oat: {
                        auto r = decompose_multiperiod(model, panel, part, Method::Oat);
                        oat_by_gran[g].push_back(r);
                        add_row(year, "oat", "", g, r);
                        break;
                    }
                    case Method::Su: {
                        std::vector<AttributionResult> su_results;
                        for (const auto& order : orders) {
                            auto r = decompose_multiperiod(model, panel, part, Method::Su, order);
                            add_row(year, "su", order_label(order), g, r);
                            su_results.push_back(std::move(r));
                        }
                        if (cfg.su_all) {
                            // cross-check: the permutation average must match the ASU path
                            std::vector<CompensatedSum> avg(factors.size());
                            for (const auto& r : su_results) {
                                for (std::size_t i = 0; i < factors.size(); ++i) {
                                    avg[i].add(r.contributions[i]);
                                }
                            }
                            AttributionResult check = su_results.front();
                            check.method = Method::Asu;
                            check.permutation.reset();
                            for (std::size_t i = 0; i < factors.size(); ++i) {
                                check.contributions[i] =
                                    avg[i].value() / static_cast<double>(su_results.size());
                                if (!close_rel(check.contributions[i],
                                               asu_result->contributions[i], 1e-9)) {
                                    throw std::logic_error(
                                        "asu check failed: permutation average and subset/"
                                        "permutation path disagree for factor '" +
                                        factors[i].name + "'");
                                }
                            }
                            check.unexplained = 0.0;
                            add_row(year, "asu_check", "", g, check);
                            for (const auto& f : factors) {
                                stats.push_back(StatRow{std::to_string(year), to_string(g),
                                                        "permutation_range_su", f.name,
                                                        permutation_range(su_results, f)});
                            }
                        }
                        break;
                    }
                    case Method::Asu: {
                        add_row(year, "asu", "", g, *asu_result);
                        asu_by_gran.emplace(g, *asu_result);
                        break;
                    }
                }
            }
        }

        if (asu_by_gran.size() == kAllGranularities.size()) {
            for (const auto& f : factors) {
                stats.push_back(StatRow{std::to_string(year), "", "granularity_sensitivity_asu",
                                        f.name, granularity_sensitivity(asu_by_gran, f)});
            }
        }
    }

    for (const auto& [g, results] : oat_by_gran) {
        stats.push_back(
            StatRow{"all", to_string(g), "mean_abs_unexplained_oat", "", mean_abs_unexplained(results)});
    }

    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);

    if (cfg.combined) {
        YearlyAttributionTable all;
        all.factors = factors;
        for (const auto& [key, table] : tables) {
            all.rows.insert(all.rows.end(), table.rows.begin(), table.rows.end());
        }
        std::ostringstream body;
        emit_long(all, body);
        write_file_atomic(fs::path(cfg.out_dir) / "attrib_combined.csv", body.str());
    } else {
        for (const auto& [key, table] : tables) {
            std::ostringstream body;
            emit_table(table, body);
            const std::string name =
                "attrib_" + std::to_string(key.first) + "_" + key.second + ".csv";
            write_file_atomic(fs::path(cfg.out_dir) / name, body.str());
        }
    }
    if (!stats.empty()) {
        std::ostringstream body;
        emit_stats(stats, body);
        write_file_atomic(fs::path(cfg.out_dir) / "attrib_stats.csv", body.str());
    }
}

} // namespace detail

/// Execute a full attribution run: load or synthesize the panel, decompose
/// every business year at every granularity and method, and write the
/// report files. Deterministic given the config and input bytes.
inline void run(const RunConfig& cfg) {
    validate(cfg);
    std::optional<RiskFactorPanel> panel;
    if (cfg.synthetic) {
        panel = generate_synthetic_panel(cfg.synthetic->factors, cfg.synthetic->steps,
                                         cfg.synthetic->seed, cfg.synthetic->start_date);
    } else {
        ReadOptions opts;
        opts.percent_columns = cfg.percent_columns;
        panel = read_panel_file(cfg.panel_path, opts);
    }
    if (cfg.model.type == "bond") {
        detail::run_with_model(cfg, *panel, ConstantMaturityBond(cfg.model.maturity));
    } else {
        detail::run_with_model(cfg, *panel, HedgedForeignEquity(cfg.model.x0, cfg.model.y0));
    }
}

/// Built-in demonstration of the partially hedged foreign equity position
/// over business year 2003 (S&P 500 in EUR, FX forward hedge).
inline void demo_example1(std::ostream& out) {
    const HedgedForeignEquity model(0.95, 880.0);
    const Date t0(2002, 12, 31);
    const Date t1(2003, 12, 31);
    const RiskFactorPanel panel({{"FX"}, {"EQ"}}, {t0, t1}, {0.95, 880.0, 0.79, 1110.0});

    const double p0 = evaluate(model, make_scenario(panel, t0, t1, {}));
    const double p1 = evaluate(model, make_scenario(panel, t0, t1, panel.factors()));
    const auto hedged = hedged_contribution_x(model, 0.95, 0.79, 880.0, 1110.0);
    const auto asu = asu_static(model, panel, t0, t1);

    char buf[64];
    auto line = [&](const char* label, double v) {
        std::snprintf(buf, sizeof(buf), "%s%.1f EUR\n", label, v);
        out << buf;
    };
    out << "hedged foreign equity, business year 2003 (FX: 0.95 -> 0.79, EQ: 880 -> 1110)\n";
    line("P(0)                                    = ", p0);
    line("P(1)                                    = ", p1);
    line("delta P                                 = ", p1 - p0);
    line("FX contribution, OAT / SU updating FX first = ", hedged.oat_su_first);
    line("FX contribution, SU updating EQ first   = ", hedged.su_second);
    line("FX contribution, ASU                    = ", hedged.asu);
    line("EQ contribution, ASU                    = ", asu.contribution(FactorId{"EQ"}));
}

} // namespace attrib::cli
