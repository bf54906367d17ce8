// Command-line driver: `attrib run|demo|synth`. Exit codes: 0 success,
// 1 internal error, 2 configuration error, 3 data error, 4 evaluation error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "attrib/attrib.hpp"
#include "attrib/cli.hpp"

namespace {

using namespace attrib;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

void apply_overrides(cli::RunConfig& cfg, const std::string& out_flag,
                     const std::string& methods_flag, const std::string& grans_flag,
                     const std::string& years_flag, const std::string& orders_flag,
                     bool combined_flag) {
    // precedence for the output directory: flag, then env var, then config
    if (const char* env = std::getenv(cli::kOutDirEnvVar); env && *env) cfg.out_dir = env;
    if (!out_flag.empty()) cfg.out_dir = out_flag;

    if (!methods_flag.empty()) {
        cfg.methods.clear();
        for (const auto& tok : split(methods_flag, ',')) {
            auto m = parse_method(tok);
            if (!m) throw InputError("unknown method '" + tok + "'");
            cfg.methods.push_back(*m);
        }
    }
    if (!grans_flag.empty()) {
        cfg.granularities.clear();
        for (const auto& tok : split(grans_flag, ',')) {
            auto g = parse_granularity(tok);
            if (!g) throw InputError("unknown granularity '" + tok + "'");
            cfg.granularities.push_back(*g);
        }
    }
    if (!years_flag.empty()) {
        auto parts = split(years_flag, ':');
        try {
            if (parts.size() == 1) {
                cfg.first_year = cfg.last_year = std::stoi(parts[0]);
            } else if (parts.size() == 2) {
                cfg.first_year = std::stoi(parts[0]);
                cfg.last_year = std::stoi(parts[1]);
            } else {
                throw InputError("--years expects YEAR or FIRST:LAST");
            }
        } catch (const std::logic_error&) {
            throw InputError("invalid --years value '" + years_flag + "'");
        }
    }
    if (!orders_flag.empty()) {
        cfg.su_all = false;
        cfg.su_orders.clear();
        if (orders_flag == "all") {
            cfg.su_all = true;
        } else {
            for (const auto& one : split(orders_flag, ';')) {
                UpdateOrder order;
                for (const auto& f : split(one, ',')) order.push_back(FactorId{f});
                cfg.su_orders.push_back(std::move(order));
            }
        }
    }
    if (combined_flag) cfg.combined = true;
}

SyntheticFactorSpec parse_factor_spec(const std::string& text) {
    auto parts = split(text, ':');
    if (parts.size() != 5) {
        throw InputError("--factor expects NAME:START:VOL:DRIFT:WALK, got '" + text + "'");
    }
    SyntheticFactorSpec spec;
    spec.id = FactorId{parts[0]};
    try {
        spec.start = std::stod(parts[1]);
        spec.volatility = std::stod(parts[2]);
        spec.drift = std::stod(parts[3]);
    } catch (const std::logic_error&) {
        throw InputError("invalid number in --factor '" + text + "'");
    }
    auto walk = parse_walk_kind(parts[4]);
    if (!walk) throw InputError("unknown walk kind '" + parts[4] + "'");
    spec.walk = *walk;
    return spec;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"p&l attribution engine (OAT, SU and ASU decompositions)"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run attributions described by a config file");
    std::string config_path, out_flag, methods_flag, grans_flag, years_flag, orders_flag;
    bool combined_flag = false;
    run_cmd->add_option("--config", config_path, "JSON run configuration")->required();
    run_cmd->add_option("--out", out_flag, "output directory (overrides config and env)");
    run_cmd->add_option("--methods", methods_flag, "comma list: oat,su,asu");
    run_cmd->add_option("--granularities", grans_flag,
                        "comma list: annual,quarterly,monthly,weekly,daily");
    run_cmd->add_option("--years", years_flag, "YEAR or FIRST:LAST");
    run_cmd->add_option("--orders", orders_flag,
                        "SU orders: \"all\" or semicolon-separated comma lists");
    run_cmd->add_flag("--combined", combined_flag, "write one combined long-format file");

    auto* demo_cmd = app.add_subcommand("demo", "print a built-in demonstration");
    std::string demo_name;
    demo_cmd->add_option("name", demo_name, "demo name (example1)")->required();

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic panel CSV");
    std::uint64_t seed = 42;
    int steps = 252;
    std::string synth_out, start_date_flag;
    std::vector<std::string> factor_flags;
    synth_cmd->add_option("--seed", seed, "random seed");
    synth_cmd->add_option("--steps", steps, "number of weekday steps");
    synth_cmd->add_option("--out", synth_out, "output file (default: stdout)");
    synth_cmd->add_option("--start-date", start_date_flag, "first panel date (ISO-8601)");
    synth_cmd->add_option("--factor", factor_flags,
                          "factor spec NAME:START:VOL:DRIFT:WALK (repeatable; default "
                          "IR/CS/FX bond factors)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run_cmd) {
            attrib::cli::RunConfig cfg = attrib::cli::load_config_file(config_path);
            apply_overrides(cfg, out_flag, methods_flag, grans_flag, years_flag, orders_flag,
                            combined_flag);
            attrib::cli::run(cfg);
        } else if (*demo_cmd) {
            if (demo_name != "example1") throw InputError("unknown demo '" + demo_name + "'");
            attrib::cli::demo_example1(std::cout);
        } else if (*synth_cmd) {
            std::vector<SyntheticFactorSpec> specs;
            for (const auto& f : factor_flags) specs.push_back(parse_factor_spec(f));
            if (specs.empty()) {
                specs = {
                    {FactorId{"IR"}, 0.040, 0.0007, 0.0, WalkKind::Arithmetic},
                    {FactorId{"CS"}, 0.012, 0.0003, 0.0, WalkKind::Arithmetic},
                    {FactorId{"FX"}, 1.05, 0.006, 0.0, WalkKind::Geometric},
                };
            }
            Date start(2002, 12, 31);
            if (!start_date_flag.empty()) {
                auto d = Date::parse(start_date_flag);
                if (!d) throw InputError("invalid --start-date '" + start_date_flag + "'");
                start = *d;
            }
            auto panel = generate_synthetic_panel(specs, steps, seed, start);
            if (synth_out.empty()) {
                write_panel(panel, std::cout);
            } else {
                std::ostringstream body;
                write_panel(panel, body);
                attrib::cli::detail::write_file_atomic(synth_out, body.str());
            }
        }
        return 0;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const EvaluationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
