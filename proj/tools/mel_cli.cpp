// mel: command-line front end.
//
//   mel gen   --config <file> [--seed <n>] --out <file>
//   mel solve --scenario <file> [--scheme analytical|eta|oracle] [--mode parallel|distributed] [--json]
//   mel sweep --spec <file> --out <dir> [--threads <n>]
//
// Exit codes: 0 success, 1 infeasible single solve, 2 configuration error.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "mel/allocator.hpp"
#include "mel/harness.hpp"
#include "mel/scenarios.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitConfig = 2;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw mel::ConfigError("cannot open '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw mel::ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw mel::ConfigError("cannot write '" + path + "'");
    }
}

int run_gen(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out_path) {
    const auto j = read_json_file(config_path);
    if (!j.is_object()) {
        throw mel::ConfigError("generator config must be a JSON object");
    }
    for (const auto& [key, _] : j.items()) {
        if (key != "scenario" && key != "task" && key != "cycle") {
            throw mel::ConfigError("generator config: unknown field '" + key + "'");
        }
    }
    auto config = j.contains("scenario") ? mel::scenario_config_from_json(j.at("scenario")) : mel::ScenarioConfig{};
    const auto task = j.contains("task") ? mel::learning_task_from_json(j.at("task")) : mel::mnist_preset();
    const auto cycle = j.contains("cycle") ? mel::cycle_spec_from_json(j.at("cycle"))
                                           : mel::CycleSpec{30.0, mel::Mode::TaskParallelization};
    if (seed) {
        config.rng_seed = *seed;
    }
    const auto scenario = mel::generate_scenario(config, task, cycle);
    write_text_file(out_path, mel::to_json(scenario).dump(2) + "\n");
    std::cout << "wrote " << scenario.nodes.size() << " learners to " << out_path << '\n';
    return kExitOk;
}

int run_solve(const std::string& scenario_path, const std::string& scheme_name,
              const std::optional<std::string>& mode_name, bool as_json) {
    auto scenario = mel::scenario_from_json(read_json_file(scenario_path));
    if (mode_name) {
        scenario.cycle.mode = mel::parse_mode(*mode_name);
    }
    const auto scheme = mel::parse_scheme(scheme_name);
    const auto problem = mel::make_problem(scenario.task, scenario.nodes, scenario.link, scenario.cycle);
    const auto alloc = mel::solve(problem, scheme);
    const auto relaxed = mel::solve_relaxed(problem);
    const auto report = mel::check_feasible(problem, alloc);

    if (as_json) {
        json nodes = json::array();
        for (std::size_t k = 0; k < scenario.nodes.size(); ++k) {
            const auto& c = problem.coeffs[k];
            nodes.push_back({
                {"id", scenario.nodes[k].id},
                {"batch", alloc.batches[k]},
                {"time_s", alloc.node_time_s[k]},
                {"link_rate_bps", mel::link_rate(scenario.nodes[k], scenario.link)},
                {"c2", c.c2},
                {"c1", c.c1},
                {"c0", c.c0},
            });
        }
        json out{
            {"scheme", std::string(mel::to_string(scheme))},
            {"mode", std::string(mel::to_string(scenario.cycle.mode))},
            {"clock_s", problem.clock_s},
            {"total_samples", problem.total_samples},
            {"feasible", alloc.feasible},
            {"tau", alloc.tau},
            {"relaxed_tau", relaxed ? json(relaxed->tau) : json(nullptr)},
            {"nodes", nodes},
        };
        std::cout << out.dump(2) << '\n';
    } else {
        std::cout << "scheme        " << mel::to_string(scheme) << '\n'
                  << "mode          " << mel::to_string(scenario.cycle.mode) << '\n'
                  << "learners      " << problem.size() << '\n'
                  << "samples       " << problem.total_samples << '\n'
                  << "clock         " << problem.clock_s << " s\n"
                  << "relaxed tau   " << (relaxed ? mel::format_double(relaxed->tau) : std::string("infeasible"))
                  << '\n'
                  << "tau           " << alloc.tau << '\n'
                  << "feasible      " << (alloc.feasible ? "yes" : "no") << "\n\n";
        std::cout << std::left << std::setw(12) << "learner" << std::right << std::setw(14) << "cpu_hz"
                  << std::setw(16) << "rate_bps" << std::setw(10) << "batch" << std::setw(14) << "time_s" << '\n';
        for (std::size_t k = 0; k < scenario.nodes.size(); ++k) {
            std::cout << std::left << std::setw(12) << scenario.nodes[k].id << std::right << std::setw(14)
                      << scenario.nodes[k].cpu_frequency_hz << std::setw(16)
                      << mel::link_rate(scenario.nodes[k], scenario.link) << std::setw(10) << alloc.batches[k]
                      << std::setw(14) << alloc.node_time_s[k] << '\n';
        }
        for (const auto& v : report.violations) {
            std::cout << "violation: " << v.describe() << '\n';
        }
    }
    return alloc.feasible ? kExitOk : kExitInfeasible;
}

int run_sweep(const std::string& spec_path, const std::string& out_dir, unsigned threads) {
    const auto spec = mel::sweep_spec_from_json(read_json_file(spec_path));
    const auto records = mel::run_sweep(spec, threads);
    mel::write_sweep_outputs(spec, records, out_dir);
    std::cout << "wrote " << records.size() << " records to " << out_dir << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Batch allocation for distributed learning on heterogeneous edge learners"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    auto* gen = app.add_subcommand("gen", "Generate a random scenario");
    gen->add_option("--config", config_path, "Generator config JSON")->required();
    gen->add_option("--seed", seed, "Override the config's rng_seed");
    gen->add_option("--out", out_path, "Scenario JSON to write")->required();

    std::string scenario_path;
    std::string scheme_name = "analytical";
    std::optional<std::string> mode_name;
    bool as_json = false;
    auto* solve = app.add_subcommand("solve", "Allocate batches for one scenario");
    solve->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    solve->add_option("--scheme", scheme_name, "analytical|eta|oracle");
    solve->add_option("--mode", mode_name, "parallel|distributed (overrides the scenario)");
    solve->add_flag("--json", as_json, "Emit a JSON report");

    std::string spec_path;
    std::string out_dir;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    auto* sweep = app.add_subcommand("sweep", "Run a Monte Carlo sweep");
    sweep->add_option("--spec", spec_path, "Sweep spec JSON")->required();
    sweep->add_option("--out", out_dir, "Output directory")->required();
    sweep->add_option("--threads", threads, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*gen) {
            return run_gen(config_path, seed, out_path);
        }
        if (*solve) {
            return run_solve(scenario_path, scheme_name, mode_name, as_json);
        }
        return run_sweep(spec_path, out_dir, threads);
    } catch (const mel::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}
