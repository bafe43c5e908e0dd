#include "mel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "mel/random.hpp"

namespace mel {

using nlohmann::json;

namespace {

void require(bool condition, const std::string& what) {
    if (!condition) {
        throw ConfigError(what);
    }
}

std::string_view bool_text(bool b) { return b ? "true" : "false"; }

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), "cannot open '" + path.string() + "' for writing");
    out << text;
    require(static_cast<bool>(out), "failed writing '" + path.string() + "'");
}

std::vector<ResultRecord> run_one(const SweepSpec& spec, std::size_t value_index,
                                  std::size_t repetition) {
    const auto scenario =
        generate_scenario(run_config(spec, value_index, repetition), spec.task, run_cycle(spec, value_index));
    const auto problem = make_problem(scenario.task, scenario.nodes, scenario.link, scenario.cycle);
    std::vector<ResultRecord> out;
    out.reserve(spec.schemes.size());
    for (auto scheme : spec.schemes) {
        out.push_back(make_record(spec, value_index, repetition, scenario, solve(problem, scheme)));
    }
    return out;
}

}  // namespace

std::string_view to_string(SweepVariable variable) {
    return variable == SweepVariable::NumNodes ? "num_nodes" : "cycle_clock";
}

SweepVariable parse_sweep_variable(std::string_view text) {
    if (text == "num_nodes") {
        return SweepVariable::NumNodes;
    }
    if (text == "cycle_clock") {
        return SweepVariable::CycleClock;
    }
    throw ConfigError("unknown sweep variable '" + std::string(text) + "' (expected num_nodes|cycle_clock)");
}

void SweepSpec::validate() const {
    require(!values.empty(), "sweep: values must not be empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        require(std::isfinite(v) && v > 0.0, "sweep: values must be positive");
        if (variable == SweepVariable::NumNodes) {
            require(v == std::floor(v), "sweep: num_nodes values must be integers");
        }
        if (i > 0) {
            require(values[i] > values[i - 1], "sweep: values must be strictly increasing");
        }
    }
    require(repetitions >= 1, "sweep: repetitions must be >= 1");
    require(!schemes.empty(), "sweep: at least one scheme is required");
    require(std::set<Scheme>(schemes.begin(), schemes.end()).size() == schemes.size(),
            "sweep: duplicate scheme");
    base_config.validate();
    task.validate();
    cycle.validate();
    require(per_sample_payload_bits(task, cycle.mode) > 0.0,
            cycle.mode == Mode::DistributedDatasets
                ? "sweep: distributed-datasets mode needs S_d > 0 (c1 would be 0)"
                : "sweep: per-sample payload is zero (c1 would be 0)");
}

ScenarioConfig run_config(const SweepSpec& spec, std::size_t value_index, std::size_t repetition) {
    ScenarioConfig config = spec.base_config;
    if (spec.variable == SweepVariable::NumNodes) {
        config.num_nodes = static_cast<std::size_t>(spec.values.at(value_index));
    }
    config.rng_seed = mix_seed(spec.base_config.rng_seed, value_index, repetition);
    return config;
}

CycleSpec run_cycle(const SweepSpec& spec, std::size_t value_index) {
    CycleSpec cycle = spec.cycle;
    if (spec.variable == SweepVariable::CycleClock) {
        cycle.clock_s = spec.values.at(value_index);
    }
    return cycle;
}

ResultRecord make_record(const SweepSpec& spec, std::size_t value_index, std::size_t repetition,
                         const Scenario& scenario, const Allocation& alloc) {
    ResultRecord r;
    r.variable = spec.variable;
    r.value = spec.values.at(value_index);
    r.value_index = value_index;
    r.repetition = repetition;
    r.seed = scenario.provenance.seed;
    r.scheme = alloc.scheme;
    r.tau = alloc.tau;
    r.feasible = alloc.feasible;
    r.pathloss_exponent = scenario.pathloss_exponent;

    std::size_t busy = 0;
    double time_sum = 0.0;
    for (std::size_t k = 0; k < alloc.batches.size(); ++k) {
        if (alloc.batches[k] == 0) {
            continue;
        }
        const double t = alloc.node_time_s[k];
        r.time_min_s = busy == 0 ? t : std::min(r.time_min_s, t);
        r.time_max_s = busy == 0 ? t : std::max(r.time_max_s, t);
        time_sum += t;
        ++busy;
    }
    r.time_mean_s = busy > 0 ? time_sum / static_cast<double>(busy) : 0.0;

    if (!alloc.batches.empty()) {
        const auto [lo, hi] = std::minmax_element(alloc.batches.begin(), alloc.batches.end());
        r.batch_min = *lo;
        r.batch_max = *hi;
    }
    for (auto b : alloc.batches) {
        r.batch_sum += b;
    }
    return r;
}

std::vector<ResultRecord> run_sweep(const SweepSpec& spec, unsigned threads) {
    spec.validate();
    const std::size_t runs = spec.values.size() * spec.repetitions;
    std::vector<std::vector<ResultRecord>> slots(runs);

    auto run_slot = [&](std::size_t i) {
        slots[i] = run_one(spec, i / spec.repetitions, i % spec.repetitions);
    };

    const std::size_t workers = std::clamp<std::size_t>(threads, 1, runs);
    if (workers == 1) {
        for (std::size_t i = 0; i < runs; ++i) {
            run_slot(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        {
            std::vector<std::jthread> pool;
            pool.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (std::size_t i = next++; i < runs; i = next++) {
                        try {
                            run_slot(i);
                        } catch (...) {
                            std::lock_guard lock(failure_mutex);
                            if (!failure) {
                                failure = std::current_exception();
                            }
                        }
                    }
                });
            }
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    std::vector<ResultRecord> records;
    records.reserve(runs * spec.schemes.size());
    for (auto& slot : slots) {
        records.insert(records.end(), slot.begin(), slot.end());
    }
    return records;
}

std::vector<SummaryRow> summarize(std::span<const ResultRecord> records) {
    std::map<std::pair<double, Scheme>, std::vector<const ResultRecord*>> groups;
    for (const auto& r : records) {
        groups[{r.value, r.scheme}].push_back(&r);
    }

    std::vector<SummaryRow> rows;
    rows.reserve(groups.size());
    for (const auto& [key, members] : groups) {
        SummaryRow row;
        row.variable = members.front()->variable;
        row.value = key.first;
        row.scheme = key.second;
        row.runs = members.size();

        std::vector<std::uint64_t> taus;
        taus.reserve(members.size());
        std::size_t feasible = 0;
        double tau_sum = 0.0;
        for (const auto* r : members) {
            taus.push_back(r->tau);
            tau_sum += static_cast<double>(r->tau);
            feasible += r->feasible ? 1 : 0;
        }
        std::sort(taus.begin(), taus.end());
        const std::size_t n = taus.size();
        row.tau_median = n % 2 == 1 ? static_cast<double>(taus[n / 2])
                                    : 0.5 * (static_cast<double>(taus[n / 2 - 1]) + static_cast<double>(taus[n / 2]));
        row.tau_mean = tau_sum / static_cast<double>(n);
        row.tau_min = taus.front();
        row.tau_max = taus.back();
        row.feasible_rate = static_cast<double>(feasible) / static_cast<double>(n);
        rows.push_back(row);
    }
    return rows;
}

std::string format_double(double v) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, result.ptr);
}

std::string records_csv(std::span<const ResultRecord> records) {
    std::ostringstream out;
    out << "variable,value,value_index,repetition,seed,scheme,tau,feasible,pathloss_exponent,"
           "time_min_s,time_max_s,time_mean_s,batch_min,batch_max,batch_sum\n";
    for (const auto& r : records) {
        out << to_string(r.variable) << ',' << format_double(r.value) << ',' << r.value_index << ','
            << r.repetition << ',' << r.seed << ',' << to_string(r.scheme) << ',' << r.tau << ','
            << bool_text(r.feasible) << ',' << format_double(r.pathloss_exponent) << ','
            << format_double(r.time_min_s) << ',' << format_double(r.time_max_s) << ','
            << format_double(r.time_mean_s) << ',' << r.batch_min << ',' << r.batch_max << ','
            << r.batch_sum << '\n';
    }
    return out.str();
}

std::string summary_csv(std::span<const SummaryRow> rows) {
    std::ostringstream out;
    out << "variable,value,scheme,runs,feasible_rate,tau_median,tau_mean,tau_min,tau_max\n";
    for (const auto& r : rows) {
        out << to_string(r.variable) << ',' << format_double(r.value) << ',' << to_string(r.scheme) << ','
            << r.runs << ',' << format_double(r.feasible_rate) << ',' << format_double(r.tau_median) << ','
            << format_double(r.tau_mean) << ',' << r.tau_min << ',' << r.tau_max << '\n';
    }
    return out.str();
}

json to_json(const SweepSpec& spec) {
    json schemes = json::array();
    for (auto s : spec.schemes) {
        schemes.push_back(std::string(to_string(s)));
    }
    return json{
        {"variable", std::string(to_string(spec.variable))},
        {"values", spec.values},
        {"repetitions", spec.repetitions},
        {"schemes", schemes},
        {"base", {{"scenario", to_json(spec.base_config)},
                  {"task", to_json(spec.task)},
                  {"cycle", to_json(spec.cycle)}}},
    };
}

SweepSpec sweep_spec_from_json(const json& j) {
    require(j.is_object(), "sweep spec: expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        require(key == "variable" || key == "values" || key == "repetitions" || key == "schemes" ||
                    key == "base",
                "sweep spec: unknown field '" + key + "'");
    }
    SweepSpec spec;
    try {
        spec.variable = parse_sweep_variable(j.at("variable").get<std::string>());
        spec.values = j.at("values").get<std::vector<double>>();
        spec.repetitions = j.value("repetitions", std::size_t{1});
        if (j.contains("schemes")) {
            spec.schemes.clear();
            for (const auto& s : j.at("schemes")) {
                spec.schemes.push_back(parse_scheme(s.get<std::string>()));
            }
        }
        if (j.contains("base")) {
            const auto& base = j.at("base");
            require(base.is_object(), "sweep spec: base must be an object");
            for (const auto& [key, _] : base.items()) {
                require(key == "scenario" || key == "task" || key == "cycle",
                        "sweep spec: unknown base field '" + key + "'");
            }
            if (base.contains("scenario")) {
                spec.base_config = scenario_config_from_json(base.at("scenario"));
            }
            if (base.contains("task")) {
                spec.task = learning_task_from_json(base.at("task"));
            }
            if (base.contains("cycle")) {
                spec.cycle = cycle_spec_from_json(base.at("cycle"));
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("sweep spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

void write_sweep_outputs(const SweepSpec& spec, std::span<const ResultRecord> records,
                         const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    require(!ec, "cannot create output directory '" + dir.string() + "': " + ec.message());
    const auto rows = summarize(records);
    write_file(dir / "records.csv", records_csv(records));
    write_file(dir / "summary.csv", summary_csv(rows));
    write_file(dir / "spec-echo.json", to_json(spec).dump(2) + "\n");
}

}  // namespace mel
