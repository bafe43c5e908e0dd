/**
 * @file harness.hpp
 * @brief Monte Carlo sweeps over the number of learners or the cycle clock.
 *
 * Each (sweep value, repetition) pair gets its own seed,
 * mix_seed(base_seed, value_index, repetition), so any single run can be
 * regenerated in isolation. Runs may execute on several threads; records
 * are always emitted ordered by (value index, repetition, scheme).
 *
 * records.csv columns:
 *   variable,value,value_index,repetition,seed,scheme,tau,feasible,
 *   pathloss_exponent,time_min_s,time_max_s,time_mean_s,batch_min,batch_max,batch_sum
 * summary.csv columns:
 *   variable,value,scheme,runs,feasible_rate,tau_median,tau_mean,tau_min,tau_max
 *
 * Time statistics cover learners with a non-empty batch. Doubles are written
 * as shortest round-trip decimals.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mel/allocator.hpp"
#include "mel/scenarios.hpp"

namespace mel {

enum class SweepVariable { NumNodes, CycleClock };

std::string_view to_string(SweepVariable variable);
SweepVariable parse_sweep_variable(std::string_view text);

struct SweepSpec {
    SweepVariable variable = SweepVariable::NumNodes;
    std::vector<double> values;
    std::size_t repetitions = 1;
    ScenarioConfig base_config;  ///< rng_seed is the base seed
    LearningTask task = mnist_preset();
    CycleSpec cycle{30.0, Mode::TaskParallelization};
    std::vector<Scheme> schemes{Scheme::Analytical, Scheme::ETA, Scheme::Oracle};

    void validate() const;
};

struct ResultRecord {
    SweepVariable variable = SweepVariable::NumNodes;
    double value = 0;
    std::size_t value_index = 0;
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::Analytical;
    std::uint64_t tau = 0;
    bool feasible = false;
    double pathloss_exponent = 0;
    double time_min_s = 0;
    double time_max_s = 0;
    double time_mean_s = 0;
    std::uint64_t batch_min = 0;
    std::uint64_t batch_max = 0;
    std::uint64_t batch_sum = 0;
};

struct SummaryRow {
    SweepVariable variable = SweepVariable::NumNodes;
    double value = 0;
    Scheme scheme = Scheme::Analytical;
    std::size_t runs = 0;
    double feasible_rate = 0;
    double tau_median = 0;
    double tau_mean = 0;
    std::uint64_t tau_min = 0;
    std::uint64_t tau_max = 0;
};

/// Scenario configuration for one run: sweep value applied, seed mixed in.
ScenarioConfig run_config(const SweepSpec& spec, std::size_t value_index, std::size_t repetition);
CycleSpec run_cycle(const SweepSpec& spec, std::size_t value_index);

ResultRecord make_record(const SweepSpec& spec, std::size_t value_index, std::size_t repetition,
                         const Scenario& scenario, const Allocation& alloc);

/// Throws ConfigError before any run starts if the spec is invalid.
std::vector<ResultRecord> run_sweep(const SweepSpec& spec, unsigned threads = 1);

/// Groups by (value, scheme), ascending value, schemes in enum order.
std::vector<SummaryRow> summarize(std::span<const ResultRecord> records);

std::string format_double(double v);
std::string records_csv(std::span<const ResultRecord> records);
std::string summary_csv(std::span<const SummaryRow> rows);

nlohmann::json to_json(const SweepSpec& spec);
SweepSpec sweep_spec_from_json(const nlohmann::json& j);

/// Writes records.csv, summary.csv and spec-echo.json into @p dir.
void write_sweep_outputs(const SweepSpec& spec, std::span<const ResultRecord> records,
                         const std::filesystem::path& dir);

}  // namespace mel
