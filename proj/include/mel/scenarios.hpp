/**
 * @file scenarios.hpp
 * @brief Seeded random edge environments and the MNIST task preset.
 *
 * Learners are dropped uniformly in a disk around the orchestrator. Each
 * gets a processor frequency from a list of profiles and a channel gain from
 * a log-distance path-loss model,
 *
 *     PL(dB) = intercept + 10 * exponent * log10(distance_m),  h = 10^(-PL/10).
 *
 * Scenarios serialize to JSON with SI units in every field name; that file is
 * what the CLI's `gen` writes and `solve` reads.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "mel/model.hpp"

namespace mel {

struct CpuProfile {
    double frequency_hz = 0;
    double fraction = 0;
};

struct ScenarioConfig {
    std::size_t num_nodes = 20;
    double area_radius_m = 50.0;
    double pathloss_intercept_db = 7.0;
    double pathloss_exponent = 2.1;
    double bandwidth_hz = 5e6;
    double tx_power_dbm = 23.0;
    double noise_density_dbm_per_hz = -174.0;
    std::vector<CpuProfile> cpu_profiles{{2.4e9, 0.5}, {7e8, 0.5}};
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct NodePlacement {
    double x_m = 0;
    double y_m = 0;
    double distance_m = 0;
};

struct Provenance {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};

struct Scenario {
    std::vector<EdgeNode> nodes;
    std::vector<NodePlacement> placements;  ///< parallel to nodes
    LinkParams link;
    LearningTask task;
    CycleSpec cycle;
    Provenance provenance;
    double area_radius_m = 0;
    double pathloss_exponent = 0;  ///< carried along so results can tell the path-loss readings apart

    void validate() const;
};

double dbm_to_watts(double dbm);
double db_to_linear(double db);
double path_loss_db(const ScenarioConfig& config, double distance_m);

/**
 * Number of learners per CPU profile: floor(K * fraction) each, with the
 * remainder going to the largest fractional parts (ties: lower index).
 */
std::vector<std::size_t> profile_counts(std::size_t num_nodes, const std::vector<CpuProfile>& profiles);

/// Hash of the configuration with the seed left out.
std::uint64_t config_hash(const ScenarioConfig& config);

/**
 * Draws a scenario. Random draws happen in this order: for each learner,
 * a radius draw u (re-drawn while u == 0) giving R*sqrt(u), then an angle
 * draw; after all placements, the profile assignment is shuffled.
 */
Scenario generate_scenario(const ScenarioConfig& config, const LearningTask& task,
                           const CycleSpec& cycle);

/// 784-300-124-60-10 network on MNIST.
LearningTask mnist_preset();

nlohmann::json to_json(const ScenarioConfig& config);
nlohmann::json to_json(const LearningTask& task);
nlohmann::json to_json(const CycleSpec& cycle);
nlohmann::json to_json(const Scenario& scenario);

ScenarioConfig scenario_config_from_json(const nlohmann::json& j);
/// Accepts either {"preset": "mnist", ...overrides} or a full field list.
LearningTask learning_task_from_json(const nlohmann::json& j);
CycleSpec cycle_spec_from_json(const nlohmann::json& j);
Scenario scenario_from_json(const nlohmann::json& j);

}  // namespace mel
