#include "mel/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <set>
#include <string>

#include "mel/random.hpp"

namespace mel {

using nlohmann::json;

namespace {

constexpr std::string_view kScenarioFormat = "mel-scenario/1";

void require(bool condition, const std::string& what) {
    if (!condition) {
        throw ConfigError(what);
    }
}

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
    require(j.is_object(), std::string(where) + ": expected a JSON object");
    const std::set<std::string_view> keys(allowed);
    for (const auto& [key, _] : j.items()) {
        require(keys.count(key) > 0, std::string(where) + ": unknown field '" + key + "'");
    }
}

template <typename T>
T read(const json& j, const char* key, std::string_view where) {
    require(j.contains(key), std::string(where) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string(where) + ": bad field '" + key + "': " + e.what());
    }
}

template <typename T>
void read_optional(const json& j, const char* key, std::string_view where, T& out) {
    if (j.contains(key)) {
        out = read<T>(j, key, where);
    }
}

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used, 16);
        require(used == s.size(), "bad hex value '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("bad hex value '" + s + "'");
    }
}

}  // namespace

void ScenarioConfig::validate() const {
    require(num_nodes >= 1, "scenario config: num_nodes must be >= 1");
    require(std::isfinite(area_radius_m) && area_radius_m > 0.0, "scenario config: radius must be > 0");
    require(std::isfinite(pathloss_intercept_db), "scenario config: bad path-loss intercept");
    require(std::isfinite(pathloss_exponent), "scenario config: bad path-loss exponent");
    require(std::isfinite(bandwidth_hz) && bandwidth_hz > 0.0, "scenario config: bandwidth must be > 0");
    require(std::isfinite(tx_power_dbm), "scenario config: bad transmit power");
    require(std::isfinite(noise_density_dbm_per_hz), "scenario config: bad noise density");
    require(!cpu_profiles.empty(), "scenario config: at least one cpu profile is required");
    double total = 0.0;
    for (const auto& p : cpu_profiles) {
        require(std::isfinite(p.frequency_hz) && p.frequency_hz > 0.0,
                "scenario config: cpu frequency must be > 0");
        require(std::isfinite(p.fraction) && p.fraction >= 0.0,
                "scenario config: cpu profile fraction must be >= 0");
        total += p.fraction;
    }
    require(std::abs(total - 1.0) <= 1e-9, "scenario config: cpu profile fractions must sum to 1");
}

void Scenario::validate() const {
    require(!nodes.empty(), "scenario: no learners");
    require(placements.size() == nodes.size(), "scenario: placements do not match learners");
    require(std::isfinite(area_radius_m) && area_radius_m > 0.0, "scenario: radius must be > 0");
    link.validate();
    task.validate();
    cycle.validate();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        nodes[k].validate();
        const double r = placements[k].distance_m;
        require(r > 0.0 && r <= area_radius_m, "scenario: learner distance outside (0, R]");
    }
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double path_loss_db(const ScenarioConfig& config, double distance_m) {
    return config.pathloss_intercept_db + 10.0 * config.pathloss_exponent * std::log10(distance_m);
}

std::vector<std::size_t> profile_counts(std::size_t num_nodes, const std::vector<CpuProfile>& profiles) {
    std::vector<std::size_t> counts(profiles.size());
    std::vector<double> remainders(profiles.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const double exact = static_cast<double>(num_nodes) * profiles[i].fraction;
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        remainders[i] = exact - std::floor(exact);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(profiles.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return remainders[l] > remainders[r]; });
    for (std::size_t i = 0; assigned < num_nodes; i = (i + 1) % order.size()) {
        ++counts[order[i]];
        ++assigned;
    }
    return counts;
}

std::uint64_t config_hash(const ScenarioConfig& config) {
    auto j = to_json(config);
    j.erase("rng_seed");
    return fnv1a(j.dump());
}

Scenario generate_scenario(const ScenarioConfig& config, const LearningTask& task,
                           const CycleSpec& cycle) {
    config.validate();
    task.validate();
    cycle.validate();

    Rng rng(config.rng_seed);
    Scenario s;
    s.task = task;
    s.cycle = cycle;
    s.link = LinkParams{config.bandwidth_hz, dbm_to_watts(config.noise_density_dbm_per_hz)};
    s.provenance = Provenance{config_hash(config), config.rng_seed};
    s.area_radius_m = config.area_radius_m;
    s.pathloss_exponent = config.pathloss_exponent;

    s.placements.reserve(config.num_nodes);
    for (std::size_t k = 0; k < config.num_nodes; ++k) {
        double u = rng.uniform01();
        while (u == 0.0) {
            u = rng.uniform01();
        }
        const double r = config.area_radius_m * std::sqrt(u);
        const double theta = 2.0 * std::numbers::pi * rng.uniform01();
        s.placements.push_back({r * std::cos(theta), r * std::sin(theta), r});
    }

    std::vector<double> frequencies;
    frequencies.reserve(config.num_nodes);
    const auto counts = profile_counts(config.num_nodes, config.cpu_profiles);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        frequencies.insert(frequencies.end(), counts[i], config.cpu_profiles[i].frequency_hz);
    }
    rng.shuffle(frequencies);

    const double tx_w = dbm_to_watts(config.tx_power_dbm);
    s.nodes.reserve(config.num_nodes);
    for (std::size_t k = 0; k < config.num_nodes; ++k) {
        s.nodes.push_back(EdgeNode{
            .id = "node-" + std::to_string(k),
            .cpu_frequency_hz = frequencies[k],
            .tx_power_w = tx_w,
            .channel_gain = db_to_linear(-path_loss_db(config, s.placements[k].distance_m)),
        });
    }
    s.validate();
    return s;
}

LearningTask mnist_preset() {
    // weight matrices 784x300, 300x124, 124x60, 60x10
    constexpr double kWeights = 784.0 * 300 + 300.0 * 124 + 124.0 * 60 + 60.0 * 10;
    return LearningTask{
        .features = 784,
        .data_precision_bits = 8,
        .model_precision_bits = 32,
        .per_sample_model_coeffs = 0,
        .fixed_model_coeffs = kWeights,
        .model_complexity_flops = 1'123'736,
        .total_samples = 60'000,
    };
}

json to_json(const ScenarioConfig& config) {
    json profiles = json::array();
    for (const auto& p : config.cpu_profiles) {
        profiles.push_back({{"frequency_hz", p.frequency_hz}, {"fraction", p.fraction}});
    }
    return json{
        {"num_nodes", config.num_nodes},
        {"area_radius_m", config.area_radius_m},
        {"pathloss_intercept_db", config.pathloss_intercept_db},
        {"pathloss_exponent", config.pathloss_exponent},
        {"bandwidth_hz", config.bandwidth_hz},
        {"tx_power_dbm", config.tx_power_dbm},
        {"noise_density_dbm_per_hz", config.noise_density_dbm_per_hz},
        {"cpu_profiles", profiles},
        {"rng_seed", config.rng_seed},
    };
}

json to_json(const LearningTask& task) {
    return json{
        {"features", task.features},
        {"data_precision_bits", task.data_precision_bits},
        {"model_precision_bits", task.model_precision_bits},
        {"per_sample_model_coeffs", task.per_sample_model_coeffs},
        {"fixed_model_coeffs", task.fixed_model_coeffs},
        {"model_complexity_flops", task.model_complexity_flops},
        {"total_samples", task.total_samples},
    };
}

json to_json(const CycleSpec& cycle) {
    return json{{"clock_s", cycle.clock_s}, {"mode", std::string(to_string(cycle.mode))}};
}

json to_json(const Scenario& scenario) {
    json nodes = json::array();
    for (std::size_t k = 0; k < scenario.nodes.size(); ++k) {
        const auto& n = scenario.nodes[k];
        const auto& at = scenario.placements[k];
        nodes.push_back({
            {"id", n.id},
            {"cpu_frequency_hz", n.cpu_frequency_hz},
            {"tx_power_w", n.tx_power_w},
            {"channel_gain_linear", n.channel_gain},
            {"distance_m", at.distance_m},
            {"x_m", at.x_m},
            {"y_m", at.y_m},
        });
    }
    return json{
        {"format", kScenarioFormat},
        {"generator", kGeneratorName},
        {"provenance", {{"config_hash", hex64(scenario.provenance.config_hash)},
                        {"seed", scenario.provenance.seed}}},
        {"area_radius_m", scenario.area_radius_m},
        {"pathloss_exponent", scenario.pathloss_exponent},
        {"link", {{"bandwidth_hz", scenario.link.bandwidth_hz},
                  {"noise_density_w_per_hz", scenario.link.noise_density_w_per_hz}}},
        {"task", to_json(scenario.task)},
        {"cycle", to_json(scenario.cycle)},
        {"nodes", nodes},
    };
}

ScenarioConfig scenario_config_from_json(const json& j) {
    constexpr std::string_view where = "scenario config";
    reject_unknown_keys(j,
                        {"num_nodes", "area_radius_m", "pathloss_intercept_db", "pathloss_exponent",
                         "bandwidth_hz", "tx_power_dbm", "noise_density_dbm_per_hz", "cpu_profiles",
                         "rng_seed"},
                        where);
    ScenarioConfig c;
    read_optional(j, "num_nodes", where, c.num_nodes);
    read_optional(j, "area_radius_m", where, c.area_radius_m);
    read_optional(j, "pathloss_intercept_db", where, c.pathloss_intercept_db);
    read_optional(j, "pathloss_exponent", where, c.pathloss_exponent);
    read_optional(j, "bandwidth_hz", where, c.bandwidth_hz);
    read_optional(j, "tx_power_dbm", where, c.tx_power_dbm);
    read_optional(j, "noise_density_dbm_per_hz", where, c.noise_density_dbm_per_hz);
    read_optional(j, "rng_seed", where, c.rng_seed);
    if (j.contains("cpu_profiles")) {
        const auto& arr = j.at("cpu_profiles");
        require(arr.is_array(), "scenario config: cpu_profiles must be an array");
        c.cpu_profiles.clear();
        for (const auto& p : arr) {
            reject_unknown_keys(p, {"frequency_hz", "fraction"}, "cpu profile");
            c.cpu_profiles.push_back(
                {read<double>(p, "frequency_hz", "cpu profile"), read<double>(p, "fraction", "cpu profile")});
        }
    }
    c.validate();
    return c;
}

LearningTask learning_task_from_json(const json& j) {
    constexpr std::string_view where = "task";
    reject_unknown_keys(j,
                        {"preset", "features", "data_precision_bits", "model_precision_bits",
                         "per_sample_model_coeffs", "fixed_model_coeffs", "model_complexity_flops",
                         "total_samples"},
                        where);
    LearningTask t;
    if (j.contains("preset")) {
        const auto name = read<std::string>(j, "preset", where);
        require(name == "mnist", "task: unknown preset '" + name + "'");
        t = mnist_preset();
        read_optional(j, "features", where, t.features);
        read_optional(j, "data_precision_bits", where, t.data_precision_bits);
        read_optional(j, "model_precision_bits", where, t.model_precision_bits);
        read_optional(j, "per_sample_model_coeffs", where, t.per_sample_model_coeffs);
        read_optional(j, "fixed_model_coeffs", where, t.fixed_model_coeffs);
        read_optional(j, "model_complexity_flops", where, t.model_complexity_flops);
        read_optional(j, "total_samples", where, t.total_samples);
    } else {
        t.features = read<double>(j, "features", where);
        t.data_precision_bits = read<double>(j, "data_precision_bits", where);
        t.model_precision_bits = read<double>(j, "model_precision_bits", where);
        t.per_sample_model_coeffs = read<double>(j, "per_sample_model_coeffs", where);
        t.fixed_model_coeffs = read<double>(j, "fixed_model_coeffs", where);
        t.model_complexity_flops = read<double>(j, "model_complexity_flops", where);
        t.total_samples = read<std::uint64_t>(j, "total_samples", where);
    }
    t.validate();
    return t;
}

CycleSpec cycle_spec_from_json(const json& j) {
    constexpr std::string_view where = "cycle";
    reject_unknown_keys(j, {"clock_s", "mode"}, where);
    CycleSpec c;
    c.clock_s = read<double>(j, "clock_s", where);
    if (j.contains("mode")) {
        c.mode = parse_mode(read<std::string>(j, "mode", where));
    }
    c.validate();
    return c;
}

Scenario scenario_from_json(const json& j) {
    constexpr std::string_view where = "scenario";
    reject_unknown_keys(j,
                        {"format", "generator", "provenance", "area_radius_m", "pathloss_exponent",
                         "link", "task", "cycle", "nodes"},
                        where);
    const auto format = read<std::string>(j, "format", where);
    require(format == kScenarioFormat, "scenario: unsupported format '" + format + "'");

    Scenario s;
    const auto& prov = j.at("provenance");
    reject_unknown_keys(prov, {"config_hash", "seed"}, "provenance");
    s.provenance.config_hash = parse_hex64(read<std::string>(prov, "config_hash", "provenance"));
    s.provenance.seed = read<std::uint64_t>(prov, "seed", "provenance");
    s.area_radius_m = read<double>(j, "area_radius_m", where);
    s.pathloss_exponent = read<double>(j, "pathloss_exponent", where);

    const auto& link = j.at("link");
    reject_unknown_keys(link, {"bandwidth_hz", "noise_density_w_per_hz"}, "link");
    s.link.bandwidth_hz = read<double>(link, "bandwidth_hz", "link");
    s.link.noise_density_w_per_hz = read<double>(link, "noise_density_w_per_hz", "link");

    s.task = learning_task_from_json(read<json>(j, "task", where));
    s.cycle = cycle_spec_from_json(read<json>(j, "cycle", where));

    const auto nodes = read<json>(j, "nodes", where);
    require(nodes.is_array(), "scenario: nodes must be an array");
    for (const auto& n : nodes) {
        reject_unknown_keys(
            n, {"id", "cpu_frequency_hz", "tx_power_w", "channel_gain_linear", "distance_m", "x_m", "y_m"},
            "node");
        s.nodes.push_back(EdgeNode{
            .id = read<std::string>(n, "id", "node"),
            .cpu_frequency_hz = read<double>(n, "cpu_frequency_hz", "node"),
            .tx_power_w = read<double>(n, "tx_power_w", "node"),
            .channel_gain = read<double>(n, "channel_gain_linear", "node"),
        });
        s.placements.push_back({read<double>(n, "x_m", "node"), read<double>(n, "y_m", "node"),
                                read<double>(n, "distance_m", "node")});
    }
    s.validate();
    return s;
}

}  // namespace mel
