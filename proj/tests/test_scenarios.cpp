#include <cmath>

#include "doctest.h"
#include "mel/scenarios.hpp"

using namespace mel;

namespace {

const CycleSpec kCycle{30.0, Mode::TaskParallelization};

}  // namespace

TEST_CASE("mnist preset") {
    const auto t = mnist_preset();
    CHECK(t.features == 784);
    CHECK(t.data_precision_bits == 8);
    CHECK(t.model_precision_bits == 32);
    CHECK(t.per_sample_model_coeffs == 0);
    CHECK(t.fixed_model_coeffs == 280'440);
    CHECK(t.model_complexity_flops == 1'123'736);
    CHECK(t.total_samples == 60'000);
    CHECK(model_bits(t, 777) == 8'974'080);
}

TEST_CASE("unit conversions") {
    CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
    CHECK(dbm_to_watts(23.0) == doctest::Approx(0.19952623149688797).epsilon(1e-15));
    CHECK(dbm_to_watts(-174.0) == doctest::Approx(3.981071705534969e-21).epsilon(1e-14));
    CHECK(db_to_linear(-30.0) == doctest::Approx(1e-3));
    ScenarioConfig c;
    CHECK(path_loss_db(c, 10.0) == doctest::Approx(28.0));  // 7 + 21*log10(10)
}

TEST_CASE("generation is deterministic for a fixed seed") {
    ScenarioConfig c;
    c.num_nodes = 2;
    c.rng_seed = 42;
    const auto s1 = generate_scenario(c, mnist_preset(), kCycle);
    const auto s2 = generate_scenario(c, mnist_preset(), kCycle);
    CHECK(to_json(s1).dump() == to_json(s2).dump());
    c.rng_seed = 43;
    CHECK(to_json(generate_scenario(c, mnist_preset(), kCycle)).dump() != to_json(s1).dump());
}

TEST_CASE("zero path-loss exponent gives every learner the same gain") {
    ScenarioConfig c;
    c.num_nodes = 15;
    c.pathloss_exponent = 0.0;
    c.pathloss_intercept_db = 40.0;
    const auto s = generate_scenario(c, mnist_preset(), kCycle);
    for (const auto& n : s.nodes) {
        CHECK(n.channel_gain == doctest::Approx(1e-4).epsilon(1e-14));
    }
}

TEST_CASE("default profiles with 20 learners splits the processors evenly") {
    ScenarioConfig c;
    c.num_nodes = 20;
    c.rng_seed = 7;
    const auto s = generate_scenario(c, mnist_preset(), kCycle);
    int fast = 0;
    int slow = 0;
    for (const auto& n : s.nodes) {
        fast += n.cpu_frequency_hz == 2.4e9 ? 1 : 0;
        slow += n.cpu_frequency_hz == 7e8 ? 1 : 0;
    }
    CHECK(fast == 10);
    CHECK(slow == 10);
}

TEST_CASE("profile counts are floor or ceil of K * fraction") {
    const std::vector<CpuProfile> thirds{{1e9, 1.0 / 3}, {2e9, 1.0 / 3}, {3e9, 1.0 / 3}};
    const std::vector<CpuProfile> uneven{{1e9, 0.29}, {2e9, 0.71}};
    for (std::size_t k = 1; k <= 60; ++k) {
        for (const auto* profiles : {&thirds, &uneven}) {
            const auto counts = profile_counts(k, *profiles);
            std::size_t total = 0;
            for (std::size_t i = 0; i < counts.size(); ++i) {
                const double exact = static_cast<double>(k) * (*profiles)[i].fraction;
                CHECK(static_cast<double>(counts[i]) >= std::floor(exact - 1e-9));
                CHECK(static_cast<double>(counts[i]) <= std::ceil(exact + 1e-9));
                total += counts[i];
            }
            CHECK(total == k);
        }
    }
    // shuffled profile assignment keeps the counts
    ScenarioConfig c;
    c.num_nodes = 7;
    c.cpu_profiles = thirds;
    const auto s = generate_scenario(c, mnist_preset(), kCycle);
    const auto counts = profile_counts(7, thirds);
    for (std::size_t i = 0; i < thirds.size(); ++i) {
        std::size_t n = 0;
        for (const auto& node : s.nodes) {
            n += node.cpu_frequency_hz == thirds[i].frequency_hz ? 1 : 0;
        }
        CHECK(n == counts[i]);
    }
}

TEST_CASE("placements are uniform in the disk") {
    ScenarioConfig c;
    c.num_nodes = 10'000;
    c.rng_seed = 2718;
    const auto s = generate_scenario(c, mnist_preset(), kCycle);
    std::size_t inner = 0;
    for (const auto& at : s.placements) {
        CHECK(at.distance_m > 0.0);
        CHECK(at.distance_m <= c.area_radius_m);
        CHECK(std::hypot(at.x_m, at.y_m) == doctest::Approx(at.distance_m));
        inner += at.distance_m <= c.area_radius_m / 2 ? 1 : 0;
    }
    const double fraction = static_cast<double>(inner) / 10'000.0;
    CHECK(fraction == doctest::Approx(0.25).epsilon(0.02 / 0.25));
}

TEST_CASE("scenario JSON round trip") {
    ScenarioConfig c;
    c.num_nodes = 5;
    c.rng_seed = 99;
    const auto s = generate_scenario(c, mnist_preset(), CycleSpec{45.5, Mode::TaskParallelization});
    const auto j = to_json(s);
    CHECK(j["generator"] == "mt19937_64");
    CHECK(j["nodes"][0].contains("cpu_frequency_hz"));
    CHECK(j["nodes"][0].contains("channel_gain_linear"));
    const auto back = scenario_from_json(nlohmann::json::parse(j.dump()));
    CHECK(to_json(back).dump() == j.dump());
    CHECK(back.nodes[3].channel_gain == s.nodes[3].channel_gain);
    CHECK(back.provenance.config_hash == s.provenance.config_hash);
    CHECK(back.provenance.seed == 99);
}

TEST_CASE("config hash ignores the seed only") {
    ScenarioConfig a;
    ScenarioConfig b;
    b.rng_seed = 1234;
    CHECK(config_hash(a) == config_hash(b));
    b.pathloss_exponent = 0.21;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("configuration errors") {
    ScenarioConfig c;
    c.cpu_profiles = {{2.4e9, 0.5}, {7e8, 0.4}};
    CHECK_THROWS_AS(generate_scenario(c, mnist_preset(), kCycle), ConfigError);
    c = ScenarioConfig{};
    c.num_nodes = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ScenarioConfig{};
    c.area_radius_m = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    CHECK_THROWS_AS(scenario_config_from_json(nlohmann::json{{"num_nodez", 3}}), ConfigError);
    CHECK_THROWS_AS(scenario_config_from_json(nlohmann::json{{"num_nodes", "three"}}), ConfigError);
    CHECK_THROWS_AS(learning_task_from_json(nlohmann::json{{"preset", "cifar"}}), ConfigError);
    CHECK_THROWS_AS(cycle_spec_from_json(nlohmann::json{{"mode", "parallel"}}), ConfigError);
    CHECK_THROWS_AS(scenario_from_json(nlohmann::json{{"format", "other"}}), ConfigError);

    const auto task = learning_task_from_json(nlohmann::json{{"preset", "mnist"}, {"total_samples", 1000}});
    CHECK(task.total_samples == 1000);
    CHECK(task.features == 784);
}
