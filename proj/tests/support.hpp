// Test-only helpers: instance generators and a brute-force reference solver
// that shares no code path with the library's allocators.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "mel/allocator.hpp"
#include "mel/random.hpp"
#include "mel/scenarios.hpp"

namespace mel::test {

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

inline double log_uniform(Rng& rng, double lo, double hi) {
    return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

/// Default environment with the MNIST task, K learners, clock T, d samples.
inline ProblemInstance default_problem(std::uint64_t seed, std::size_t k, double clock_s, std::uint64_t d,
                                       Mode mode = Mode::TaskParallelization) {
    ScenarioConfig config;
    config.num_nodes = k;
    config.rng_seed = seed;
    auto task = mnist_preset();
    task.total_samples = d;
    if (mode == Mode::DistributedDatasets) {
        task.per_sample_model_coeffs = 10;
    }
    const auto s = generate_scenario(config, task, CycleSpec{clock_s, mode});
    return make_problem(s.task, s.nodes, s.link, s.cycle);
}

/// K in 1..20, T in [5, 120] s, d in [1e3, 6e4], default radio and CPU profiles.
inline ProblemInstance acceptance_instance(std::uint64_t seed) {
    Rng rng(splitmix64(seed ^ 0xacce55ULL));
    const auto k = static_cast<std::size_t>(1 + rng.below(20));
    const double clock_s = uniform(rng, 5.0, 120.0);
    const std::uint64_t d = 1000 + rng.below(59'001);
    return default_problem(rng.next(), k, clock_s, d);
}

/// Coefficients drawn over several decades; some learners cannot even
/// exchange the model within the clock.
inline ProblemInstance wide_random_problem(Rng& rng, std::size_t k, std::uint64_t d) {
    ProblemInstance p;
    p.clock_s = uniform(rng, 1.0, 100.0);
    p.total_samples = d;
    for (std::size_t i = 0; i < k; ++i) {
        NodeCoefficients c;
        c.c2 = log_uniform(rng, 1e-5, 1e-1);
        c.c1 = log_uniform(rng, 1e-6, 1e-1);
        c.c0 = rng.uniform01() < 0.1 ? uniform(rng, p.clock_s, 2 * p.clock_s) : uniform(rng, 0.0, 0.5 * p.clock_s);
        p.coeffs.push_back(c);
    }
    return p;
}

/// Largest tau in [0, cap] with t <= T by linear scan, or nullopt if tau = 0 fails.
inline std::optional<std::uint64_t> scan_max_tau(const NodeCoefficients& c, double clock_s, std::uint64_t d_k,
                                                 std::uint64_t cap) {
    auto time = [&](std::uint64_t tau) {
        return c.c2 * static_cast<double>(tau) * static_cast<double>(d_k) + c.c1 * static_cast<double>(d_k) + c.c0;
    };
    if (time(0) > clock_s) {
        return std::nullopt;
    }
    std::uint64_t tau = 0;
    while (tau < cap && time(tau + 1) <= clock_s) {
        ++tau;
    }
    return tau;
}

/**
 * Exact integer optimum by enumerating every split of d over K learners.
 * Learners given zero samples are idle. Returns 0 when no split reaches tau >= 1.
 */
inline std::uint64_t brute_force_tau(const ProblemInstance& p, std::uint64_t tau_cap = 10'000) {
    const std::size_t k = p.size();
    std::vector<std::uint64_t> split(k, 0);
    std::uint64_t best = 0;

    auto evaluate = [&] {
        std::uint64_t tau = tau_cap;
        for (std::size_t i = 0; i < k; ++i) {
            if (split[i] == 0) {
                continue;
            }
            const auto t = scan_max_tau(p.coeffs[i], p.clock_s, split[i], tau_cap);
            if (!t) {
                return;
            }
            tau = std::min(tau, *t);
        }
        best = std::max(best, tau);
    };

    auto recurse = [&](auto&& self, std::size_t i, std::uint64_t left) -> void {
        if (i + 1 == k) {
            split[i] = left;
            evaluate();
            return;
        }
        for (std::uint64_t v = 0; v <= left; ++v) {
            split[i] = v;
            self(self, i + 1, left - v);
        }
    };
    recurse(recurse, 0, p.total_samples);
    return best;
}

}  // namespace mel::test
