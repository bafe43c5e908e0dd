/**
 * @file random.hpp
 * @brief Portable, seedable randomness for scenario generation.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. The standard distributions are not, so every draw used by this
 * project goes through the conversions below:
 *
 *  - uniform01():    (next() >> 11) * 2^-53, a double in [0, 1)
 *  - below(n):       rejection sampling on next() against the largest
 *                    multiple of n, then next() % n
 *  - shuffle(v):     Fisher-Yates from the back, swapping v[i] with
 *                    v[below(i + 1)] for i = size-1 .. 1
 *
 * Seeds for individual sweep runs come from mix_seed(), a splitmix64 chain.
 */
#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace mel {

inline constexpr std::string_view kGeneratorName = "mt19937_64";

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform01();
    std::uint64_t below(std::uint64_t n);

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// seed = splitmix64(splitmix64(splitmix64(base) ^ value_index) ^ repetition)
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t value_index, std::uint64_t repetition);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace mel
