/**
 * @file model.hpp
 * @brief Learner time model: link rate, payload sizes and the per-learner
 *        quadratic time coefficients.
 *
 * A learner k that receives d_k samples and runs tau local iterations needs
 *
 *     t_k = c2 * tau * d_k + c1 * d_k + c0
 *
 * seconds to receive its batch and the global model, train, and send its
 * local model back. The three coefficients are derived from the learning
 * task, the learner's processor and its wireless link.
 *
 * Units are SI throughout: seconds, bits, bits/s, watts, Hz.
 */
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mel {

/// Raised for any input that violates a domain invariant.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// How training data reaches the learners.
enum class Mode {
    TaskParallelization,  ///< orchestrator ships batch + model every cycle
    DistributedDatasets,  ///< data already at the learners; only the model moves
};

std::string_view to_string(Mode mode);
/// Accepts "parallel" / "distributed" (and the full enumerator names).
Mode parse_mode(std::string_view text);

/// Dataset and model constants shared by all learners.
struct LearningTask {
    double features = 0;                 ///< F
    double data_precision_bits = 0;      ///< P_d, bits per feature value
    double model_precision_bits = 0;     ///< P_m, bits per model coefficient
    double per_sample_model_coeffs = 0;  ///< S_d
    double fixed_model_coeffs = 0;       ///< S_m
    double model_complexity_flops = 1;   ///< C_m, operations per sample per iteration
    std::uint64_t total_samples = 1;     ///< d

    void validate() const;
};

struct EdgeNode {
    std::string id;
    double cpu_frequency_hz = 0;
    double tx_power_w = 0;
    double channel_gain = 0;  ///< linear power gain

    void validate() const;
};

struct LinkParams {
    double bandwidth_hz = 0;
    double noise_density_w_per_hz = 0;

    void validate() const;
};

struct NodeCoefficients {
    double c2 = 0;  ///< s per (sample * iteration)
    double c1 = 0;  ///< s per sample
    double c0 = 0;  ///< s

    void validate() const;
};

struct CycleSpec {
    double clock_s = 0;  ///< global cycle clock T
    Mode mode = Mode::TaskParallelization;

    void validate() const;
};

/// Shannon rate W*log2(1 + P*h/(N0*W)) in bits/s. Noise power is N0*W.
double link_rate(const EdgeNode& node, const LinkParams& link);

/// Bits needed to ship a batch of d_k samples.
double batch_bits(const LearningTask& task, std::uint64_t d_k);

/// Bits of a learner's local parameter matrix.
double model_bits(const LearningTask& task, std::uint64_t d_k);

/// Bits moved per batch sample over one cycle (both directions).
double per_sample_payload_bits(const LearningTask& task, Mode mode);

/**
 * Quadratic-form coefficients for one learner.
 *
 * Throws ConfigError when the combination would give c1 == 0 (e.g. S_d = 0
 * in DistributedDatasets mode); the solver requires c1 > 0.
 */
NodeCoefficients compute_coefficients(const LearningTask& task, const EdgeNode& node,
                                      const LinkParams& link, Mode mode);

/// t = c2*tau*d_k + c1*d_k + c0
double cycle_time(const NodeCoefficients& coeffs, std::uint64_t tau, std::uint64_t d_k);

/// The three phases of a learner's cycle, evaluated from first principles.
struct TimeBreakdown {
    double send_s = 0;     ///< batch + global model to the learner
    double compute_s = 0;  ///< tau local iterations
    double return_s = 0;   ///< local model back to the orchestrator

    [[nodiscard]] double total() const { return send_s + compute_s + return_s; }
};

TimeBreakdown time_breakdown(const LearningTask& task, const EdgeNode& node,
                             const LinkParams& link, Mode mode, std::uint64_t tau,
                             std::uint64_t d_k);

}  // namespace mel
