#include "mel/model.hpp"

#include <cmath>

namespace mel {

namespace {

void require(bool condition, const char* what) {
    if (!condition) {
        throw ConfigError(what);
    }
}

bool finite_nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }
bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::TaskParallelization:
            return "parallel";
        case Mode::DistributedDatasets:
            return "distributed";
    }
    return "unknown";
}

Mode parse_mode(std::string_view text) {
    if (text == "parallel" || text == "TaskParallelization") {
        return Mode::TaskParallelization;
    }
    if (text == "distributed" || text == "DistributedDatasets") {
        return Mode::DistributedDatasets;
    }
    throw ConfigError("unknown mode '" + std::string(text) + "' (expected parallel|distributed)");
}

void LearningTask::validate() const {
    require(finite_nonnegative(features) && features >= 1.0, "task: features must be >= 1");
    require(finite_nonnegative(data_precision_bits), "task: data precision must be >= 0");
    require(finite_nonnegative(model_precision_bits), "task: model precision must be >= 0");
    require(finite_nonnegative(per_sample_model_coeffs), "task: S_d must be >= 0");
    require(finite_nonnegative(fixed_model_coeffs), "task: S_m must be >= 0");
    require(finite_nonnegative(model_complexity_flops) && model_complexity_flops >= 1.0,
            "task: model complexity must be >= 1");
    require(total_samples >= 1, "task: total samples must be >= 1");
}

void EdgeNode::validate() const {
    require(finite_positive(cpu_frequency_hz), "node: cpu frequency must be > 0");
    require(finite_positive(tx_power_w), "node: transmit power must be > 0");
    require(finite_positive(channel_gain), "node: channel gain must be > 0");
}

void LinkParams::validate() const {
    require(finite_positive(bandwidth_hz), "link: bandwidth must be > 0");
    require(finite_positive(noise_density_w_per_hz), "link: noise density must be > 0");
}

void NodeCoefficients::validate() const {
    require(finite_positive(c2), "coefficients: c2 must be > 0");
    require(finite_positive(c1), "coefficients: c1 must be > 0");
    require(finite_nonnegative(c0), "coefficients: c0 must be >= 0");
}

void CycleSpec::validate() const { require(finite_positive(clock_s), "cycle: clock must be > 0"); }

double link_rate(const EdgeNode& node, const LinkParams& link) {
    node.validate();
    link.validate();
    const double noise_w = link.noise_density_w_per_hz * link.bandwidth_hz;
    const double snr = node.tx_power_w * node.channel_gain / noise_w;
    // log1p keeps precision for very weak links
    return link.bandwidth_hz * std::log1p(snr) / std::log(2.0);
}

double batch_bits(const LearningTask& task, std::uint64_t d_k) {
    return static_cast<double>(d_k) * task.features * task.data_precision_bits;
}

double model_bits(const LearningTask& task, std::uint64_t d_k) {
    return task.model_precision_bits *
           (static_cast<double>(d_k) * task.per_sample_model_coeffs + task.fixed_model_coeffs);
}

double per_sample_payload_bits(const LearningTask& task, Mode mode) {
    const double model_part = 2.0 * task.model_precision_bits * task.per_sample_model_coeffs;
    return mode == Mode::TaskParallelization ? task.features * task.data_precision_bits + model_part
                                             : model_part;
}

NodeCoefficients compute_coefficients(const LearningTask& task, const EdgeNode& node,
                                      const LinkParams& link, Mode mode) {
    task.validate();
    const double rate = link_rate(node, link);

    NodeCoefficients coeffs{
        .c2 = task.model_complexity_flops / node.cpu_frequency_hz,
        .c1 = per_sample_payload_bits(task, mode) / rate,
        .c0 = 2.0 * task.model_precision_bits * task.fixed_model_coeffs / rate,
    };
    if (!(coeffs.c1 > 0.0)) {
        throw ConfigError(mode == Mode::DistributedDatasets
                              ? "distributed-datasets mode needs S_d > 0 and P_m > 0 (c1 would be 0)"
                              : "per-sample payload is zero (c1 would be 0)");
    }
    coeffs.validate();
    return coeffs;
}

double cycle_time(const NodeCoefficients& coeffs, std::uint64_t tau, std::uint64_t d_k) {
    const auto t = static_cast<double>(tau);
    const auto d = static_cast<double>(d_k);
    return coeffs.c2 * t * d + coeffs.c1 * d + coeffs.c0;
}

TimeBreakdown time_breakdown(const LearningTask& task, const EdgeNode& node,
                             const LinkParams& link, Mode mode, std::uint64_t tau,
                             std::uint64_t d_k) {
    const double rate = link_rate(node, link);
    const double sent_bits =
        (mode == Mode::TaskParallelization ? batch_bits(task, d_k) : 0.0) + model_bits(task, d_k);
    const double operations = static_cast<double>(d_k) * task.model_complexity_flops;
    return TimeBreakdown{
        .send_s = sent_bits / rate,
        .compute_s = static_cast<double>(tau) * operations / node.cpu_frequency_hz,
        .return_s = model_bits(task, d_k) / rate,
    };
}

}  // namespace mel
