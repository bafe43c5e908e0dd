#include "mel/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mel {

namespace {

__extension__ using u128 = unsigned __int128;

// Largest tau the solvers will report; keeps tau exactly representable as a double.
constexpr std::uint64_t kTauCeiling = std::uint64_t{1} << 53;

constexpr double kResidualTolerance = 1e-9;
constexpr double kBracketTolerance = 1e-12;
constexpr int kMaxRootIterations = 300;

std::uint64_t floor_to_tau(double x) {
    if (!(x > 0.0)) {
        return 0;
    }
    if (x >= static_cast<double>(kTauCeiling)) {
        return kTauCeiling;
    }
    return static_cast<std::uint64_t>(std::floor(x));
}

std::vector<std::uint64_t> capacities(const ProblemInstance& p, std::uint64_t tau) {
    std::vector<std::uint64_t> caps(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        caps[k] = batch_capacity(p.coeffs[k], p.clock_s, tau, p.total_samples);
    }
    return caps;
}

// Integer feasibility at a fixed tau: the constraints separate per learner,
// so tau is feasible iff the integer capacities can absorb all d samples.
bool capacities_cover(const ProblemInstance& p, std::uint64_t tau) {
    std::uint64_t total = 0;
    for (const auto& c : p.coeffs) {
        total += batch_capacity(c, p.clock_s, tau, p.total_samples);
        if (total >= p.total_samples) {
            return true;
        }
    }
    return false;
}

/**
 * Proportional share of d by capacity, then the leftover samples one at a
 * time to the learner with the most remaining slack. Ties go to the lowest
 * index. Requires sum(caps) >= d.
 */
std::vector<std::uint64_t> water_fill(const ProblemInstance& p, std::uint64_t tau,
                                      const std::vector<std::uint64_t>& caps) {
    const std::uint64_t d = p.total_samples;
    u128 cap_total = 0;
    for (auto c : caps) {
        cap_total += c;
    }

    std::vector<std::uint64_t> batches(caps.size(), 0);
    std::uint64_t assigned = 0;
    for (std::size_t k = 0; k < caps.size(); ++k) {
        const auto share = static_cast<std::uint64_t>(
            static_cast<u128>(d) * caps[k] / cap_total);
        batches[k] = std::min(caps[k], share);
        assigned += batches[k];
    }

    // Each floored share loses less than one sample, so at most K rounds.
    while (assigned < d) {
        std::size_t best = caps.size();
        double best_slack = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < caps.size(); ++k) {
            if (batches[k] >= caps[k]) {
                continue;
            }
            const double slack = p.clock_s - cycle_time(p.coeffs[k], tau, batches[k] + 1);
            if (best == caps.size() || slack > best_slack) {
                best = k;
                best_slack = slack;
            }
        }
        ++batches[best];
        ++assigned;
    }
    return batches;
}

Allocation make_allocation(const ProblemInstance& p, Scheme scheme, std::uint64_t tau,
                           std::vector<std::uint64_t> batches, bool feasible) {
    Allocation out;
    out.scheme = scheme;
    out.feasible = feasible;
    out.tau = feasible ? tau : 0;
    out.batches = std::move(batches);
    out.node_time_s.resize(p.size(), 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (out.batches[k] > 0) {
            out.node_time_s[k] = cycle_time(p.coeffs[k], out.tau, out.batches[k]);
        }
    }
    return out;
}

Allocation infeasible(const ProblemInstance& p, Scheme scheme) {
    return make_allocation(p, scheme, 0, std::vector<std::uint64_t>(p.size(), 0), false);
}

Allocation allocate_at(const ProblemInstance& p, Scheme scheme, std::uint64_t tau) {
    return make_allocation(p, scheme, tau, water_fill(p, tau, capacities(p, tau)), true);
}

// Largest tau with cycle_time(tau, d_k) <= T, or nullopt if even tau = 0 overruns.
std::optional<std::uint64_t> max_iterations(const NodeCoefficients& c, double clock_s,
                                            std::uint64_t d_k) {
    if (cycle_time(c, 0, d_k) > clock_s) {
        return std::nullopt;
    }
    const double d = static_cast<double>(d_k);
    std::uint64_t tau = floor_to_tau((clock_s - c.c0 - c.c1 * d) / (c.c2 * d));
    while (tau < kTauCeiling && cycle_time(c, tau + 1, d_k) <= clock_s) {
        ++tau;
    }
    while (tau > 0 && cycle_time(c, tau, d_k) > clock_s) {
        --tau;
    }
    return tau;
}

}  // namespace

void ProblemInstance::validate() const {
    if (coeffs.empty()) {
        throw ConfigError("problem: at least one learner is required");
    }
    if (!(std::isfinite(clock_s) && clock_s > 0.0)) {
        throw ConfigError("problem: clock must be > 0");
    }
    if (total_samples < 1) {
        throw ConfigError("problem: total samples must be >= 1");
    }
    for (const auto& c : coeffs) {
        c.validate();
    }
}

ProblemInstance make_problem(const LearningTask& task, std::span<const EdgeNode> nodes,
                             const LinkParams& link, const CycleSpec& cycle) {
    cycle.validate();
    ProblemInstance p;
    p.clock_s = cycle.clock_s;
    p.total_samples = task.total_samples;
    p.coeffs.reserve(nodes.size());
    for (const auto& node : nodes) {
        p.coeffs.push_back(compute_coefficients(task, node, link, cycle.mode));
    }
    p.validate();
    return p;
}

bool SolverTerms::is_active(std::size_t k) const {
    return std::binary_search(active.begin(), active.end(), k);
}

SolverTerms solver_terms(const ProblemInstance& p) {
    p.validate();
    SolverTerms terms;
    terms.a.reserve(p.size());
    terms.b.reserve(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const auto& c = p.coeffs[k];
        const double r0 = c.c0 - p.clock_s;
        terms.a.push_back(-r0 / c.c2);
        terms.b.push_back(c.c1 / c.c2);
        if (terms.a.back() > 0.0) {
            terms.active.push_back(k);
        }
    }
    return terms;
}

double rational_sum(const SolverTerms& terms, double tau) {
    double sum = 0.0;
    for (auto k : terms.active) {
        sum += terms.a[k] / (tau + terms.b[k]);
    }
    return sum;
}

std::optional<double> relaxed_tau(const SolverTerms& terms, std::uint64_t d) {
    if (terms.active.empty() || d == 0) {
        return std::nullopt;
    }
    const double target = static_cast<double>(d);
    const double g0 = rational_sum(terms, 0.0);
    if (g0 < target) {
        return std::nullopt;
    }
    if (g0 == target) {
        return 0.0;
    }

    auto slope = [&](double tau) {
        double s = 0.0;
        for (auto k : terms.active) {
            const double denom = tau + terms.b[k];
            s -= terms.a[k] / (denom * denom);
        }
        return s;
    };

    // g(hi) < sum(a)/hi <= K*max(a)/hi = d
    double a_max = 0.0;
    for (auto k : terms.active) {
        a_max = std::max(a_max, terms.a[k]);
    }
    double lo = 0.0;
    double hi = a_max * static_cast<double>(terms.active.size()) / target;
    while (rational_sum(terms, hi) >= target) {
        hi *= 2.0;
    }

    // g is convex and decreasing: Newton from the left never overshoots in
    // exact arithmetic, but it can crawl when b_k is tiny, so fall back to
    // bisection whenever the bracket stops halving.
    double x = lo;
    double width_two_back = hi - lo;
    double width_one_back = hi - lo;
    for (int iter = 0; iter < kMaxRootIterations; ++iter) {
        const double f = rational_sum(terms, x) - target;
        if (std::abs(f) <= kResidualTolerance * target) {
            // one more Newton step is nearly free and usually lands on the
            // closest double
            const double polished = x - f / slope(x);
            if (polished >= 0.0 && std::abs(rational_sum(terms, polished) - target) < std::abs(f)) {
                return polished;
            }
            return x;
        }
        if (f > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        const double width = hi - lo;
        if (width <= kBracketTolerance * (1.0 + x)) {
            return x;
        }

        double next = x - f / slope(x);
        const bool stalled = width > 0.5 * width_two_back;
        if (!(next > lo && next < hi) || stalled) {
            next = 0.5 * (lo + hi);
        }
        width_two_back = width_one_back;
        width_one_back = width;
        x = next;
    }
    return x;
}

std::vector<double> relaxed_batches(const SolverTerms& terms, const ProblemInstance& p, double tau) {
    std::vector<double> out(p.size(), 0.0);
    for (auto k : terms.active) {
        const auto& c = p.coeffs[k];
        out[k] = (p.clock_s - c.c0) / (tau * c.c2 + c.c1);
    }
    return out;
}

std::optional<RelaxedSolution> solve_relaxed(const ProblemInstance& p) {
    const auto terms = solver_terms(p);
    const auto tau = relaxed_tau(terms, p.total_samples);
    if (!tau) {
        return std::nullopt;
    }
    return RelaxedSolution{
        .tau = *tau,
        .batches = relaxed_batches(terms, p, *tau),
        .residual = rational_sum(terms, *tau) - static_cast<double>(p.total_samples),
    };
}

std::vector<double> polynomial_coefficients(std::span<const double> a, std::span<const double> b,
                                            double d) {
    if (a.size() != b.size()) {
        throw ConfigError("polynomial: a and b must have equal length");
    }
    // Lowest degree first while building. denom = prod(tau + b_l);
    // numer = sum a_k prod_{l != k}(tau + b_l), padded to denom's length.
    std::vector<double> denom{1.0};
    std::vector<double> numer{0.0};
    auto times_linear = [](const std::vector<double>& v, double root_shift) {
        std::vector<double> r(v.size() + 1, 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) {
            r[i] += v[i] * root_shift;
            r[i + 1] += v[i];
        }
        return r;
    };
    for (std::size_t k = 0; k < a.size(); ++k) {
        auto next_numer = times_linear(numer, b[k]);
        for (std::size_t i = 0; i < denom.size(); ++i) {
            next_numer[i] += a[k] * denom[i];
        }
        numer = std::move(next_numer);
        denom = times_linear(denom, b[k]);
    }
    std::vector<double> out(denom.size());
    for (std::size_t i = 0; i < denom.size(); ++i) {
        out[denom.size() - 1 - i] = d * denom[i] - numer[i];
    }
    return out;
}

std::vector<double> polynomial_coefficients(const SolverTerms& terms, double d) {
    std::vector<double> a;
    std::vector<double> b;
    a.reserve(terms.active.size());
    b.reserve(terms.active.size());
    for (auto k : terms.active) {
        a.push_back(terms.a[k]);
        b.push_back(terms.b[k]);
    }
    return polynomial_coefficients(a, b, d);
}

std::uint64_t batch_capacity(const NodeCoefficients& coeffs, double clock_s, std::uint64_t tau,
                             std::uint64_t limit) {
    auto fits = [&](std::uint64_t n) { return cycle_time(coeffs, tau, n) <= clock_s; };
    if (limit == 0 || !fits(1)) {
        return 0;
    }
    if (fits(limit)) {
        return limit;
    }
    // floor of the relaxed bound, then nudged so that it agrees exactly with
    // the floating-point time check used everywhere else
    const double bound = (clock_s - coeffs.c0) / (static_cast<double>(tau) * coeffs.c2 + coeffs.c1);
    std::uint64_t n = 1;
    if (bound >= static_cast<double>(limit)) {
        n = limit - 1;
    } else if (bound > 1.0) {
        n = static_cast<std::uint64_t>(std::floor(bound));
    }
    while (n + 1 < limit && fits(n + 1)) {
        ++n;
    }
    while (n > 1 && !fits(n)) {
        --n;
    }
    return n;
}

std::string_view to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::Analytical:
            return "analytical";
        case Scheme::ETA:
            return "eta";
        case Scheme::Oracle:
            return "oracle";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view text) {
    if (text == "analytical") {
        return Scheme::Analytical;
    }
    if (text == "eta") {
        return Scheme::ETA;
    }
    if (text == "oracle") {
        return Scheme::Oracle;
    }
    throw ConfigError("unknown scheme '" + std::string(text) + "' (expected analytical|eta|oracle)");
}

Allocation solve_analytical(const ProblemInstance& p) {
    const auto terms = solver_terms(p);
    const auto tau_real = relaxed_tau(terms, p.total_samples);
    if (!tau_real) {
        return infeasible(p, Scheme::Analytical);
    }

    std::uint64_t tau = floor_to_tau(*tau_real);
    // A root sitting exactly on an integer can come back a few ulps low.
    while (tau < kTauCeiling && capacities_cover(p, tau + 1)) {
        ++tau;
    }
    // suggest-and-improve: step down until the integer capacities absorb d
    while (tau >= 1 && !capacities_cover(p, tau)) {
        --tau;
    }
    if (tau == 0) {
        return infeasible(p, Scheme::Analytical);
    }
    return allocate_at(p, Scheme::Analytical, tau);
}

Allocation solve_eta(const ProblemInstance& p) {
    p.validate();
    const std::uint64_t k_count = p.size();
    const std::uint64_t base = p.total_samples / k_count;
    const std::uint64_t extra = p.total_samples % k_count;

    std::vector<std::uint64_t> batches(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        batches[k] = base + (k < extra ? 1 : 0);
    }

    std::uint64_t tau = kTauCeiling;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (batches[k] == 0) {
            continue;
        }
        const auto node_tau = max_iterations(p.coeffs[k], p.clock_s, batches[k]);
        if (!node_tau) {
            tau = 0;
            break;
        }
        tau = std::min(tau, *node_tau);
    }
    return make_allocation(p, Scheme::ETA, tau, std::move(batches), tau >= 1);
}

Allocation solve_oracle(const ProblemInstance& p) {
    p.validate();
    if (!capacities_cover(p, 1)) {
        return infeasible(p, Scheme::Oracle);
    }
    // Feasibility is monotone non-increasing in tau: gallop, then bisect.
    std::uint64_t lo = 1;
    std::uint64_t hi = 2;
    while (capacities_cover(p, hi)) {
        lo = hi;
        if (hi >= kTauCeiling) {
            return allocate_at(p, Scheme::Oracle, kTauCeiling);
        }
        hi = std::min(hi * 2, kTauCeiling);
    }
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (capacities_cover(p, mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return allocate_at(p, Scheme::Oracle, lo);
}

Allocation solve(const ProblemInstance& p, Scheme scheme) {
    switch (scheme) {
        case Scheme::Analytical:
            return solve_analytical(p);
        case Scheme::ETA:
            return solve_eta(p);
        case Scheme::Oracle:
            return solve_oracle(p);
    }
    throw ConfigError("unknown scheme");
}

std::string Violation::describe() const {
    switch (kind) {
        case Kind::BatchSum:
            return "batch sum differs from d by " + std::to_string(margin);
        case Kind::NodeTime:
            return "learner " + std::to_string(node) + " exceeds the clock by " +
                   std::to_string(margin) + " s";
    }
    return "unknown violation";
}

FeasibilityReport check_feasible(const ProblemInstance& p, const Allocation& alloc) {
    if (alloc.batches.size() != p.size()) {
        throw ConfigError("allocation size does not match the problem");
    }
    FeasibilityReport report;
    u128 sum = 0;
    for (auto b : alloc.batches) {
        sum += b;
    }
    if (sum != p.total_samples) {
        const double diff = sum > p.total_samples
                                ? static_cast<double>(sum - p.total_samples)
                                : -static_cast<double>(p.total_samples - sum);
        report.violations.push_back({Violation::Kind::BatchSum, 0, diff});
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (alloc.batches[k] == 0) {
            continue;
        }
        const double t = cycle_time(p.coeffs[k], alloc.tau, alloc.batches[k]);
        if (t > p.clock_s) {
            report.violations.push_back({Violation::Kind::NodeTime, k, t - p.clock_s});
        }
    }
    report.feasible = report.violations.empty();
    report.tau_zero = alloc.tau == 0;
    return report;
}

}  // namespace mel
