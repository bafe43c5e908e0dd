/**
 * @file allocator.hpp
 * @brief Batch allocation across learners: maximize the number of local
 *        iterations tau such that every learner finishes within the clock.
 *
 * The integer problem is
 *
 *     max tau  s.t.  c2_k*tau*d_k + c1_k*d_k + c0_k <= T  for all k,
 *                    sum_k d_k = d,  tau, d_k non-negative integers.
 *
 * Relaxing integrality and tightening each time constraint gives
 * d_k = a_k / (tau + b_k) with a_k = (T - c0_k)/c2_k and b_k = c1_k/c2_k, so the
 * relaxed optimum is the unique tau >= 0 solving
 *
 *     g(tau) = sum_k a_k / (tau + b_k) = d.
 *
 * g is strictly decreasing and convex on tau >= 0 once learners with
 * a_k <= 0 are removed, so a safeguarded Newton/bisection search finds the
 * root reliably. Clearing denominators turns the same equation into a
 * degree-K polynomial; that form is kept as an independent cross-check.
 *
 * Three schemes produce an integer Allocation:
 *  - Analytical: floor the relaxed root, then step tau down until the
 *    per-learner integer capacities cover d, then water-fill.
 *  - ETA: equal split of the data, largest tau every learner can afford.
 *  - Oracle: exact integer optimum by binary search on tau.
 *
 * A learner given zero samples sits the cycle out; its time constraint is
 * not enforced and its reported time is 0.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mel/model.hpp"

namespace mel {

struct ProblemInstance {
    std::vector<NodeCoefficients> coeffs;
    double clock_s = 0;
    std::uint64_t total_samples = 0;

    void validate() const;
    [[nodiscard]] std::size_t size() const { return coeffs.size(); }
};

/// Builds the coefficient list for a set of learners sharing one task and link.
ProblemInstance make_problem(const LearningTask& task, std::span<const EdgeNode> nodes,
                             const LinkParams& link, const CycleSpec& cycle);

struct SolverTerms {
    std::vector<double> a;            ///< (T - c0)/c2, per learner
    std::vector<double> b;            ///< c1/c2, per learner
    std::vector<std::size_t> active;  ///< learners with a > 0, ascending

    [[nodiscard]] bool is_active(std::size_t k) const;
};

SolverTerms solver_terms(const ProblemInstance& p);

/// g(tau) = sum over active learners of a_k/(tau + b_k).
double rational_sum(const SolverTerms& terms, double tau);

/**
 * Unique tau >= 0 with g(tau) = d. Returns nullopt when g(0) < d (no
 * non-negative tau fits the data in the clock) or the active set is empty.
 */
std::optional<double> relaxed_tau(const SolverTerms& terms, std::uint64_t d);

/// (T - c0)/(tau*c2 + c1) for active learners, 0 for the rest.
std::vector<double> relaxed_batches(const SolverTerms& terms, const ProblemInstance& p, double tau);

struct RelaxedSolution {
    double tau = 0;
    std::vector<double> batches;
    double residual = 0;  ///< g(tau) - d
};

std::optional<RelaxedSolution> solve_relaxed(const ProblemInstance& p);

/**
 * Monomial coefficients, highest degree first, of
 *     d*prod_k (tau + b_k) - sum_k a_k * prod_{l != k} (tau + b_l)
 * taken over all entries of @p a / @p b. The leading coefficient is d.
 */
std::vector<double> polynomial_coefficients(std::span<const double> a, std::span<const double> b,
                                            double d);

/// Same polynomial restricted to the active learners.
std::vector<double> polynomial_coefficients(const SolverTerms& terms, double d);

/**
 * Largest real root of a polynomial (coefficients highest degree first),
 * via the eigenvalues of its companion matrix, if that root is >= 0.
 */
std::optional<double> nonnegative_real_root(std::span<const double> coeffs);

/**
 * Largest integer batch a learner can take at @p tau without exceeding the
 * clock, capped at @p limit. Zero when even one sample does not fit.
 */
std::uint64_t batch_capacity(const NodeCoefficients& coeffs, double clock_s, std::uint64_t tau,
                             std::uint64_t limit);

enum class Scheme { Analytical, ETA, Oracle };

std::string_view to_string(Scheme scheme);
/// Accepts "analytical", "eta", "oracle".
Scheme parse_scheme(std::string_view text);

struct Allocation {
    std::uint64_t tau = 0;
    std::vector<std::uint64_t> batches;
    bool feasible = false;
    Scheme scheme = Scheme::Analytical;
    std::vector<double> node_time_s;  ///< 0 for idle learners
};

Allocation solve_analytical(const ProblemInstance& p);
Allocation solve_eta(const ProblemInstance& p);
Allocation solve_oracle(const ProblemInstance& p);
Allocation solve(const ProblemInstance& p, Scheme scheme);

struct Violation {
    enum class Kind { BatchSum, NodeTime };
    Kind kind = Kind::BatchSum;
    std::size_t node = 0;  ///< meaningful for NodeTime only
    double margin = 0;     ///< amount by which the constraint is exceeded (signed for BatchSum)

    [[nodiscard]] std::string describe() const;
};

struct FeasibilityReport {
    bool feasible = false;
    bool tau_zero = false;  ///< constraints hold but no local iteration fits
    std::vector<Violation> violations;

    explicit operator bool() const { return feasible; }
};

/// Checks an allocation against every constraint of the integer problem.
FeasibilityReport check_feasible(const ProblemInstance& p, const Allocation& alloc);

}  // namespace mel
