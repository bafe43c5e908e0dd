#include <cmath>

#include "doctest.h"
#include "mel/allocator.hpp"
#include "support.hpp"

using namespace mel;

namespace {

double horner(const std::vector<double>& coeffs, double x) {
    double v = 0.0;
    for (double c : coeffs) {
        v = v * x + c;
    }
    return v;
}

}  // namespace

TEST_CASE("polynomial_coefficients: single learner") {
    const std::vector<double> a{10}, b{1};
    const auto coeffs = polynomial_coefficients(a, b, 2.0);
    CHECK(coeffs == std::vector<double>{2, -8});
    const auto root = nonnegative_real_root(coeffs);
    REQUIRE(root);
    CHECK(*root == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("polynomial_coefficients: equal poles") {
    const std::vector<double> a{12, 6}, b{1, 1};
    const auto coeffs = polynomial_coefficients(a, b, 4.0);
    CHECK(coeffs == std::vector<double>{4, -10, -14});
    const auto root = nonnegative_real_root(coeffs);
    REQUIRE(root);
    CHECK(*root == doctest::Approx(3.5).epsilon(1e-12));
    // the other root is the pole at -1
    CHECK(horner(coeffs, -1.0) == doctest::Approx(0.0));
}

TEST_CASE("polynomial_coefficients: zero numerators leave only the poles") {
    const std::vector<double> a{0, 0, 0}, b{1, 2, 0.5};
    const auto coeffs = polynomial_coefficients(a, b, 3.0);
    // 3 (t+1)(t+2)(t+0.5) = 3t^3 + 10.5t^2 + 10.5t + 3
    CHECK(coeffs == std::vector<double>{3, 10.5, 10.5, 3});
    CHECK_FALSE(nonnegative_real_root(coeffs));
}

TEST_CASE("polynomial_coefficients: matches the cleared rational form pointwise") {
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        const auto k = static_cast<std::size_t>(1 + rng.below(8));
        std::vector<double> a(k), b(k);
        for (std::size_t j = 0; j < k; ++j) {
            a[j] = test::uniform(rng, 0.0, 100.0);
            b[j] = test::uniform(rng, 0.01, 5.0);
        }
        const double d = test::uniform(rng, 1.0, 50.0);
        const auto coeffs = polynomial_coefficients(a, b, d);
        REQUIRE(coeffs.size() == k + 1);
        CHECK(coeffs.front() == d);

        const double x = test::uniform(rng, 0.0, 10.0);
        double prod = 1.0;
        double g = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            prod *= x + b[j];
            g += a[j] / (x + b[j]);
        }
        const double expected = prod * (d - g);
        CHECK(horner(coeffs, x) == doctest::Approx(expected).epsilon(1e-9).scale(prod * d));
    }
}

TEST_CASE("polynomial root agrees with the monotone search for K <= 12") {
    Rng rng(4242);
    int compared = 0;
    for (std::uint64_t seed = 0; compared < 200; ++seed) {
        const auto k = static_cast<std::size_t>(1 + rng.below(12));
        const auto p = test::default_problem(rng.next(), k, test::uniform(rng, 5.0, 120.0), 1000 + rng.below(59'001));
        const auto terms = solver_terms(p);
        const auto tau = relaxed_tau(terms, p.total_samples);
        if (!tau || *tau <= 0.0) {
            continue;
        }
        const auto root = nonnegative_real_root(polynomial_coefficients(terms, static_cast<double>(p.total_samples)));
        REQUIRE(root);
        CHECK(std::abs(*root - *tau) <= 1e-6 * *tau);
        ++compared;
    }
}

TEST_CASE("nonnegative_real_root: degenerate input") {
    CHECK_FALSE(nonnegative_real_root(std::vector<double>{5.0}));
    CHECK_FALSE(nonnegative_real_root(std::vector<double>{0.0, 1.0}));
    // t^2 + 1 has no real roots
    CHECK_FALSE(nonnegative_real_root(std::vector<double>{1.0, 0.0, 1.0}));
}
