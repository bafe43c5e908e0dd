// Companion-matrix root extraction for the expanded polynomial form. Only
// used to cross-check the rational-form root search.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>

#include "mel/allocator.hpp"

namespace mel {

namespace {

std::pair<double, double> horner_with_derivative(std::span<const double> coeffs, double x) {
    double value = 0.0;
    double deriv = 0.0;
    for (double c : coeffs) {
        deriv = deriv * x + value;
        value = value * x + c;
    }
    return {value, deriv};
}

}  // namespace

std::optional<double> nonnegative_real_root(std::span<const double> coeffs) {
    if (coeffs.size() < 2 || coeffs.front() == 0.0) {
        return std::nullopt;
    }
    const auto degree = static_cast<Eigen::Index>(coeffs.size() - 1);
    const double lead = coeffs.front();

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
    for (Eigen::Index j = 0; j < degree; ++j) {
        companion(0, j) = -coeffs[static_cast<std::size_t>(j) + 1] / lead;
    }
    for (Eigen::Index i = 1; i < degree; ++i) {
        companion(i, i - 1) = 1.0;
    }

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        return std::nullopt;
    }

    bool found = false;
    double best = 0.0;
    for (Eigen::Index i = 0; i < degree; ++i) {
        const std::complex<double> z = solver.eigenvalues()[i];
        if (std::abs(z.imag()) > 1e-7 * std::max(1.0, std::abs(z))) {
            continue;
        }
        if (!found || z.real() > best) {
            best = z.real();
            found = true;
        }
    }
    if (!found) {
        return std::nullopt;
    }

    // a few Newton steps on the polynomial itself to clean up eigenvalue error
    double residual = std::abs(horner_with_derivative(coeffs, best).first);
    for (int i = 0; i < 8 && residual > 0.0; ++i) {
        const auto [value, deriv] = horner_with_derivative(coeffs, best);
        if (deriv == 0.0) {
            break;
        }
        const double candidate = best - value / deriv;
        const double candidate_residual = std::abs(horner_with_derivative(coeffs, candidate).first);
        if (!(candidate_residual < residual)) {
            break;
        }
        best = candidate;
        residual = candidate_residual;
    }

    if (best < 0.0) {
        return std::nullopt;
    }
    return best;
}

}  // namespace mel
