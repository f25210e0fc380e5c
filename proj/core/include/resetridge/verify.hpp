#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resetridge/spectral.hpp"

namespace resetridge {

// Result of one structural identity check. `metric` is the worst observed
// discrepancy in the units of `tol`; `warn` flags a pass obtained under
// reduced Monte Carlo resolution.
struct CheckResult {
    std::string name;
    bool pass = false;
    bool warn = false;
    double metric = 0.0;
    double tol = 0.0;
    std::string note;
};

// Cross-module identities executed at runtime:
//   ridge_reset_identity    stationary mean under Poisson resetting equals the
//                           ridge solve (H + rI)^{-1} b
//   laplace_average         the same mean equals r ∫ e^{-ra} beta(a) da with
//                           beta the noiseless flow path (trapezoid quadrature)
//   lyapunov_balance        stationary covariance satisfies its Lyapunov
//                           equation in original coordinates
//   renewal_poisson_match   the general renewal formulas restricted to the
//                           exponential law reproduce the Poisson formulas
//   mc_moments              sampled stationary snapshots match the closed-form
//                           mean and covariance within 3 standard errors
std::vector<CheckResult> run_identity_suite(std::uint64_t seed, int mc_samples = 100000,
                                            int threads = 0);

// Quadrature side of the laplace_average identity, exposed for reuse:
// evaluates r ∫_0^∞ e^{-ra} beta(a) da with the integrand truncated where
// e^{-ra} <= 1e-12 and a trapezoid step chosen for ~1e-8 absolute accuracy.
Vector laplace_average_quadrature(const SpectralModel& m, double r);

}  // namespace resetridge
