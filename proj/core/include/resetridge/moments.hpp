#pragma once

#include <string>

#include "resetridge/dynamics.hpp"
#include "resetridge/reset_law.hpp"
#include "resetridge/spectral.hpp"

namespace resetridge {

// Stationary second moments of the reset process, split into the within-
// interval diffusion part and the reset-timing part. Everything is stored in
// the eigenbasis of H; `total` carries the original-basis version.
//
// Poisson resetting at rate r solves the Lyapunov balance
//   (H + r/2 I) Sigma + Sigma (H + r/2 I) = r m_inf m_infᵀ + Sigma_noise
// for the centered second moment, which in the eigenbasis splits entrywise:
//   sgd_ij    = Sigmã_ij / (mu_i + mu_j + r)
//   timing_ij = r b̃_i b̃_j / ((mu_i+r)(mu_j+r)(mu_i+mu_j+r)).
//
// A general renewal law S produces the same split through its filter:
//   sgd_ij    = Sigmã_ij g_S(mu_i+mu_j) / (mu_i+mu_j)   (E[A] limit at 0)
//   timing_ij = w̃*_i w̃*_j [h_S(mu_i+mu_j) - h_S(mu_i) h_S(mu_j)].
struct CovarianceDecomposition {
    Matrix sgd_tilde;
    Matrix timing_tilde;
    Matrix total_tilde;  // sgd + timing, exact by construction
    Matrix total;        // V total_tilde Vᵀ
    std::string law_name;
};

// Stationary mean under Poisson resetting, original coordinates; identical to
// the ridge solution with lambda = r.
Vector poisson_stationary_mean(const SpectralModel& m, double r);

CovarianceDecomposition poisson_covariance(const SpectralModel& m, double r,
                                           const NoiseModel& noise);

// Max-norm residual of the Lyapunov balance for a claimed stationary
// (mean, covariance) pair, evaluated in original coordinates.
double lyapunov_residual(const SpectralModel& m, double r, const NoiseModel& noise,
                         const CovarianceDecomposition& cov, const Vector& mean);

CovarianceDecomposition renewal_covariance(const SpectralModel& m, const ResetLaw& law,
                                           const NoiseModel& noise);

// Per-mode signal-to-noise of the stationary reset variance against the
// diffusion variance: r b̃_i^2 / ((mu_i+r)^2 Sigmã_ii). Returns +infinity
// when the diffusion variance of that mode is zero.
double snr_ratio(const SpectralModel& m, double r, const NoiseModel& noise, int mode);

}  // namespace resetridge
