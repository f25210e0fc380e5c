#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resetridge/reset_law.hpp"
#include "resetridge/rng.hpp"
#include "resetridge/spectral.hpp"

namespace resetridge {

// Diffusion covariance of the within-interval dynamics
//
//   dw = (b - H w) dt + sqrt(Sigma) dW,
//
// expressed in the eigenbasis of H. The matrix must be symmetric PSD.
struct NoiseModel {
    Matrix sigma_tilde;  // d x d covariance in eigen-coordinates
    bool isotropic = false;
    double level = 0.0;  // per-coordinate variance when isotropic

    static NoiseModel zero(int d);
    static NoiseModel make_isotropic(int d, double level);
    static NoiseModel from_matrix(Matrix sigma_tilde);

    int dim() const { return static_cast<int>(sigma_tilde.rows()); }
    bool is_zero() const;
    bool is_diagonal() const;
};

// Noiseless gradient-flow state started from 0, eigen-coordinates:
// betã_i(t) = (1 - e^{-mu_i t}) w̃*_i.
Vector gradient_flow_state(const SpectralModel& m, double t);

// Mean of the Poisson-reset process at time t (reset rate r), eigenbasis:
// m̃_i(t) = e^{-(mu_i+r)t} m0_i + (1 - e^{-(mu_i+r)t}) b̃_i/(mu_i+r).
Vector mean_transient(const SpectralModel& m, double r, double t, const Vector& m0_tilde);

// One draw of the within-interval state at age a after a reset to 0,
// eigen-coordinates. Mean is the gradient-flow state; covariance is
// C̃(a)_ij = Sigmã_ij (1 - e^{-(mu_i+mu_j)a}) / (mu_i+mu_j), with the
// continuous limit a Sigmã_ij when mu_i + mu_j = 0. General covariances go
// through a symmetric square root; diagonal ones sample coordinatewise.
Vector ou_conditional_sample(const SpectralModel& m, const NoiseModel& noise, double age,
                             Rng& rng);

// Stationary snapshot: equilibrium age drawn from the law, then the
// conditional state at that age.
Vector equilibrium_snapshot(const SpectralModel& m, const ResetLaw& law,
                            const NoiseModel& noise, Rng& rng);

// Piecewise-exact simulation of the reset process. Between reset epochs the
// state advances by exact OU conditional transitions (no time-discretization
// error); resets to 0 happen at the sampled epochs themselves, not rounded to
// the grid. states rows are the grid times, original coordinates.
struct Trajectory {
    std::vector<double> times;
    Matrix states;                    // (#times) x d
    std::vector<double> reset_times;  // exact epochs in (0, horizon]
};

Trajectory simulate_trajectory(const SpectralModel& m, const ResetLaw& law,
                               const NoiseModel& noise, double horizon, double dt,
                               std::uint64_t seed);

// A batch of independent stationary snapshots (eigen-coordinates, one per
// row). Draws are chunked deterministically: chunk c uses seed base_seed + c,
// so the batch is reproducible for any thread count.
struct SnapshotBatch {
    Matrix samples;  // m x d
    std::uint64_t base_seed = 0;
    std::string law_name;
    double elapsed_seconds = 0.0;

    int count() const { return static_cast<int>(samples.rows()); }
};

SnapshotBatch sample_snapshot_batch(const SpectralModel& m, const ResetLaw& law,
                                    const NoiseModel& noise, int count,
                                    std::uint64_t base_seed, int threads = 0);

// Sample mean / unbiased covariance / standard error of the mean.
struct EmpiricalMoments {
    Vector mean;
    Matrix covariance;
    Vector se_mean;  // sqrt(diag(covariance) / m)
};

EmpiricalMoments empirical_moments(const Matrix& samples);

}  // namespace resetridge
