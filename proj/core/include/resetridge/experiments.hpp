#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "resetridge/filters.hpp"
#include "resetridge/rng.hpp"
#include "resetridge/spectral.hpp"

namespace resetridge {

// ── synthetic designs ────────────────────────────────────────────────────────

// Gaussian covariates with population covariance
//   Sigma = I + (l1 - 1) u1 u1ᵀ + (l2 - 1) u2 u2ᵀ,
// u1 ⟂ u2 random orthonormal per trial, signal beta0 = c1 u1 + c2 u2.
// The feature dimension is round(gamma * n_train).
struct SpikedConfig {
    std::array<double, 2> spike_strengths{12.0, 5.0};
    std::array<double, 2> spike_coeffs{2.0, 1.0};
    int n_train = 80;
    int n_val = 800;
    int n_test = 5000;
    double sigma_eta = 1.0;
    std::vector<double> gamma_grid;    // aspect ratios d/n_train; default 0.25..3.75
    int trials = 200;
    std::vector<double> tuning_grid;   // default 180 log-spaced in [1e-3, 1e2]
    std::uint64_t base_seed = 42;

    static SpikedConfig defaults();
};

// Equicorrelated blocks: one 6-wide signal block (correlation rho_sig) and
// n_blocks nuisance blocks of width 8 (correlation rho_nui); all cross-block
// correlations rho_cross; unit variances. Signal lives on the first block.
struct BlockConfig {
    int signal_width = 6;
    int nuisance_width = 8;
    double rho_sig = 0.80;
    double rho_nui = 0.45;
    double rho_cross = 0.02;
    std::vector<double> signal_coeffs{1.0, 0.9, 0.8, 0.7, 0.6, 0.5};
    int n_train = 60;
    int n_val = 180;
    int n_test = 1200;
    double sigma_eta = 2.0;
    std::vector<int> block_grid;       // values of n_blocks; default 0..12 step 2
    int trials = 60;
    std::vector<double> tuning_grid;   // default 60 log-spaced in [1e-3, 1e2]
    std::uint64_t base_seed = 42;

    static BlockConfig defaults();
};

struct DataTriple {
    DesignData train, val, test;
};

DataTriple gen_spiked(const SpikedConfig& cfg, double gamma, Rng& rng);
DataTriple gen_block(const BlockConfig& cfg, int n_blocks, Rng& rng);

// Population covariance of the block design (exposed for verification).
Matrix block_covariance(const BlockConfig& cfg, int n_blocks);

// ── Marchenko–Pastur reference ───────────────────────────────────────────────

// Bulk density of eigenvalues of XᵀX/n for isotropic data with aspect ratio
// gamma: support [(1-sqrt(gamma))^2, (1+sqrt(gamma))^2], plus an atom of mass
// max(0, 1-1/gamma) at zero when gamma > 1.
struct MarchenkoPastur {
    double edge_lo = 0.0;
    double edge_hi = 0.0;
    double mass_at_zero = 0.0;
    std::vector<double> density;  // evaluated on the provided grid
};

MarchenkoPastur marchenko_pastur(double gamma, const std::vector<double>& lambda_grid);

// ── tuned estimator families ─────────────────────────────────────────────────

// A one-parameter family swept over the tuning grid. The grid value g maps to
//   ridge          lambda = g
//   gamma renewal  rate 1/mean: mean interval tau = 1/g (shape fixed)
//   periodic       period T = 1/g
//   sharp cutoff   threshold c = g
struct FilterFamily {
    enum class Kind { Ridge, GammaRenewal, Periodic, SharpCutoff };
    Kind kind = Kind::Ridge;
    double shape = 1.0;  // gamma renewal only
    std::string label;

    FilterSpec instantiate(double grid_value) const;

    // names: "ridge", "exponential"/"poisson", "erlang-<k>", "periodic", "cutoff"
    static FilterFamily parse(const std::string& name);
};

// Eigenvalues used for filter evaluation are mu * hessian_scale. The raw
// convention (scale 1) treats the unnormalized XᵀX curvature as the clock of
// the dynamics; scale 1/n_train matches the per-sample loss convention.
struct TuneResult {
    double best_param = 0.0;  // grid value
    double best_val_mse = 0.0;
    int best_index = -1;
};

TuneResult tune_on_validation(const DesignData& train, const DesignData& val,
                              const FilterFamily& family, const std::vector<double>& grid,
                              double hessian_scale = 1.0);

// ── sweeps ───────────────────────────────────────────────────────────────────

enum class HessianConvention { Unnormalized, Normalized };

struct MethodSummary {
    std::string method;
    double mean_mse = 0.0;
    double gain_pct = 0.0;     // paired relative gain vs ridge, percent
    double se_gain_pct = 0.0;  // Monte Carlo standard error of the mean gain
};

struct TrialRecord {
    int trial = 0;
    std::string method;
    double test_mse = 0.0;
    double best_param = 0.0;
};

struct SweepPoint {
    double sweep_value = 0.0;  // gamma or n_blocks
    int trials = 0;
    std::vector<MethodSummary> methods;
    std::vector<TrialRecord> detail;  // filled when keep_detail
};

struct SweepResult {
    std::string experiment;  // "spiked" | "block"
    std::vector<SweepPoint> points;
    std::uint64_t base_seed = 0;
    std::string config_hash;
};

// Runs the full sweep. methods must contain "ridge" (the paired baseline).
// Per-trial data is seeded with base_seed + trial_index; methods within a
// trial share the same splits and grid, so gains are paired per trial.
SweepResult run_spiked_sweep(const SpikedConfig& cfg, const std::vector<std::string>& methods,
                             HessianConvention convention = HessianConvention::Unnormalized,
                             int threads = 0, bool keep_detail = false);

SweepResult run_block_sweep(const BlockConfig& cfg, const std::vector<std::string>& methods,
                            HessianConvention convention = HessianConvention::Unnormalized,
                            int threads = 0, bool keep_detail = false);

nlohmann::json to_json(const SweepResult& r);

}  // namespace resetridge
