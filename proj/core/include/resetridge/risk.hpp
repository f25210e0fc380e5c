#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "resetridge/dynamics.hpp"
#include "resetridge/reset_law.hpp"
#include "resetridge/spectral.hpp"

namespace resetridge {

// Mean squared parameter error E||estimate - beta0||^2 decomposed per
// eigenmode into four sources:
//   bias_sq    systematic shrinkage of the signal alpha_i = (Vᵀ beta0)_i
//   obs_var    observation noise eta passed through the filter
//   sgd_var    within-interval diffusion variance
//   timing_var randomness of the reset clock (zero for deterministic-time
//              estimators like ridge)
// The grand total is the exact sum of the four totals.
struct RiskReport {
    Vector bias_sq;
    Vector obs_var;
    Vector sgd_var;
    Vector timing_var;
    double bias_sq_total = 0.0;
    double obs_var_total = 0.0;
    double sgd_var_total = 0.0;
    double timing_var_total = 0.0;
    double total = 0.0;
    nlohmann::json params;  // inputs the report was computed from

    int dim() const { return static_cast<int>(bias_sq.size()); }
};

nlohmann::json to_json(const RiskReport& r);

// Ridge estimator on noisy labels: per mode
//   lambda^2 alpha^2/(mu+lambda)^2 + sigma_eta^2 mu/(mu+lambda)^2.
RiskReport ridge_risk(const Vector& mu, const Vector& alpha, double sigma_eta, double lambda);

// Stationary risk of Poisson resetting at rate r, averaged over observation
// noise: the ridge terms at lambda = r plus
//   sgd    Sigmã_ii/(2 mu_i + r)
//   timing r (mu_i^2 alpha_i^2 + sigma_eta^2 mu_i) / ((mu_i+r)^2 (2 mu_i+r)).
RiskReport poisson_total_risk(const Vector& mu, const Vector& alpha, double sigma_eta,
                              const NoiseModel& noise, double r);

// Same split conditional on a realized b̃ (no observation-noise averaging):
//   bias   (b̃_i/(mu_i+r) - alpha_i)^2
//   timing r b̃_i^2 / ((mu_i+r)^2 (2 mu_i+r)).
RiskReport poisson_conditional_risk(const Vector& mu, const Vector& b_tilde,
                                    const Vector& alpha, const NoiseModel& noise, double r);

// Stationary snapshot risk of a general renewal law: per mode
//   h(mu)^2 alpha^2 + sigma_eta^2 g(mu)^2/mu + Sigmã_ii g(2mu)/(2mu)
//   + (alpha^2 + sigma_eta^2/mu)(h(2mu) - h(mu)^2).
// A zero-curvature mode contributes alpha^2 + Sigmã_ii E[A] when sigma_eta
// is zero; with sigma_eta > 0 its observation-noise share is 0/0 and the
// call raises std::domain_error rather than invent a value.
RiskReport renewal_snapshot_risk(const Vector& mu, const Vector& alpha, double sigma_eta,
                                 const NoiseModel& noise, const ResetLaw& law);

// Rate search: coarse grid argmin refined by golden section (log-r, 1e-8
// relative). The grid must be positive, ascending, have >= 32 points and span
// >= 4 decades. boundary is set when the minimizer sits on a grid edge (no
// refinement there). foc_residual is the dimensionless first-order-condition
// check |dR/dr| * r_star / R(r_star) from a central difference with step
// 1e-5 r_star; meaningful only at interior optima.
struct OptimalRate {
    double r_star = 0.0;
    double risk = 0.0;
    bool boundary = false;
    double foc_residual = 0.0;
};

OptimalRate optimal_poisson_rate(const Vector& mu, const Vector& alpha, double sigma_eta,
                                 const NoiseModel& noise, const std::vector<double>& r_grid);

OptimalRate optimal_poisson_rate_conditional(const Vector& mu, const Vector& b_tilde,
                                             const Vector& alpha, const NoiseModel& noise,
                                             const std::vector<double>& r_grid);

// Rate maximizing the per-mode timing variance r c/((mu+r)^2(2mu+r)):
// the golden-ratio point mu (sqrt(5)-1)/2.
double reset_variance_peak(double mu);

// Scalar-mode law comparison over a (mu tau, nu) grid. Each cell fixes
// tau = 1, alpha = 1, sigma_eta^2 = mu nu^2/2 and diffusion level nu^2/2, and
// evaluates the snapshot risk for gamma laws with the given shapes (an
// infinite shape means the deterministic law), all with mean interval tau.
// best_law is the argmin; gain is its relative improvement over the
// exponential member. Gains below the threshold are relabeled "poisson".
struct LandscapeCell {
    double mu_tau = 0.0;
    double nu = 0.0;
    std::string best_law;
    double gain = 0.0;
};

std::vector<LandscapeCell> risk_landscape(const std::vector<double>& shapes,
                                          const std::vector<double>& mu_tau_grid,
                                          const std::vector<double>& nu_grid,
                                          double gain_threshold = 0.015, int threads = 0);

// display name used by the landscape: poisson / erlang-k / gamma-x / periodic
std::string landscape_law_label(double shape);

}  // namespace resetridge
