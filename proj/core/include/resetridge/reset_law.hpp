#pragma once

#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "resetridge/rng.hpp"

namespace resetridge {

// Renewal interval distributions S for the resetting clock.
//
// Everything downstream is driven by two transforms of S:
//
//   L_S(mu)  = E[e^{-mu S}]                    Laplace transform,
//   h_S(mu)  = (1 - L_S(mu)) / (mu E[S])       = E[e^{-mu A}] for the
//                                              equilibrium age A,
//   g_S(mu)  = 1 - h_S(mu)                     the induced spectral filter,
//
// with the conventions h_S(0) = 1 and g_S(0) = 0. The mode-dependent penalty
// a law mimics on curvature mu is lambda_eff(mu) = mu h / (1 - h); it is
// constant in mu exactly for the exponential law (rate r gives ridge with
// lambda = r).
struct ExponentialLaw {
    double rate;  // mean interval 1/rate
};

struct GammaLaw {
    double shape;  // k; k = 1 is exponential, k -> infinity approaches periodic
    double mean;   // tau = E[S]; scale = tau / k, Var(S) = tau^2 / k
};

struct DeterministicLaw {
    double period;  // fixed interval T (periodic resetting)
};

class ResetLaw {
public:
    using Variant = std::variant<ExponentialLaw, GammaLaw, DeterministicLaw>;

    static ResetLaw exponential(double rate);
    static ResetLaw gamma(double shape, double mean);
    static ResetLaw deterministic(double period);

    // interval moments
    double mean_interval() const;   // E[S]
    double second_moment() const;   // E[S^2]
    double third_moment() const;    // E[S^3]

    // equilibrium-age moments: E[A] = E[S^2]/(2 E[S]), E[A^2] = E[S^3]/(3 E[S])
    double mean_age() const;
    double age_second_moment() const;

    // transforms; mu must be >= 0
    double laplace(double mu) const;
    double age_residual(double mu) const;       // h_S
    double filter(double mu) const;             // g_S
    double effective_penalty(double mu) const;  // mu h / (1 - h); needs mu > 0, g > 0

    // sampling
    double sample_interval(Rng& rng) const;
    double sample_equilibrium_age(Rng& rng) const;

    std::string kind() const;  // "exponential" | "gamma" | "deterministic"
    // human-readable and CSV-safe (no commas), e.g. "gamma(shape=3; mean=1)"
    std::string name() const;

    const Variant& variant() const { return v_; }

private:
    explicit ResetLaw(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

// JSON wire format:
//   {"kind":"exponential","rate":0.7}
//   {"kind":"gamma","shape":3,"mean":1.0}
//   {"kind":"deterministic","period":1.0}
nlohmann::json to_json(const ResetLaw& law);
ResetLaw reset_law_from_json(const nlohmann::json& j);

// Structural sanity checks of the induced filter on a strictly increasing
// positive grid of curvatures: h in [0,1] and non-increasing, g non-decreasing
// and non-negative, and the high-curvature tail bound
// 1 - g(mu) <= 1.01 / (mu E[S]) wherever mu E[S] >= 100.
struct AdmissibilityCheck {
    std::string name;
    bool pass = false;
    bool applicable = true;  // tail check may have no qualifying grid points
    double worst = 0.0;      // most extreme signed violation (<= 0 when passing)
    std::string detail;
};

struct AdmissibilityReport {
    std::vector<AdmissibilityCheck> checks;
    bool all_pass() const;
};

AdmissibilityReport admissibility_check(const ResetLaw& law,
                                        const std::vector<double>& mu_grid);

}  // namespace resetridge
