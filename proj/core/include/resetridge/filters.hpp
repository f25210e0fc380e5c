#pragma once

#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "resetridge/reset_law.hpp"
#include "resetridge/spectral.hpp"

namespace resetridge {

// Spectral shrinkage families applied modewise to the min-norm OLS solution:
// estimate = V diag(f(mu_i)) w̃*. Three families:
//   ridge        f(mu) = mu / (mu + lambda)
//   renewal      f(mu) = g_S(mu), the reset-induced filter of a law S
//   sharp cutoff f(mu) = 1{mu >= c}  (truncated-SVD style reference)
struct RidgeFilter {
    double lambda;
};

struct RenewalFilter {
    ResetLaw law;
};

struct SharpCutoffFilter {
    double threshold;
};

class FilterSpec {
public:
    using Variant = std::variant<RidgeFilter, RenewalFilter, SharpCutoffFilter>;

    static FilterSpec ridge(double lambda);
    static FilterSpec renewal(ResetLaw law);
    static FilterSpec sharp_cutoff(double threshold);

    // filter value at curvature mu >= 0; always in [0,1]
    double value(double mu) const;

    std::string kind() const;  // "ridge" | "renewal" | "cutoff"
    std::string name() const;

    const Variant& variant() const { return v_; }

private:
    explicit FilterSpec(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

// JSON wire format:
//   {"kind":"ridge","lambda":1.0}
//   {"kind":"renewal","law":{...}}
//   {"kind":"cutoff","threshold":2.0}
nlohmann::json to_json(const FilterSpec& f);
FilterSpec filter_spec_from_json(const nlohmann::json& j);

// V diag(f(mu_i)) w̃* in original coordinates; nullspace modes stay exactly 0.
Vector apply_filter(const SpectralModel& m, const FilterSpec& f);

// Effective per-mode ridge penalties a law imposes on a weak and a strong
// curvature, and their relative spread. Quantifies how far a non-exponential
// law is from any single ridge penalty.
struct TwoModeMismatch {
    double lambda_weak;
    double lambda_strong;
    double relative_gap;  // |lambda_weak - lambda_strong| / lambda_strong
};

TwoModeMismatch two_mode_mismatch(const ResetLaw& law, double mu_weak, double mu_strong);

// f sampled on a curvature grid, for plotting and CSV export.
struct FilterCurve {
    std::vector<double> mu;
    std::vector<double> g;
};

FilterCurve filter_curve(const FilterSpec& f, const std::vector<double>& mu_grid);

}  // namespace resetridge
