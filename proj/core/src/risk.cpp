#include "resetridge/risk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "resetridge/parallel.hpp"

namespace resetridge {

namespace {

void check_mode_inputs(const Vector& mu, const Vector& alpha) {
    if (mu.size() < 1) throw std::invalid_argument("risk: empty spectrum");
    if (alpha.size() != mu.size())
        throw std::invalid_argument("risk: alpha length must match mu");
    if (!mu.allFinite() || !alpha.allFinite())
        throw std::invalid_argument("risk: inputs must be finite");
    for (long i = 0; i < mu.size(); ++i)
        if (mu[i] < 0.0) throw std::invalid_argument("risk: mu must be >= 0");
}

void check_noise_dim(const Vector& mu, const NoiseModel& noise) {
    if (noise.dim() != mu.size())
        throw std::invalid_argument("risk: noise dimension does not match mu");
}

// negative values beyond round-off indicate a formula bug, tiny ones are noise
double clamp_nonneg(double v, double scale) {
    if (v < -1e-12 * (1.0 + scale))
        throw std::runtime_error("risk: a variance term evaluated significantly negative");
    return std::max(v, 0.0);
}

void finalize(RiskReport& r) {
    r.bias_sq_total = r.bias_sq.sum();
    r.obs_var_total = r.obs_var.sum();
    r.sgd_var_total = r.sgd_var.sum();
    r.timing_var_total = r.timing_var.sum();
    r.total = r.bias_sq_total + r.obs_var_total + r.sgd_var_total + r.timing_var_total;
}

RiskReport make_empty(int d) {
    RiskReport r;
    r.bias_sq = Vector::Zero(d);
    r.obs_var = Vector::Zero(d);
    r.sgd_var = Vector::Zero(d);
    r.timing_var = Vector::Zero(d);
    return r;
}

// shared grid+golden-section minimizer used by the rate searches
OptimalRate minimize_rate(const std::function<double(double)>& risk_fn,
                          const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("rate search: empty grid");
    if (grid.size() < 32) throw std::invalid_argument("rate search: grid needs >= 32 points");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !std::isfinite(grid[i]))
            throw std::invalid_argument("rate search: grid must be positive and finite");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("rate search: grid must be strictly ascending");
    }
    if (grid.back() / grid.front() < 1e4 * (1.0 - 1e-9))
        throw std::invalid_argument("rate search: grid must span at least 4 decades");

    std::size_t best = 0;
    double best_val = risk_fn(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double v = risk_fn(grid[i]);
        if (v < best_val) {  // ties keep the smaller rate
            best_val = v;
            best = i;
        }
    }

    OptimalRate out;
    if (best == 0 || best + 1 == grid.size()) {
        out.boundary = true;
        out.r_star = grid[best];
        out.risk = best_val;
        out.foc_residual = std::numeric_limits<double>::quiet_NaN();
        return out;
    }

    // golden section in log r on the bracketing interval
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::log(grid[best - 1]);
    double hi = std::log(grid[best + 1]);
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = risk_fn(std::exp(x1));
    double f2 = risk_fn(std::exp(x2));
    while (hi - lo > 1e-8) {  // log-width 1e-8 => 1e-8 relative in r
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = risk_fn(std::exp(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = risk_fn(std::exp(x2));
        }
    }
    out.r_star = std::exp(0.5 * (lo + hi));
    out.risk = risk_fn(out.r_star);

    const double step = 1e-5 * out.r_star;
    const double deriv = (risk_fn(out.r_star + step) - risk_fn(out.r_star - step)) / (2.0 * step);
    out.foc_residual = std::abs(deriv) * out.r_star / std::max(out.risk, 1e-300);
    return out;
}

}  // namespace

nlohmann::json to_json(const RiskReport& r) {
    const auto vec = [](const Vector& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    return {
        {"per_mode",
         {{"bias_sq", vec(r.bias_sq)},
          {"obs_var", vec(r.obs_var)},
          {"sgd_var", vec(r.sgd_var)},
          {"timing_var", vec(r.timing_var)}}},
        {"totals",
         {{"bias_sq", r.bias_sq_total},
          {"obs_var", r.obs_var_total},
          {"sgd_var", r.sgd_var_total},
          {"timing_var", r.timing_var_total}}},
        {"total", r.total},
        {"params", r.params},
    };
}

RiskReport ridge_risk(const Vector& mu, const Vector& alpha, double sigma_eta, double lambda) {
    check_mode_inputs(mu, alpha);
    if (!(sigma_eta >= 0.0)) throw std::invalid_argument("ridge_risk: sigma_eta must be >= 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("ridge_risk: lambda must be positive");
    RiskReport r = make_empty(static_cast<int>(mu.size()));
    for (long i = 0; i < mu.size(); ++i) {
        const double den = (mu[i] + lambda) * (mu[i] + lambda);
        r.bias_sq[i] = lambda * lambda * alpha[i] * alpha[i] / den;
        r.obs_var[i] = sigma_eta * sigma_eta * mu[i] / den;
    }
    finalize(r);
    r.params = {{"estimator", "ridge"}, {"lambda", lambda}, {"sigma_eta", sigma_eta}};
    return r;
}

RiskReport poisson_total_risk(const Vector& mu, const Vector& alpha, double sigma_eta,
                              const NoiseModel& noise, double r_rate) {
    check_mode_inputs(mu, alpha);
    check_noise_dim(mu, noise);
    if (!(sigma_eta >= 0.0))
        throw std::invalid_argument("poisson_total_risk: sigma_eta must be >= 0");
    if (!(r_rate > 0.0)) throw std::invalid_argument("poisson_total_risk: rate must be positive");
    RiskReport r = make_empty(static_cast<int>(mu.size()));
    for (long i = 0; i < mu.size(); ++i) {
        const double den = (mu[i] + r_rate) * (mu[i] + r_rate);
        r.bias_sq[i] = r_rate * r_rate * alpha[i] * alpha[i] / den;
        r.obs_var[i] = sigma_eta * sigma_eta * mu[i] / den;
        r.sgd_var[i] = noise.sigma_tilde(i, i) / (2.0 * mu[i] + r_rate);
        r.timing_var[i] = r_rate *
                          (mu[i] * mu[i] * alpha[i] * alpha[i] + sigma_eta * sigma_eta * mu[i]) /
                          (den * (2.0 * mu[i] + r_rate));
    }
    finalize(r);
    r.params = {{"estimator", "poisson_reset"},
                {"rate", r_rate},
                {"sigma_eta", sigma_eta},
                {"conditional", false}};
    return r;
}

RiskReport poisson_conditional_risk(const Vector& mu, const Vector& b_tilde,
                                    const Vector& alpha, const NoiseModel& noise, double r_rate) {
    check_mode_inputs(mu, alpha);
    check_noise_dim(mu, noise);
    if (b_tilde.size() != mu.size() || !b_tilde.allFinite())
        throw std::invalid_argument("poisson_conditional_risk: bad b_tilde");
    if (!(r_rate > 0.0))
        throw std::invalid_argument("poisson_conditional_risk: rate must be positive");
    RiskReport r = make_empty(static_cast<int>(mu.size()));
    for (long i = 0; i < mu.size(); ++i) {
        const double mr = mu[i] + r_rate;
        const double dev = b_tilde[i] / mr - alpha[i];
        r.bias_sq[i] = dev * dev;
        r.sgd_var[i] = noise.sigma_tilde(i, i) / (2.0 * mu[i] + r_rate);
        r.timing_var[i] = r_rate * b_tilde[i] * b_tilde[i] / (mr * mr * (2.0 * mu[i] + r_rate));
    }
    finalize(r);
    r.params = {{"estimator", "poisson_reset"},
                {"rate", r_rate},
                {"conditional", true}};
    return r;
}

RiskReport renewal_snapshot_risk(const Vector& mu, const Vector& alpha, double sigma_eta,
                                 const NoiseModel& noise, const ResetLaw& law) {
    check_mode_inputs(mu, alpha);
    check_noise_dim(mu, noise);
    if (!(sigma_eta >= 0.0))
        throw std::invalid_argument("renewal_snapshot_risk: sigma_eta must be >= 0");
    RiskReport r = make_empty(static_cast<int>(mu.size()));
    for (long i = 0; i < mu.size(); ++i) {
        const double a2 = alpha[i] * alpha[i];
        if (mu[i] == 0.0) {
            if (sigma_eta > 0.0)
                throw std::domain_error(
                    "renewal_snapshot_risk: zero-curvature mode with sigma_eta > 0 has an "
                    "undefined observation-noise share");
            // no data, no decay: full signal missed plus accumulated diffusion
            r.bias_sq[i] = a2;
            r.sgd_var[i] = noise.sigma_tilde(i, i) * law.mean_age();
            continue;
        }
        const double h1 = law.age_residual(mu[i]);
        const double g1 = law.filter(mu[i]);
        const double h2 = law.age_residual(2.0 * mu[i]);
        const double g2_over = [&] {  // g(2mu)/(2mu), E[A] limit
            const double s = 2.0 * mu[i];
            const double x = s * law.mean_interval();
            if (x < 1e-6) return law.mean_age() - 0.5 * s * law.age_second_moment();
            return law.filter(s) / s;
        }();
        r.bias_sq[i] = h1 * h1 * a2;
        r.obs_var[i] = sigma_eta * sigma_eta * g1 * g1 / mu[i];
        r.sgd_var[i] = noise.sigma_tilde(i, i) * g2_over;
        // Jensen guarantees h(2mu) >= h(mu)^2; clamp only round-off
        r.timing_var[i] = (a2 + sigma_eta * sigma_eta / mu[i]) *
                          clamp_nonneg(h2 - h1 * h1, 1.0);
    }
    finalize(r);
    r.params = {{"estimator", "renewal_snapshot"},
                {"law", to_json(law)},
                {"sigma_eta", sigma_eta}};
    return r;
}

OptimalRate optimal_poisson_rate(const Vector& mu, const Vector& alpha, double sigma_eta,
                                 const NoiseModel& noise, const std::vector<double>& r_grid) {
    check_mode_inputs(mu, alpha);
    check_noise_dim(mu, noise);
    return minimize_rate(
        [&](double r) { return poisson_total_risk(mu, alpha, sigma_eta, noise, r).total; },
        r_grid);
}

OptimalRate optimal_poisson_rate_conditional(const Vector& mu, const Vector& b_tilde,
                                             const Vector& alpha, const NoiseModel& noise,
                                             const std::vector<double>& r_grid) {
    check_mode_inputs(mu, alpha);
    check_noise_dim(mu, noise);
    return minimize_rate(
        [&](double r) { return poisson_conditional_risk(mu, b_tilde, alpha, noise, r).total; },
        r_grid);
}

double reset_variance_peak(double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("reset_variance_peak: mu must be positive");
    return mu * (std::sqrt(5.0) - 1.0) / 2.0;
}

std::string landscape_law_label(double shape) {
    if (std::isinf(shape)) return "periodic";
    if (shape == 1.0) return "poisson";
    if (shape == std::floor(shape) && shape > 0.0) {
        return "erlang-" + std::to_string(static_cast<long>(shape));
    }
    std::ostringstream os;
    os << "gamma-" << shape;
    return os.str();
}

std::vector<LandscapeCell> risk_landscape(const std::vector<double>& shapes,
                                          const std::vector<double>& mu_tau_grid,
                                          const std::vector<double>& nu_grid,
                                          double gain_threshold, int threads) {
    if (shapes.empty() || mu_tau_grid.empty() || nu_grid.empty())
        throw std::invalid_argument("risk_landscape: empty grid");
    bool has_exponential = false;
    for (double k : shapes) {
        if (!(k > 0.0)) throw std::invalid_argument("risk_landscape: shapes must be positive");
        if (k == 1.0) has_exponential = true;
    }
    if (!has_exponential)
        throw std::invalid_argument("risk_landscape: shape set must include the exponential (k=1)");
    for (double mt : mu_tau_grid)
        if (!(mt > 0.0) || !std::isfinite(mt))
            throw std::invalid_argument("risk_landscape: mu_tau values must be positive");
    for (double nv : nu_grid)
        if (!(nv >= 0.0) || !std::isfinite(nv))
            throw std::invalid_argument("risk_landscape: nu values must be >= 0");

    // scale-free cell: tau = 1, alpha = 1, sigma_eta^2 = mu nu^2/2,
    // diffusion level nu^2/2; risk then depends on (mu tau, nu) only
    const auto cell_risk = [](double shape, double mu, double nu) {
        const ResetLaw law = std::isinf(shape) ? ResetLaw::deterministic(1.0)
                                               : ResetLaw::gamma(shape, 1.0);
        Vector muv(1), alpha(1);
        muv[0] = mu;
        alpha[0] = 1.0;
        const NoiseModel noise = NoiseModel::make_isotropic(1, 0.5 * nu * nu);
        const double sigma_eta = nu * std::sqrt(0.5 * mu);
        return renewal_snapshot_risk(muv, alpha, sigma_eta, noise, law).total;
    };

    const std::size_t n = mu_tau_grid.size() * nu_grid.size();
    std::vector<LandscapeCell> cells(n);
    parallel_for(n, threads, [&](std::size_t idx) {
        const double mu = mu_tau_grid[idx / nu_grid.size()];
        const double nu = nu_grid[idx % nu_grid.size()];
        double best_risk = std::numeric_limits<double>::infinity();
        double best_shape = 1.0;
        double expo_risk = 0.0;
        for (double k : shapes) {
            const double risk = cell_risk(k, mu, nu);
            if (k == 1.0) expo_risk = risk;
            if (risk < best_risk) {
                best_risk = risk;
                best_shape = k;
            }
        }
        LandscapeCell& c = cells[idx];
        c.mu_tau = mu;
        c.nu = nu;
        c.gain = expo_risk > 0.0 ? (expo_risk - best_risk) / expo_risk : 0.0;
        c.best_law = c.gain < gain_threshold ? "poisson" : landscape_law_label(best_shape);
    });
    return cells;
}

}  // namespace resetridge
