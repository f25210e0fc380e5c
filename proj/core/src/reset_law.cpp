#include "resetridge/reset_law.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace resetridge {

namespace {

// thresholds from the numerical policy: exact endpoint below 1e-12,
// quadratic Taylor guard below 1e-6 (both in units of mu * E[S])
constexpr double kEndpointX = 1e-12;
constexpr double kTaylorX = 1e-6;

void require_nonneg_mu(double mu) {
    if (!(mu >= 0.0)) throw std::invalid_argument("reset law transform: mu must be >= 0");
    if (!std::isfinite(mu)) throw std::invalid_argument("reset law transform: mu must be finite");
}

}  // namespace

ResetLaw ResetLaw::exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw std::invalid_argument("exponential law: rate must be positive and finite");
    return ResetLaw(Variant{ExponentialLaw{rate}});
}

ResetLaw ResetLaw::gamma(double shape, double mean) {
    if (!(shape > 0.0) || !std::isfinite(shape))
        throw std::invalid_argument("gamma law: shape must be positive and finite");
    if (!(mean > 0.0) || !std::isfinite(mean))
        throw std::invalid_argument("gamma law: mean must be positive and finite");
    return ResetLaw(Variant{GammaLaw{shape, mean}});
}

ResetLaw ResetLaw::deterministic(double period) {
    if (!(period > 0.0) || !std::isfinite(period))
        throw std::invalid_argument("deterministic law: period must be positive and finite");
    return ResetLaw(Variant{DeterministicLaw{period}});
}

double ResetLaw::mean_interval() const {
    return std::visit(
        [](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ExponentialLaw>) return 1.0 / l.rate;
            else if constexpr (std::is_same_v<T, GammaLaw>) return l.mean;
            else return l.period;
        },
        v_);
}

double ResetLaw::second_moment() const {
    return std::visit(
        [](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ExponentialLaw>) return 2.0 / (l.rate * l.rate);
            else if constexpr (std::is_same_v<T, GammaLaw>)
                return l.mean * l.mean * (l.shape + 1.0) / l.shape;
            else return l.period * l.period;
        },
        v_);
}

double ResetLaw::third_moment() const {
    return std::visit(
        [](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ExponentialLaw>)
                return 6.0 / (l.rate * l.rate * l.rate);
            else if constexpr (std::is_same_v<T, GammaLaw>) {
                const double theta = l.mean / l.shape;
                return theta * theta * theta * l.shape * (l.shape + 1.0) * (l.shape + 2.0);
            } else
                return l.period * l.period * l.period;
        },
        v_);
}

double ResetLaw::mean_age() const { return second_moment() / (2.0 * mean_interval()); }

double ResetLaw::age_second_moment() const { return third_moment() / (3.0 * mean_interval()); }

double ResetLaw::laplace(double mu) const {
    require_nonneg_mu(mu);
    return std::visit(
        [mu](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ExponentialLaw>) return l.rate / (l.rate + mu);
            else if constexpr (std::is_same_v<T, GammaLaw>)
                // (1 + tau mu / k)^{-k}, stable for very large shapes
                return std::exp(-l.shape * std::log1p(l.mean * mu / l.shape));
            else return std::exp(-mu * l.period);
        },
        v_);
}

namespace {

// 1 - L_S(mu) without cancellation near L = 1
double one_minus_laplace(const ResetLaw::Variant& v, double mu) {
    return std::visit(
        [mu](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ExponentialLaw>) return mu / (l.rate + mu);
            else if constexpr (std::is_same_v<T, GammaLaw>)
                return -std::expm1(-l.shape * std::log1p(l.mean * mu / l.shape));
            else return -std::expm1(-mu * l.period);
        },
        v);
}

}  // namespace

double ResetLaw::age_residual(double mu) const {
    require_nonneg_mu(mu);
    if (const auto* e = std::get_if<ExponentialLaw>(&v_))
        return e->rate / (e->rate + mu);  // exact; keeps lambda_eff constant to round-off
    const double es = mean_interval();
    const double x = mu * es;
    if (x < kEndpointX) return 1.0;
    if (x < kTaylorX)
        return 1.0 - mu * mean_age() + 0.5 * mu * mu * age_second_moment();
    return one_minus_laplace(v_, mu) / x;
}

double ResetLaw::filter(double mu) const {
    require_nonneg_mu(mu);
    if (const auto* e = std::get_if<ExponentialLaw>(&v_)) return mu / (e->rate + mu);
    const double es = mean_interval();
    const double x = mu * es;
    if (x < kEndpointX) return 0.0;
    if (x < kTaylorX) return mu * mean_age() - 0.5 * mu * mu * age_second_moment();
    return 1.0 - one_minus_laplace(v_, mu) / x;
}

double ResetLaw::effective_penalty(double mu) const {
    if (!(mu > 0.0)) throw std::invalid_argument("effective_penalty: mu must be positive");
    if (const auto* e = std::get_if<ExponentialLaw>(&v_)) {
        (void)e;
        // mu h / g with h = r/(r+mu), g = mu/(r+mu); algebraically the rate
        return std::get<ExponentialLaw>(v_).rate;
    }
    const double h = age_residual(mu);
    const double g = 1.0 - h;
    if (!(g > 0.0)) throw std::domain_error("effective_penalty: filter vanishes at this mu");
    return mu * h / g;
}

double ResetLaw::sample_interval(Rng& rng) const {
    return std::visit(
        [&rng](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ExponentialLaw>) return rng.exponential(l.rate);
            else if constexpr (std::is_same_v<T, GammaLaw>)
                return rng.gamma(l.shape, l.mean / l.shape);
            else return l.period;
        },
        v_);
}

double ResetLaw::sample_equilibrium_age(Rng& rng) const {
    // Stationary age density is f_A(u) = P(S > u) / E[S]. Sampling identity:
    // draw the length-biased interval S* (density s f_S(s)/E[S]) and thin with
    // an independent U(0,1): A = U S*.
    return std::visit(
        [&rng](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ExponentialLaw>)
                return rng.exponential(l.rate);  // age of a Poisson clock is Exp(r)
            else if constexpr (std::is_same_v<T, GammaLaw>) {
                // length-biased gamma(k, theta) is gamma(k+1, theta)
                const double s_biased = rng.gamma(l.shape + 1.0, l.mean / l.shape);
                return rng.uniform() * s_biased;
            } else
                return rng.uniform() * l.period;  // uniform phase
        },
        v_);
}

std::string ResetLaw::kind() const {
    return std::visit(
        [](const auto& l) -> std::string {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ExponentialLaw>) return "exponential";
            else if constexpr (std::is_same_v<T, GammaLaw>) return "gamma";
            else return "deterministic";
        },
        v_);
}

std::string ResetLaw::name() const {
    std::ostringstream os;
    std::visit(
        [&os](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ExponentialLaw>)
                os << "exponential(rate=" << l.rate << ")";
            else if constexpr (std::is_same_v<T, GammaLaw>)
                os << "gamma(shape=" << l.shape << "; mean=" << l.mean << ")";
            else os << "deterministic(period=" << l.period << ")";
        },
        v_);
    return os.str();
}

nlohmann::json to_json(const ResetLaw& law) {
    return std::visit(
        [](const auto& l) -> nlohmann::json {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, ExponentialLaw>)
                return {{"kind", "exponential"}, {"rate", l.rate}};
            else if constexpr (std::is_same_v<T, GammaLaw>)
                return {{"kind", "gamma"}, {"shape", l.shape}, {"mean", l.mean}};
            else return {{"kind", "deterministic"}, {"period", l.period}};
        },
        law.variant());
}

ResetLaw reset_law_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw std::invalid_argument("reset law JSON: expected object with string field 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    const auto num = [&j](const char* key) -> double {
        if (!j.contains(key) || !j.at(key).is_number())
            throw std::invalid_argument(std::string("reset law JSON: missing numeric field '") +
                                        key + "'");
        return j.at(key).get<double>();
    };
    if (kind == "exponential") return ResetLaw::exponential(num("rate"));
    if (kind == "gamma") return ResetLaw::gamma(num("shape"), num("mean"));
    if (kind == "deterministic") return ResetLaw::deterministic(num("period"));
    throw std::invalid_argument("reset law JSON: unknown kind '" + kind + "'");
}

bool AdmissibilityReport::all_pass() const {
    for (const auto& c : checks)
        if (c.applicable && !c.pass) return false;
    return true;
}

AdmissibilityReport admissibility_check(const ResetLaw& law,
                                        const std::vector<double>& mu_grid) {
    if (mu_grid.empty()) throw std::invalid_argument("admissibility: empty grid");
    for (std::size_t i = 0; i < mu_grid.size(); ++i) {
        if (!(mu_grid[i] > 0.0) || !std::isfinite(mu_grid[i]))
            throw std::invalid_argument("admissibility: grid values must be positive and finite");
        if (i > 0 && !(mu_grid[i] > mu_grid[i - 1]))
            throw std::invalid_argument("admissibility: grid must be strictly increasing");
    }

    std::vector<double> h(mu_grid.size()), g(mu_grid.size());
    for (std::size_t i = 0; i < mu_grid.size(); ++i) {
        h[i] = law.age_residual(mu_grid[i]);
        g[i] = law.filter(mu_grid[i]);
    }
    const double slack = 1e-12;  // monotonicity up to round-off

    AdmissibilityReport rep;
    {
        AdmissibilityCheck c{"h_in_unit_interval", true, true, 0.0, ""};
        for (double hi : h) {
            const double viol = std::max(hi - 1.0, -hi);
            if (viol > c.worst) c.worst = viol;
        }
        c.pass = c.worst <= slack;
        rep.checks.push_back(c);
    }
    {
        AdmissibilityCheck c{"h_nonincreasing", true, true, 0.0, ""};
        for (std::size_t i = 1; i < h.size(); ++i)
            c.worst = std::max(c.worst, h[i] - h[i - 1]);
        c.pass = c.worst <= slack;
        rep.checks.push_back(c);
    }
    {
        AdmissibilityCheck c{"g_nondecreasing", true, true, 0.0, ""};
        for (std::size_t i = 1; i < g.size(); ++i)
            c.worst = std::max(c.worst, g[i - 1] - g[i]);
        c.pass = c.worst <= slack;
        rep.checks.push_back(c);
    }
    {
        AdmissibilityCheck c{"g_nonnegative_at_min", true, true, -g.front(), ""};
        c.pass = g.front() >= 0.0;
        rep.checks.push_back(c);
    }
    {
        // ridge-like tail: 1 - g(mu) = h(mu) <= (1 - L)/x <= 1/x, allow 1%
        AdmissibilityCheck c{"high_curvature_tail", true, false, 0.0, ""};
        const double es = law.mean_interval();
        for (std::size_t i = 0; i < mu_grid.size(); ++i) {
            const double x = mu_grid[i] * es;
            if (x < 100.0) continue;
            c.applicable = true;
            c.worst = std::max(c.worst, h[i] * x - 1.01);
        }
        c.pass = !c.applicable || c.worst <= 0.0;
        if (!c.applicable) c.detail = "no grid point with mu*E[S] >= 100";
        rep.checks.push_back(c);
    }
    return rep;
}

}  // namespace resetridge
