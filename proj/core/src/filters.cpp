#include "resetridge/filters.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace resetridge {

FilterSpec FilterSpec::ridge(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("ridge filter: lambda must be positive and finite");
    return FilterSpec(Variant{RidgeFilter{lambda}});
}

FilterSpec FilterSpec::renewal(ResetLaw law) {
    return FilterSpec(Variant{RenewalFilter{std::move(law)}});
}

FilterSpec FilterSpec::sharp_cutoff(double threshold) {
    if (!(threshold > 0.0) || !std::isfinite(threshold))
        throw std::invalid_argument("cutoff filter: threshold must be positive and finite");
    return FilterSpec(Variant{SharpCutoffFilter{threshold}});
}

double FilterSpec::value(double mu) const {
    if (!(mu >= 0.0) || !std::isfinite(mu))
        throw std::invalid_argument("filter value: mu must be >= 0 and finite");
    return std::visit(
        [mu](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, RidgeFilter>)
                return mu / (mu + f.lambda);
            else if constexpr (std::is_same_v<T, RenewalFilter>)
                return f.law.filter(mu);
            else
                return mu >= f.threshold ? 1.0 : 0.0;
        },
        v_);
}

std::string FilterSpec::kind() const {
    return std::visit(
        [](const auto& f) -> std::string {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, RidgeFilter>) return "ridge";
            else if constexpr (std::is_same_v<T, RenewalFilter>) return "renewal";
            else return "cutoff";
        },
        v_);
}

std::string FilterSpec::name() const {
    std::ostringstream os;
    std::visit(
        [&os](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, RidgeFilter>)
                os << "ridge(lambda=" << f.lambda << ")";
            else if constexpr (std::is_same_v<T, RenewalFilter>)
                os << "renewal[" << f.law.name() << "]";
            else
                os << "cutoff(threshold=" << f.threshold << ")";
        },
        v_);
    return os.str();
}

nlohmann::json to_json(const FilterSpec& f) {
    return std::visit(
        [](const auto& v) -> nlohmann::json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, RidgeFilter>)
                return {{"kind", "ridge"}, {"lambda", v.lambda}};
            else if constexpr (std::is_same_v<T, RenewalFilter>)
                return {{"kind", "renewal"}, {"law", to_json(v.law)}};
            else
                return {{"kind", "cutoff"}, {"threshold", v.threshold}};
        },
        f.variant());
}

FilterSpec filter_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw std::invalid_argument("filter JSON: expected object with string field 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    const auto num = [&j](const char* key) -> double {
        if (!j.contains(key) || !j.at(key).is_number())
            throw std::invalid_argument(std::string("filter JSON: missing numeric field '") +
                                        key + "'");
        return j.at(key).get<double>();
    };
    if (kind == "ridge") return FilterSpec::ridge(num("lambda"));
    if (kind == "cutoff") return FilterSpec::sharp_cutoff(num("threshold"));
    if (kind == "renewal") {
        if (!j.contains("law"))
            throw std::invalid_argument("filter JSON: renewal filter needs a 'law' object");
        return FilterSpec::renewal(reset_law_from_json(j.at("law")));
    }
    throw std::invalid_argument("filter JSON: unknown kind '" + kind + "'");
}

Vector apply_filter(const SpectralModel& m, const FilterSpec& f) {
    Vector shrunk(m.dim());
    for (int i = 0; i < m.dim(); ++i) {
        // w̃* is exactly 0 on the nullspace, so nullspace modes stay 0 no
        // matter what the filter does there
        shrunk[i] = m.in_nullspace(i) ? 0.0 : f.value(m.mu[i]) * m.w_star_tilde[i];
    }
    return m.v * shrunk;
}

TwoModeMismatch two_mode_mismatch(const ResetLaw& law, double mu_weak, double mu_strong) {
    if (!(mu_weak > 0.0) || !(mu_strong > mu_weak))
        throw std::invalid_argument("two_mode_mismatch: need 0 < mu_weak < mu_strong");
    TwoModeMismatch r;
    r.lambda_weak = law.effective_penalty(mu_weak);
    r.lambda_strong = law.effective_penalty(mu_strong);
    r.relative_gap = std::abs(r.lambda_weak - r.lambda_strong) / r.lambda_strong;
    return r;
}

FilterCurve filter_curve(const FilterSpec& f, const std::vector<double>& mu_grid) {
    if (mu_grid.empty()) throw std::invalid_argument("filter_curve: empty grid");
    FilterCurve c;
    c.mu = mu_grid;
    c.g.reserve(mu_grid.size());
    for (double mu : mu_grid) c.g.push_back(f.value(mu));
    return c;
}

}  // namespace resetridge
