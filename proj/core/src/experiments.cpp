#include "resetridge/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "resetridge/io.hpp"
#include "resetridge/parallel.hpp"

namespace resetridge {

namespace {

Matrix gaussian_matrix(long n, long d, Rng& rng) {
    Matrix m(n, d);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < d; ++j) m(i, j) = rng.normal();
    return m;
}

Vector noisy_labels(const Matrix& x, const Vector& beta0, double sigma_eta, Rng& rng) {
    Vector y = x * beta0;
    for (long i = 0; i < y.size(); ++i) y[i] += sigma_eta * rng.normal();
    return y;
}

}  // namespace

SpikedConfig SpikedConfig::defaults() {
    SpikedConfig cfg;
    for (int i = 1; i <= 15; ++i) cfg.gamma_grid.push_back(0.25 * i);
    cfg.tuning_grid = log_spaced(1e-3, 1e2, 180);
    return cfg;
}

BlockConfig BlockConfig::defaults() {
    BlockConfig cfg;
    for (int b = 0; b <= 12; b += 2) cfg.block_grid.push_back(b);
    cfg.tuning_grid = log_spaced(1e-3, 1e2, 60);
    return cfg;
}

DataTriple gen_spiked(const SpikedConfig& cfg, double gamma, Rng& rng) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gen_spiked: gamma must be positive");
    if (cfg.n_train < 1 || cfg.n_val < 1 || cfg.n_test < 1)
        throw std::invalid_argument("gen_spiked: sample sizes must be positive");
    const long d = std::lround(gamma * cfg.n_train);
    if (d < 2) throw std::invalid_argument("gen_spiked: dimension below 2; increase gamma");

    // orthonormal spike directions via Gram-Schmidt on two gaussian vectors
    Vector u1(d), u2(d);
    for (long j = 0; j < d; ++j) u1[j] = rng.normal();
    u1.normalize();
    for (long j = 0; j < d; ++j) u2[j] = rng.normal();
    u2 -= u1.dot(u2) * u1;
    u2.normalize();

    const double s1 = std::sqrt(cfg.spike_strengths[0]) - 1.0;
    const double s2 = std::sqrt(cfg.spike_strengths[1]) - 1.0;
    const Vector beta0 = cfg.spike_coeffs[0] * u1 + cfg.spike_coeffs[1] * u2;

    // x = z + (sqrt(l)-1)(uᵀz)u per spike gives covariance I + (l-1) u uᵀ
    const auto draw_x = [&](long n) {
        Matrix z = gaussian_matrix(n, d, rng);
        const Vector p1 = z * u1;
        const Vector p2 = z * u2;
        z.noalias() += s1 * p1 * u1.transpose();
        z.noalias() += s2 * p2 * u2.transpose();
        return z;
    };

    DataTriple t;
    t.train.x = draw_x(cfg.n_train);
    t.train.y = noisy_labels(t.train.x, beta0, cfg.sigma_eta, rng);
    t.val.x = draw_x(cfg.n_val);
    t.val.y = noisy_labels(t.val.x, beta0, cfg.sigma_eta, rng);
    t.test.x = draw_x(cfg.n_test);
    t.test.y = noisy_labels(t.test.x, beta0, cfg.sigma_eta, rng);
    for (DesignData* s : {&t.train, &t.val, &t.test}) {
        s->beta0 = beta0;
        s->sigma_eta = cfg.sigma_eta;
    }
    return t;
}

Matrix block_covariance(const BlockConfig& cfg, int n_blocks) {
    if (n_blocks < 0) throw std::invalid_argument("block design: n_blocks must be >= 0");
    if (cfg.signal_width < 1 || cfg.nuisance_width < 1)
        throw std::invalid_argument("block design: block widths must be positive");
    const int d = cfg.signal_width + n_blocks * cfg.nuisance_width;
    // block id 0 = signal block, 1..n_blocks = nuisance
    const auto block_of = [&](int j) {
        return j < cfg.signal_width ? 0 : 1 + (j - cfg.signal_width) / cfg.nuisance_width;
    };
    Matrix c(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (i == j)
                c(i, j) = 1.0;
            else if (block_of(i) != block_of(j))
                c(i, j) = cfg.rho_cross;
            else
                c(i, j) = block_of(i) == 0 ? cfg.rho_sig : cfg.rho_nui;
        }
    }
    return c;
}

DataTriple gen_block(const BlockConfig& cfg, int n_blocks, Rng& rng) {
    if (cfg.n_train < 1 || cfg.n_val < 1 || cfg.n_test < 1)
        throw std::invalid_argument("gen_block: sample sizes must be positive");
    if (static_cast<int>(cfg.signal_coeffs.size()) != cfg.signal_width)
        throw std::invalid_argument("gen_block: signal_coeffs length must equal signal_width");
    const Matrix c = block_covariance(cfg, n_blocks);
    const int d = static_cast<int>(c.rows());

    Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        throw std::runtime_error("gen_block: constructed covariance is not positive definite");
    const Eigen::LLT<Matrix> llt(c);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("gen_block: Cholesky factorization failed");
    const Matrix l_t = llt.matrixL().transpose();

    Vector beta0 = Vector::Zero(d);
    for (int j = 0; j < cfg.signal_width; ++j) beta0[j] = cfg.signal_coeffs[j];

    const auto draw_x = [&](long n) { return Matrix(gaussian_matrix(n, d, rng) * l_t); };

    DataTriple t;
    t.train.x = draw_x(cfg.n_train);
    t.train.y = noisy_labels(t.train.x, beta0, cfg.sigma_eta, rng);
    t.val.x = draw_x(cfg.n_val);
    t.val.y = noisy_labels(t.val.x, beta0, cfg.sigma_eta, rng);
    t.test.x = draw_x(cfg.n_test);
    t.test.y = noisy_labels(t.test.x, beta0, cfg.sigma_eta, rng);
    for (DesignData* s : {&t.train, &t.val, &t.test}) {
        s->beta0 = beta0;
        s->sigma_eta = cfg.sigma_eta;
    }
    return t;
}

MarchenkoPastur marchenko_pastur(double gamma, const std::vector<double>& lambda_grid) {
    if (!(gamma > 0.0)) throw std::invalid_argument("marchenko_pastur: gamma must be positive");
    MarchenkoPastur mp;
    const double sq = std::sqrt(gamma);
    mp.edge_lo = (1.0 - sq) * (1.0 - sq);
    mp.edge_hi = (1.0 + sq) * (1.0 + sq);
    mp.mass_at_zero = std::max(0.0, 1.0 - 1.0 / gamma);
    mp.density.reserve(lambda_grid.size());
    for (double lam : lambda_grid) {
        if (lam <= mp.edge_lo || lam >= mp.edge_hi || lam <= 0.0) {
            mp.density.push_back(0.0);
            continue;
        }
        mp.density.push_back(std::sqrt((mp.edge_hi - lam) * (lam - mp.edge_lo)) /
                             (2.0 * M_PI * gamma * lam));
    }
    return mp;
}

FilterSpec FilterFamily::instantiate(double grid_value) const {
    if (!(grid_value > 0.0))
        throw std::invalid_argument("filter family: grid value must be positive");
    switch (kind) {
        case Kind::Ridge:
            return FilterSpec::ridge(grid_value);
        case Kind::GammaRenewal:
            return FilterSpec::renewal(ResetLaw::gamma(shape, 1.0 / grid_value));
        case Kind::Periodic:
            return FilterSpec::renewal(ResetLaw::deterministic(1.0 / grid_value));
        case Kind::SharpCutoff:
            return FilterSpec::sharp_cutoff(grid_value);
    }
    throw std::logic_error("filter family: unreachable");
}

namespace {
[[noreturn]] void throw_unknown_method(const std::string& name) {
    throw std::invalid_argument("unknown method '" + name +
                                "' (valid: ridge, exponential, erlang-<k>, periodic, cutoff)");
}
}  // namespace

FilterFamily FilterFamily::parse(const std::string& name) {
    FilterFamily f;
    f.label = name;
    if (name == "ridge") {
        f.kind = Kind::Ridge;
        return f;
    }
    if (name == "exponential" || name == "poisson" || name == "erlang-1") {
        f.kind = Kind::GammaRenewal;
        f.shape = 1.0;
        return f;
    }
    if (name == "periodic") {
        f.kind = Kind::Periodic;
        return f;
    }
    if (name == "cutoff") {
        f.kind = Kind::SharpCutoff;
        return f;
    }
    if (name.rfind("erlang-", 0) == 0) {
        const std::string num = name.substr(7);
        std::size_t pos = 0;
        int k = 0;
        try {
            k = std::stoi(num, &pos);
        } catch (const std::exception&) {
            throw_unknown_method(name);
        }
        if (pos != num.size() || k < 1) throw_unknown_method(name);
        f.kind = Kind::GammaRenewal;
        f.shape = static_cast<double>(k);
        return f;
    }
    throw_unknown_method(name);
}

namespace {

// Precomputed per-trial state shared by every family: the spectral model of
// the train split and validation/test features rotated into its eigenbasis.
struct TrialWorkspace {
    SpectralModel model;
    Matrix p_val, p_test;  // X V
    Vector y_val, y_test;
    double hessian_scale = 1.0;

    TrialWorkspace(const DataTriple& data, double scale) : hessian_scale(scale) {
        model = build_spectral_model(data.train);
        p_val = data.val.x * model.v;
        p_test = data.test.x * model.v;
        y_val = data.val.y;
        y_test = data.test.y;
    }

    Vector coeffs(const FilterSpec& f) const {
        Vector c(model.dim());
        for (int i = 0; i < model.dim(); ++i)
            c[i] = model.in_nullspace(i)
                       ? 0.0
                       : f.value(model.mu[i] * hessian_scale) * model.w_star_tilde[i];
        return c;
    }

    static double mse(const Matrix& p, const Vector& y, const Vector& c) {
        return (p * c - y).squaredNorm() / static_cast<double>(y.size());
    }

    double val_mse(const FilterSpec& f) const { return mse(p_val, y_val, coeffs(f)); }
    double test_mse(const FilterSpec& f) const { return mse(p_test, y_test, coeffs(f)); }
};

TuneResult tune_with_workspace(const TrialWorkspace& ws, const FilterFamily& family,
                               const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("tune: empty grid");
    TuneResult best;
    best.best_val_mse = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double mse = ws.val_mse(family.instantiate(grid[i]));
        if (mse < best.best_val_mse) {  // strict: ties keep the smaller parameter
            best.best_val_mse = mse;
            best.best_param = grid[i];
            best.best_index = static_cast<int>(i);
        }
    }
    return best;
}

struct TrialOutcome {
    std::vector<double> test_mse;    // per method
    std::vector<double> best_param;  // per method
};

std::vector<FilterFamily> parse_methods(const std::vector<std::string>& methods) {
    if (methods.empty()) throw std::invalid_argument("sweep: empty method list");
    std::vector<FilterFamily> fams;
    fams.reserve(methods.size());
    bool has_ridge = false;
    for (const auto& m : methods) {
        fams.push_back(FilterFamily::parse(m));
        has_ridge = has_ridge || m == "ridge";
    }
    if (!has_ridge)
        throw std::invalid_argument("sweep: method list must include 'ridge' (paired baseline)");
    return fams;
}

SweepPoint summarize_point(double sweep_value, const std::vector<FilterFamily>& fams,
                           const std::vector<std::string>& methods,
                           const std::vector<TrialOutcome>& outcomes, bool keep_detail) {
    const int trials = static_cast<int>(outcomes.size());
    std::size_t ridge_idx = 0;
    for (std::size_t f = 0; f < methods.size(); ++f)
        if (methods[f] == "ridge") ridge_idx = f;

    SweepPoint pt;
    pt.sweep_value = sweep_value;
    pt.trials = trials;
    for (std::size_t f = 0; f < fams.size(); ++f) {
        MethodSummary s;
        s.method = methods[f];
        double mse_sum = 0.0;
        std::vector<double> gains(trials);
        for (int t = 0; t < trials; ++t) {
            mse_sum += outcomes[t].test_mse[f];
            const double ref = outcomes[t].test_mse[ridge_idx];
            gains[t] = (ref - outcomes[t].test_mse[f]) / ref;
        }
        s.mean_mse = mse_sum / trials;
        if (f == ridge_idx) {
            s.gain_pct = 0.0;  // exact zero by pairing
            s.se_gain_pct = 0.0;
        } else {
            double mean_gain = 0.0;
            for (double g : gains) mean_gain += g;
            mean_gain /= trials;
            double var = 0.0;
            for (double g : gains) var += (g - mean_gain) * (g - mean_gain);
            var = trials > 1 ? var / (trials - 1) : 0.0;
            s.gain_pct = 100.0 * mean_gain;
            s.se_gain_pct = 100.0 * std::sqrt(var / trials);
        }
        pt.methods.push_back(s);
    }
    if (keep_detail) {
        for (int t = 0; t < trials; ++t)
            for (std::size_t f = 0; f < fams.size(); ++f)
                pt.detail.push_back(
                    {t, methods[f], outcomes[t].test_mse[f], outcomes[t].best_param[f]});
    }
    return pt;
}

}  // namespace

SweepResult run_spiked_sweep(const SpikedConfig& cfg, const std::vector<std::string>& methods,
                             HessianConvention convention, int threads, bool keep_detail) {
    if (cfg.trials < 2) throw std::invalid_argument("sweep: need at least 2 trials");
    if (cfg.gamma_grid.empty() || cfg.tuning_grid.empty())
        throw std::invalid_argument("sweep: empty gamma or tuning grid");
    const auto fams = parse_methods(methods);
    const double scale =
        convention == HessianConvention::Normalized ? 1.0 / cfg.n_train : 1.0;

    SweepResult result;
    result.experiment = "spiked";
    result.base_seed = cfg.base_seed;
    {
        nlohmann::json fingerprint{{"kind", "spiked"},
                                   {"n", {cfg.n_train, cfg.n_val, cfg.n_test}},
                                   {"spikes", {cfg.spike_strengths[0], cfg.spike_strengths[1]}},
                                   {"coeffs", {cfg.spike_coeffs[0], cfg.spike_coeffs[1]}},
                                   {"sigma_eta", cfg.sigma_eta},
                                   {"gammas", cfg.gamma_grid},
                                   {"grid_size", cfg.tuning_grid.size()},
                                   {"trials", cfg.trials},
                                   {"seed", cfg.base_seed},
                                   {"normalized", scale != 1.0},
                                   {"methods", methods}};
        result.config_hash = fnv1a_hex(fingerprint.dump());
    }

    for (double gamma : cfg.gamma_grid) {
        std::vector<TrialOutcome> outcomes(cfg.trials);
        parallel_for(static_cast<std::size_t>(cfg.trials), threads, [&](std::size_t t) {
            Rng rng(cfg.base_seed + static_cast<std::uint64_t>(t));
            const DataTriple data = gen_spiked(cfg, gamma, rng);
            const TrialWorkspace ws(data, scale);
            TrialOutcome& out = outcomes[t];
            out.test_mse.resize(fams.size());
            out.best_param.resize(fams.size());
            for (std::size_t f = 0; f < fams.size(); ++f) {
                const TuneResult tuned = tune_with_workspace(ws, fams[f], cfg.tuning_grid);
                out.best_param[f] = tuned.best_param;
                out.test_mse[f] = ws.test_mse(fams[f].instantiate(tuned.best_param));
            }
        });
        result.points.push_back(summarize_point(gamma, fams, methods, outcomes, keep_detail));
    }
    return result;
}

SweepResult run_block_sweep(const BlockConfig& cfg, const std::vector<std::string>& methods,
                            HessianConvention convention, int threads, bool keep_detail) {
    if (cfg.trials < 2) throw std::invalid_argument("sweep: need at least 2 trials");
    if (cfg.block_grid.empty() || cfg.tuning_grid.empty())
        throw std::invalid_argument("sweep: empty block or tuning grid");
    const auto fams = parse_methods(methods);
    const double scale =
        convention == HessianConvention::Normalized ? 1.0 / cfg.n_train : 1.0;

    SweepResult result;
    result.experiment = "block";
    result.base_seed = cfg.base_seed;
    {
        nlohmann::json fingerprint{{"kind", "block"},
                                   {"n", {cfg.n_train, cfg.n_val, cfg.n_test}},
                                   {"widths", {cfg.signal_width, cfg.nuisance_width}},
                                   {"rho", {cfg.rho_sig, cfg.rho_nui, cfg.rho_cross}},
                                   {"coeffs", cfg.signal_coeffs},
                                   {"sigma_eta", cfg.sigma_eta},
                                   {"blocks", cfg.block_grid},
                                   {"grid_size", cfg.tuning_grid.size()},
                                   {"trials", cfg.trials},
                                   {"seed", cfg.base_seed},
                                   {"normalized", scale != 1.0},
                                   {"methods", methods}};
        result.config_hash = fnv1a_hex(fingerprint.dump());
    }

    for (int n_blocks : cfg.block_grid) {
        std::vector<TrialOutcome> outcomes(cfg.trials);
        parallel_for(static_cast<std::size_t>(cfg.trials), threads, [&](std::size_t t) {
            Rng rng(cfg.base_seed + static_cast<std::uint64_t>(t));
            const DataTriple data = gen_block(cfg, n_blocks, rng);
            const TrialWorkspace ws(data, scale);
            TrialOutcome& out = outcomes[t];
            out.test_mse.resize(fams.size());
            out.best_param.resize(fams.size());
            for (std::size_t f = 0; f < fams.size(); ++f) {
                const TuneResult tuned = tune_with_workspace(ws, fams[f], cfg.tuning_grid);
                out.best_param[f] = tuned.best_param;
                out.test_mse[f] = ws.test_mse(fams[f].instantiate(tuned.best_param));
            }
        });
        result.points.push_back(
            summarize_point(static_cast<double>(n_blocks), fams, methods, outcomes, keep_detail));
    }
    return result;
}

TuneResult tune_on_validation(const DesignData& train, const DesignData& val,
                              const FilterFamily& family, const std::vector<double>& grid,
                              double hessian_scale) {
    if (!(hessian_scale > 0.0))
        throw std::invalid_argument("tune: hessian_scale must be positive");
    DataTriple data;
    data.train = train;
    data.val = val;
    data.test = val;  // unused by tuning
    const TrialWorkspace ws(data, hessian_scale);
    return tune_with_workspace(ws, family, grid);
}

nlohmann::json to_json(const SweepResult& r) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& pt : r.points) {
        nlohmann::json methods = nlohmann::json::array();
        for (const auto& m : pt.methods)
            methods.push_back({{"method", m.method},
                               {"mean_mse", m.mean_mse},
                               {"gain_pct", m.gain_pct},
                               {"se_gain_pct", m.se_gain_pct}});
        points.push_back({{"sweep_value", pt.sweep_value},
                          {"trials", pt.trials},
                          {"methods", methods}});
    }
    return {{"experiment", r.experiment},
            {"base_seed", r.base_seed},
            {"config_hash", r.config_hash},
            {"points", points}};
}

}  // namespace resetridge
