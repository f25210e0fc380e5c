// reset_ridge: command-line front end for the spectral resetting library.
//
// One binary, one subcommand per capability. Every subcommand reads a JSON
// config, writes CSV/JSON into --out, and is deterministic given
// (config, seed, thread count). Exit codes: 0 success, 1 check/computation
// failure, 2 usage or config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "resetridge/dynamics.hpp"
#include "resetridge/experiments.hpp"
#include "resetridge/filters.hpp"
#include "resetridge/io.hpp"
#include "resetridge/moments.hpp"
#include "resetridge/risk.hpp"
#include "resetridge/verify.hpp"

namespace rr = resetridge;
using nlohmann::json;

namespace {

struct Common {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 42;
    bool seed_given = false;
    int threads = 0;
};

void add_common(CLI::App* sub, Common& c, bool config_required = true) {
    auto* cfg = sub->add_option("--config", c.config_path, "JSON config file");
    if (config_required) cfg->required();
    sub->add_option("--out", c.out_dir, "output directory (created if missing)");
    sub->add_option("--seed", c.seed, "base seed; overrides RESET_RIDGE_SEED and the config")
        ->each([&c](const std::string&) { c.seed_given = true; });
    sub->add_option("--threads", c.threads, "worker thread cap; 0 = all cores");
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config is not valid JSON (" + path + "): " + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config root must be a JSON object");
    return j;
}

// seed priority: --seed flag, then RESET_RIDGE_SEED, then config, then 42
std::uint64_t resolve_seed(const Common& c, const json* cfg) {
    if (c.seed_given) return c.seed;
    if (const char* env = std::getenv("RESET_RIDGE_SEED")) {
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(env, &pos);
            if (pos != std::string(env).size()) throw std::invalid_argument("junk");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("RESET_RIDGE_SEED is not an unsigned "
                                                    "integer: '") +
                                        env + "'");
        }
    }
    if (cfg && cfg->contains("seed")) {
        if (!cfg->at("seed").is_number_unsigned())
            throw std::invalid_argument("config key 'seed' must be an unsigned integer");
        return cfg->at("seed").get<std::uint64_t>();
    }
    return 42;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw std::invalid_argument("cannot create output directory: " + dir);
}

std::string out_path(const Common& c, const std::string& name) {
    return (std::filesystem::path(c.out_dir) / name).string();
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok)
            throw std::invalid_argument("unknown config key '" + it.key() + "' in " + where);
    }
}

double need_number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw std::invalid_argument(where + ": missing numeric key '" + key + "'");
    return j.at(key).get<double>();
}

std::vector<double> need_number_array(const json& j, const char* key,
                                      const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_array())
        throw std::invalid_argument(where + ": missing array key '" + key + "'");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number())
            throw std::invalid_argument(where + ": array '" + key + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

// grid spec: either {"values":[...]} or {"lo":..,"hi":..,"n":..,"spacing":"log"|"linear"}
std::vector<double> parse_grid(const json& j, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": grid must be an object");
    if (j.contains("values")) {
        reject_unknown_keys(j, {"values"}, where);
        return need_number_array(j, "values", where);
    }
    reject_unknown_keys(j, {"lo", "hi", "n", "spacing"}, where);
    const double lo = need_number(j, "lo", where);
    const double hi = need_number(j, "hi", where);
    const int n = static_cast<int>(need_number(j, "n", where));
    std::string spacing = "log";
    if (j.contains("spacing")) spacing = j.at("spacing").get<std::string>();
    if (spacing == "log") return rr::log_spaced(lo, hi, n);
    if (spacing == "linear") return rr::lin_spaced(lo, hi, n);
    throw std::invalid_argument(where + ": spacing must be 'log' or 'linear'");
}

rr::Vector to_vector(const std::vector<double>& v) {
    rr::Vector out(static_cast<long>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<long>(i)] = v[i];
    return out;
}

json matrix_json(const rr::Matrix& m) {
    json rows = json::array();
    for (long i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

// model spec:
//   {"kind":"spectrum","mu":[...],"w_star":[...],"rotate":bool,"rotate_seed":u64}
//   {"kind":"design_csv","path":"data.csv"}
rr::SpectralModel parse_model(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw std::invalid_argument("model: expected an object with a 'kind' key");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "design_csv") {
        reject_unknown_keys(j, {"kind", "path"}, "model");
        if (!j.contains("path") || !j.at("path").is_string())
            throw std::invalid_argument("model: design_csv needs a string 'path'");
        return rr::build_spectral_model(rr::load_design_csv(j.at("path").get<std::string>()));
    }
    if (kind != "spectrum")
        throw std::invalid_argument("model: unknown kind '" + kind +
                                    "' (expected 'spectrum' or 'design_csv')");
    reject_unknown_keys(j, {"kind", "mu", "w_star", "rotate", "rotate_seed"}, "model");
    const rr::Vector mu = to_vector(need_number_array(j, "mu", "model"));
    const rr::Vector w = to_vector(need_number_array(j, "w_star", "model"));
    const long d = mu.size();
    rr::Matrix v = rr::Matrix::Identity(d, d);
    if (j.value("rotate", false)) {
        // a fixed rotation seed keeps the basis stable across sampling seeds
        rr::Rng rng(j.value("rotate_seed", std::uint64_t{2718}));
        rr::Matrix g(d, d);
        for (long i = 0; i < d; ++i)
            for (long k = 0; k < d; ++k) g(i, k) = rng.normal();
        v = Eigen::HouseholderQR<rr::Matrix>(g).householderQ();
    }
    return rr::model_from_spectrum(mu, v, w);
}

// noise spec: {"kind":"none"} | {"kind":"isotropic","level":x}
//           | {"kind":"diagonal","diag":[...]} | {"kind":"matrix","rows":[[..],..]}
rr::NoiseModel parse_noise(const json& j, int d) {
    if (!j.is_object() || !j.contains("kind"))
        throw std::invalid_argument("noise: expected an object with a 'kind' key");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "none") {
        reject_unknown_keys(j, {"kind"}, "noise");
        return rr::NoiseModel::zero(d);
    }
    if (kind == "isotropic") {
        reject_unknown_keys(j, {"kind", "level"}, "noise");
        return rr::NoiseModel::make_isotropic(d, need_number(j, "level", "noise"));
    }
    if (kind == "diagonal") {
        reject_unknown_keys(j, {"kind", "diag"}, "noise");
        const std::vector<double> diag = need_number_array(j, "diag", "noise");
        if (static_cast<int>(diag.size()) != d)
            throw std::invalid_argument("noise: 'diag' length does not match the model");
        rr::Matrix m = rr::Matrix::Zero(d, d);
        for (int i = 0; i < d; ++i) m(i, i) = diag[i];
        return rr::NoiseModel::from_matrix(m);
    }
    if (kind == "matrix") {
        reject_unknown_keys(j, {"kind", "rows"}, "noise");
        if (!j.contains("rows") || !j.at("rows").is_array())
            throw std::invalid_argument("noise: matrix kind needs array key 'rows'");
        const auto& rows = j.at("rows");
        if (static_cast<int>(rows.size()) != d)
            throw std::invalid_argument("noise: 'rows' size does not match the model");
        rr::Matrix m(d, d);
        for (int i = 0; i < d; ++i) {
            if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != d)
                throw std::invalid_argument("noise: 'rows' must be a square numeric matrix");
            for (int k = 0; k < d; ++k) m(i, k) = rows[i][k].get<double>();
        }
        return rr::NoiseModel::from_matrix(m);
    }
    throw std::invalid_argument("noise: unknown kind '" + kind + "'");
}

rr::NoiseModel noise_or_none(const json& cfg, int d) {
    return cfg.contains("noise") ? parse_noise(cfg.at("noise"), d) : rr::NoiseModel::zero(d);
}

void write_string_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open for writing: " + path);
    out << rr::csv_line(header) << '\n';
    for (const auto& row : rows) out << rr::csv_line(row) << '\n';
}

// ── subcommands ──────────────────────────────────────────────────────────────

int cmd_filter_curve(const Common& c) {
    const json cfg = load_config(c.config_path);
    reject_unknown_keys(cfg, {"filters", "grid", "seed"}, "filter-curve config");
    if (!cfg.contains("filters") || !cfg.at("filters").is_array() || cfg.at("filters").empty())
        throw std::invalid_argument("filter-curve config: needs a non-empty 'filters' array");
    if (!cfg.contains("grid"))
        throw std::invalid_argument("filter-curve config: needs a 'grid' object");

    const std::vector<double> grid = parse_grid(cfg.at("grid"), "filter-curve grid");
    std::vector<rr::FilterSpec> filters;
    for (const auto& fj : cfg.at("filters")) filters.push_back(rr::filter_spec_from_json(fj));

    ensure_out_dir(c.out_dir);
    std::vector<std::string> combined_header = {"mu"};
    std::vector<std::vector<double>> combined(grid.size());
    for (std::size_t r = 0; r < grid.size(); ++r) combined[r].push_back(grid[r]);

    for (std::size_t f = 0; f < filters.size(); ++f) {
        const rr::FilterCurve curve = rr::filter_curve(filters[f], grid);
        std::vector<std::vector<double>> rows(grid.size());
        for (std::size_t r = 0; r < grid.size(); ++r) {
            rows[r] = {curve.mu[r], curve.g[r]};
            combined[r].push_back(curve.g[r]);
        }
        rr::write_csv(out_path(c, "filter_curve_" + std::to_string(f + 1) + ".csv"),
                      {"mu", "g"}, rows);
        combined_header.push_back(filters[f].name());
    }
    rr::write_csv(out_path(c, "filter_curves.csv"), combined_header, combined);
    std::cout << "wrote " << filters.size() << " filter curves over " << grid.size()
              << " grid points to " << c.out_dir << "\n";
    return 0;
}

int cmd_verify(const Common& c, int mc_samples_flag) {
    json cfg = json::object();
    if (!c.config_path.empty()) cfg = load_config(c.config_path);
    reject_unknown_keys(cfg, {"seed", "mc_samples"}, "verify config");

    const std::uint64_t seed = resolve_seed(c, &cfg);
    int mc_samples = 100000;
    if (cfg.contains("mc_samples")) mc_samples = cfg.at("mc_samples").get<int>();
    if (mc_samples_flag > 0) mc_samples = mc_samples_flag;

    const std::vector<rr::CheckResult> results =
        rr::run_identity_suite(seed, mc_samples, c.threads);

    bool all_pass = true;
    json report = json::array();
    for (const auto& r : results) {
        all_pass = all_pass && r.pass;
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name
                  << "  metric=" << rr::format_double(r.metric)
                  << "  tol=" << rr::format_double(r.tol);
        if (r.warn) std::cout << "  (warn: " << r.note << ")";
        else if (!r.pass && !r.note.empty()) std::cout << "  (" << r.note << ")";
        std::cout << "\n";
        report.push_back({{"name", r.name},
                          {"pass", r.pass},
                          {"warn", r.warn},
                          {"metric", r.metric},
                          {"tol", r.tol},
                          {"note", r.note}});
    }
    ensure_out_dir(c.out_dir);
    write_json(out_path(c, "verify_report.json"),
               {{"seed", seed}, {"mc_samples", mc_samples}, {"checks", report},
                {"all_pass", all_pass}});
    return all_pass ? 0 : 1;
}

int cmd_experiment(const Common& c, bool detail, bool table_g7) {
    const json cfg = load_config(c.config_path);
    reject_unknown_keys(cfg,
                        {"kind", "methods", "convention", "seed", "trials", "n_train", "n_val",
                         "n_test", "sigma_eta", "gamma_grid", "block_grid", "tuning_grid",
                         "spike_strengths", "spike_coeffs"},
                        "experiment config");
    if (!cfg.contains("kind") || !cfg.at("kind").is_string())
        throw std::invalid_argument("experiment config: needs string key 'kind'");
    const std::string kind = cfg.at("kind").get<std::string>();
    if (kind != "spiked" && kind != "block")
        throw std::invalid_argument("experiment config: kind must be 'spiked' or 'block'");
    if (!cfg.contains("methods") || !cfg.at("methods").is_array())
        throw std::invalid_argument("experiment config: needs array key 'methods'");
    std::vector<std::string> methods;
    for (const auto& m : cfg.at("methods")) methods.push_back(m.get<std::string>());

    rr::HessianConvention convention = rr::HessianConvention::Unnormalized;
    if (cfg.contains("convention")) {
        const std::string conv = cfg.at("convention").get<std::string>();
        if (conv == "normalized")
            convention = rr::HessianConvention::Normalized;
        else if (conv != "unnormalized")
            throw std::invalid_argument(
                "experiment config: convention must be 'unnormalized' or 'normalized'");
    }

    const std::uint64_t seed = resolve_seed(c, &cfg);
    rr::SweepResult result;
    if (kind == "spiked") {
        rr::SpikedConfig sc = rr::SpikedConfig::defaults();
        sc.base_seed = seed;
        if (cfg.contains("trials")) sc.trials = cfg.at("trials").get<int>();
        if (cfg.contains("n_train")) sc.n_train = cfg.at("n_train").get<int>();
        if (cfg.contains("n_val")) sc.n_val = cfg.at("n_val").get<int>();
        if (cfg.contains("n_test")) sc.n_test = cfg.at("n_test").get<int>();
        if (cfg.contains("sigma_eta")) sc.sigma_eta = cfg.at("sigma_eta").get<double>();
        if (cfg.contains("gamma_grid"))
            sc.gamma_grid = need_number_array(cfg, "gamma_grid", "experiment config");
        if (cfg.contains("tuning_grid"))
            sc.tuning_grid = parse_grid(cfg.at("tuning_grid"), "tuning grid");
        if (cfg.contains("spike_strengths")) {
            const auto v = need_number_array(cfg, "spike_strengths", "experiment config");
            if (v.size() != 2)
                throw std::invalid_argument("experiment config: spike_strengths needs 2 values");
            sc.spike_strengths = {v[0], v[1]};
        }
        if (cfg.contains("spike_coeffs")) {
            const auto v = need_number_array(cfg, "spike_coeffs", "experiment config");
            if (v.size() != 2)
                throw std::invalid_argument("experiment config: spike_coeffs needs 2 values");
            sc.spike_coeffs = {v[0], v[1]};
        }
        result = rr::run_spiked_sweep(sc, methods, convention, c.threads, detail);
    } else {
        rr::BlockConfig bc = rr::BlockConfig::defaults();
        bc.base_seed = seed;
        if (cfg.contains("trials")) bc.trials = cfg.at("trials").get<int>();
        if (cfg.contains("n_train")) bc.n_train = cfg.at("n_train").get<int>();
        if (cfg.contains("n_val")) bc.n_val = cfg.at("n_val").get<int>();
        if (cfg.contains("n_test")) bc.n_test = cfg.at("n_test").get<int>();
        if (cfg.contains("sigma_eta")) bc.sigma_eta = cfg.at("sigma_eta").get<double>();
        if (cfg.contains("block_grid")) {
            bc.block_grid.clear();
            for (double v : need_number_array(cfg, "block_grid", "experiment config"))
                bc.block_grid.push_back(static_cast<int>(v));
        }
        if (cfg.contains("tuning_grid"))
            bc.tuning_grid = parse_grid(cfg.at("tuning_grid"), "tuning grid");
        result = rr::run_block_sweep(bc, methods, convention, c.threads, detail);
    }

    ensure_out_dir(c.out_dir);
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& pt : result.points)
            for (const auto& m : pt.methods)
                rows.push_back({rr::format_double(pt.sweep_value), m.method,
                                rr::format_double(m.mean_mse), rr::format_double(m.gain_pct),
                                rr::format_double(m.se_gain_pct), std::to_string(pt.trials)});
        write_string_csv(out_path(c, "sweep.csv"),
                         {"sweep_value", "method", "mean_mse", "gain_pct", "se_gain_pct",
                          "trials"},
                         rows);
    }
    if (detail) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& pt : result.points)
            for (const auto& rec : pt.detail)
                rows.push_back({rr::format_double(pt.sweep_value), std::to_string(rec.trial),
                                rec.method, rr::format_double(rec.test_mse),
                                rr::format_double(rec.best_param)});
        write_string_csv(out_path(c, "sweep_detail.csv"),
                         {"sweep_value", "trial", "method", "test_mse", "best_param"}, rows);
    }
    write_json(out_path(c, "sweep.json"), rr::to_json(result));

    if (table_g7) {
        std::ostringstream table;
        for (const auto& pt : result.points) {
            table << result.experiment << " sweep_value=" << rr::format_double(pt.sweep_value)
                  << " (" << pt.trials << " trials)\n";
            char line[160];
            std::snprintf(line, sizeof(line), "  %-12s %14s %12s %12s\n", "method",
                          "mean test MSE", "gain %", "SE %");
            table << line;
            for (const auto& m : pt.methods) {
                std::snprintf(line, sizeof(line), "  %-12s %14.4f %12.3f %12.3f\n",
                              m.method.c_str(), m.mean_mse, m.gain_pct, m.se_gain_pct);
                table << line;
            }
        }
        std::cout << table.str();
        std::ofstream tf(out_path(c, "summary_table.txt"));
        if (!tf) throw std::invalid_argument("cannot open for writing: summary_table.txt");
        tf << table.str();
    }
    std::cout << "experiment '" << result.experiment << "': " << result.points.size()
              << " sweep points, config hash " << result.config_hash << "\n";
    return 0;
}

int cmd_simulate(const Common& c) {
    const json cfg = load_config(c.config_path);
    reject_unknown_keys(cfg,
                        {"model", "law", "noise", "mode", "horizon", "dt", "count", "seed"},
                        "simulate config");
    if (!cfg.contains("model") || !cfg.contains("law"))
        throw std::invalid_argument("simulate config: needs 'model' and 'law'");
    const rr::SpectralModel model = parse_model(cfg.at("model"));
    const rr::ResetLaw law = rr::reset_law_from_json(cfg.at("law"));
    const rr::NoiseModel noise = noise_or_none(cfg, model.dim());
    const std::uint64_t seed = resolve_seed(c, &cfg);
    const std::string mode = cfg.value("mode", std::string("trajectory"));
    ensure_out_dir(c.out_dir);

    if (mode == "trajectory") {
        const double horizon = need_number(cfg, "horizon", "simulate config");
        const double dt = need_number(cfg, "dt", "simulate config");
        const rr::Trajectory traj = rr::simulate_trajectory(model, law, noise, horizon, dt, seed);

        std::vector<std::string> header = {"t"};
        for (int i = 1; i <= model.dim(); ++i) header.push_back("w" + std::to_string(i));
        std::vector<std::vector<double>> rows(traj.times.size());
        for (std::size_t r = 0; r < traj.times.size(); ++r) {
            rows[r].push_back(traj.times[r]);
            for (int i = 0; i < model.dim(); ++i)
                rows[r].push_back(traj.states(static_cast<long>(r), i));
        }
        rr::write_csv(out_path(c, "trajectory.csv"), header, rows);

        std::vector<std::vector<double>> resets(traj.reset_times.size());
        for (std::size_t r = 0; r < traj.reset_times.size(); ++r)
            resets[r] = {traj.reset_times[r]};
        rr::write_csv(out_path(c, "resets.csv"), {"t_reset"}, resets);
        std::cout << "trajectory: " << traj.times.size() << " grid points, "
                  << traj.reset_times.size() << " resets\n";
        return 0;
    }
    if (mode == "snapshots") {
        const int count = static_cast<int>(need_number(cfg, "count", "simulate config"));
        const rr::SnapshotBatch batch =
            rr::sample_snapshot_batch(model, law, noise, count, seed, c.threads);

        std::vector<std::string> header = {"sample_id"};
        for (int i = 1; i <= model.dim(); ++i) header.push_back("w" + std::to_string(i));
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(batch.count()));
        for (int r = 0; r < batch.count(); ++r) {
            rows[static_cast<std::size_t>(r)].push_back(static_cast<double>(r));
            for (int i = 0; i < model.dim(); ++i)
                rows[static_cast<std::size_t>(r)].push_back(batch.samples(r, i));
        }
        rr::write_csv(out_path(c, "snapshots.csv"), header, rows);

        const rr::EmpiricalMoments em = rr::empirical_moments(batch.samples);
        write_json(out_path(c, "snapshot_moments.json"),
                   {{"law", batch.law_name},
                    {"count", batch.count()},
                    {"mean", std::vector<double>(em.mean.data(), em.mean.data() + em.mean.size())},
                    {"se_mean",
                     std::vector<double>(em.se_mean.data(), em.se_mean.data() + em.se_mean.size())},
                    {"covariance", matrix_json(em.covariance)}});
        std::cout << "snapshots: " << batch.count() << " samples in "
                  << rr::format_double(batch.elapsed_seconds) << "s\n";
        return 0;
    }
    throw std::invalid_argument("simulate config: mode must be 'trajectory' or 'snapshots'");
}

int cmd_moments(const Common& c) {
    const json cfg = load_config(c.config_path);
    reject_unknown_keys(cfg, {"model", "noise", "law", "rate", "seed"}, "moments config");
    if (!cfg.contains("model"))
        throw std::invalid_argument("moments config: needs 'model'");
    if (cfg.contains("law") == cfg.contains("rate"))
        throw std::invalid_argument("moments config: give exactly one of 'law' or 'rate'");
    const rr::SpectralModel model = parse_model(cfg.at("model"));
    const rr::NoiseModel noise = noise_or_none(cfg, model.dim());
    ensure_out_dir(c.out_dir);

    json out;
    if (cfg.contains("rate")) {
        const double rate = need_number(cfg, "rate", "moments config");
        const rr::CovarianceDecomposition cov = rr::poisson_covariance(model, rate, noise);
        const rr::Vector mean = rr::poisson_stationary_mean(model, rate);
        json snr = json::array();
        for (int i = 0; i < model.dim(); ++i)
            snr.push_back(rr::snr_ratio(model, rate, noise, i));
        out = {{"law", cov.law_name},
               {"mean", std::vector<double>(mean.data(), mean.data() + mean.size())},
               {"sgd_tilde", matrix_json(cov.sgd_tilde)},
               {"timing_tilde", matrix_json(cov.timing_tilde)},
               {"total_tilde", matrix_json(cov.total_tilde)},
               {"total", matrix_json(cov.total)},
               {"lyapunov_residual", rr::lyapunov_residual(model, rate, noise, cov, mean)},
               {"snr", snr}};
    } else {
        const rr::ResetLaw law = rr::reset_law_from_json(cfg.at("law"));
        const rr::CovarianceDecomposition cov = rr::renewal_covariance(model, law, noise);
        out = {{"law", cov.law_name},
               {"sgd_tilde", matrix_json(cov.sgd_tilde)},
               {"timing_tilde", matrix_json(cov.timing_tilde)},
               {"total_tilde", matrix_json(cov.total_tilde)},
               {"total", matrix_json(cov.total)}};
    }
    write_json(out_path(c, "moments.json"), out);
    std::cout << "moments written for " << out.at("law").get<std::string>() << "\n";
    return 0;
}

int cmd_risk(const Common& c) {
    const json cfg = load_config(c.config_path);
    reject_unknown_keys(cfg,
                        {"mu", "alpha", "sigma_eta", "noise", "estimator", "rate_grid", "seed"},
                        "risk config");
    const rr::Vector mu = to_vector(need_number_array(cfg, "mu", "risk config"));
    const rr::Vector alpha = to_vector(need_number_array(cfg, "alpha", "risk config"));
    const double sigma_eta = cfg.value("sigma_eta", 0.0);
    const rr::NoiseModel noise = noise_or_none(cfg, static_cast<int>(mu.size()));
    if (!cfg.contains("estimator"))
        throw std::invalid_argument("risk config: needs an 'estimator' object");
    const json& est = cfg.at("estimator");
    if (!est.is_object() || !est.contains("kind"))
        throw std::invalid_argument("risk config: estimator needs a 'kind'");
    const std::string kind = est.at("kind").get<std::string>();
    ensure_out_dir(c.out_dir);

    const auto eval = [&](double rate) -> rr::RiskReport {
        if (kind == "poisson") return rr::poisson_total_risk(mu, alpha, sigma_eta, noise, rate);
        const rr::Vector b_tilde = to_vector(need_number_array(est, "b_tilde", "estimator"));
        return rr::poisson_conditional_risk(mu, b_tilde, alpha, noise, rate);
    };

    rr::RiskReport report;
    if (kind == "ridge") {
        reject_unknown_keys(est, {"kind", "lambda"}, "estimator");
        report = rr::ridge_risk(mu, alpha, sigma_eta, need_number(est, "lambda", "estimator"));
    } else if (kind == "renewal") {
        reject_unknown_keys(est, {"kind", "law"}, "estimator");
        if (!est.contains("law"))
            throw std::invalid_argument("risk config: renewal estimator needs a 'law'");
        report = rr::renewal_snapshot_risk(mu, alpha, sigma_eta, noise,
                                           rr::reset_law_from_json(est.at("law")));
    } else if (kind == "poisson" || kind == "poisson_conditional") {
        reject_unknown_keys(est, {"kind", "rate", "b_tilde"}, "estimator");
        report = eval(need_number(est, "rate", "estimator"));
    } else {
        throw std::invalid_argument("risk config: unknown estimator kind '" + kind + "'");
    }
    write_json(out_path(c, "risk_report.json"), rr::to_json(report));

    if (cfg.contains("rate_grid")) {
        if (kind != "poisson" && kind != "poisson_conditional")
            throw std::invalid_argument(
                "risk config: rate_grid only applies to poisson estimators");
        const std::vector<double> grid = parse_grid(cfg.at("rate_grid"), "rate grid");
        std::vector<std::vector<double>> rows;
        rows.reserve(grid.size());
        for (double r : grid) {
            const rr::RiskReport pt = eval(r);
            rows.push_back({r, pt.bias_sq_total, pt.obs_var_total, pt.sgd_var_total,
                            pt.timing_var_total, pt.total});
        }
        rr::write_csv(out_path(c, "risk_curve.csv"),
                      {"r", "bias_sq", "obs_var", "sgd_var", "timing_var", "total"}, rows);
    }
    std::cout << "risk total " << rr::format_double(report.total) << " ("
              << kind << ")\n";
    return 0;
}

int cmd_optimal_rate(const Common& c) {
    const json cfg = load_config(c.config_path);
    reject_unknown_keys(cfg, {"mu", "alpha", "sigma_eta", "noise", "b_tilde", "r_grid", "seed"},
                        "optimal-rate config");
    const rr::Vector mu = to_vector(need_number_array(cfg, "mu", "optimal-rate config"));
    const rr::Vector alpha = to_vector(need_number_array(cfg, "alpha", "optimal-rate config"));
    const double sigma_eta = cfg.value("sigma_eta", 0.0);
    const rr::NoiseModel noise = noise_or_none(cfg, static_cast<int>(mu.size()));
    if (!cfg.contains("r_grid"))
        throw std::invalid_argument("optimal-rate config: needs an 'r_grid'");
    const std::vector<double> grid = parse_grid(cfg.at("r_grid"), "rate grid");

    rr::OptimalRate opt;
    if (cfg.contains("b_tilde")) {
        const rr::Vector b_tilde =
            to_vector(need_number_array(cfg, "b_tilde", "optimal-rate config"));
        opt = rr::optimal_poisson_rate_conditional(mu, b_tilde, alpha, noise, grid);
    } else {
        opt = rr::optimal_poisson_rate(mu, alpha, sigma_eta, noise, grid);
    }
    ensure_out_dir(c.out_dir);
    write_json(out_path(c, "optimal_rate.json"),
               {{"r_star", opt.r_star},
                {"risk", opt.risk},
                {"boundary", opt.boundary},
                {"foc_residual", opt.foc_residual}});
    std::cout << "r_star " << rr::format_double(opt.r_star) << " risk "
              << rr::format_double(opt.risk) << (opt.boundary ? " (boundary)" : "") << "\n";
    return 0;
}

int cmd_landscape(const Common& c) {
    const json cfg = load_config(c.config_path);
    reject_unknown_keys(cfg, {"k_values", "mu_tau", "nu", "gain_threshold", "seed"},
                        "landscape config");
    if (!cfg.contains("k_values") || !cfg.at("k_values").is_array())
        throw std::invalid_argument("landscape config: needs array key 'k_values'");
    std::vector<double> shapes;
    for (const auto& k : cfg.at("k_values")) {
        if (k.is_number()) {
            shapes.push_back(k.get<double>());
        } else if (k.is_string() &&
                   (k.get<std::string>() == "periodic" || k.get<std::string>() == "inf")) {
            shapes.push_back(std::numeric_limits<double>::infinity());
        } else {
            throw std::invalid_argument(
                "landscape config: k_values entries must be numbers or 'periodic'/'inf'");
        }
    }
    if (!cfg.contains("mu_tau") || !cfg.contains("nu"))
        throw std::invalid_argument("landscape config: needs 'mu_tau' and 'nu' grids");
    const std::vector<double> mu_tau = parse_grid(cfg.at("mu_tau"), "mu_tau grid");
    const std::vector<double> nu = parse_grid(cfg.at("nu"), "nu grid");
    const double threshold = cfg.value("gain_threshold", 0.015);

    const std::vector<rr::LandscapeCell> cells =
        rr::risk_landscape(shapes, mu_tau, nu, threshold, c.threads);

    ensure_out_dir(c.out_dir);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(cells.size());
    for (const auto& cell : cells)
        rows.push_back({rr::format_double(cell.mu_tau), rr::format_double(cell.nu),
                        cell.best_law, rr::format_double(cell.gain)});
    write_string_csv(out_path(c, "landscape.csv"), {"mu_tau", "nu", "best_law", "gain"}, rows);
    std::cout << "landscape: " << cells.size() << " cells\n";
    return 0;
}

int cmd_mismatch(const Common& c) {
    const json cfg = load_config(c.config_path);
    reject_unknown_keys(cfg, {"laws", "mu_weak", "mu_strong", "seed"}, "mismatch config");
    if (!cfg.contains("laws") || !cfg.at("laws").is_array() || cfg.at("laws").empty())
        throw std::invalid_argument("mismatch config: needs a non-empty 'laws' array");
    const double mu_weak = need_number(cfg, "mu_weak", "mismatch config");
    const double mu_strong = need_number(cfg, "mu_strong", "mismatch config");

    ensure_out_dir(c.out_dir);
    std::vector<std::vector<std::string>> rows;
    for (const auto& lj : cfg.at("laws")) {
        const rr::ResetLaw law = rr::reset_law_from_json(lj);
        const rr::TwoModeMismatch m = rr::two_mode_mismatch(law, mu_weak, mu_strong);
        rows.push_back({law.name(), rr::format_double(m.lambda_weak),
                        rr::format_double(m.lambda_strong), rr::format_double(m.relative_gap)});
    }
    write_string_csv(out_path(c, "mismatch.csv"),
                     {"law", "lambda_weak", "lambda_strong", "relative_gap"}, rows);
    std::cout << "mismatch: " << rows.size() << " laws\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral shrinkage via stochastic resetting: filters, moments, risk, "
                 "experiments"};
    app.require_subcommand(1);

    Common curve_c, verify_c, exp_c, sim_c, mom_c, risk_c, opt_c, land_c, mis_c;
    bool detail = false, table_g7 = false;
    int mc_samples = 0;

    add_common(app.add_subcommand("filter-curve", "sample shrinkage filters on a grid"),
               curve_c);
    {
        CLI::App* v = app.add_subcommand("verify", "run the cross-module identity suite");
        add_common(v, verify_c, false);
        v->add_option("--mc-samples", mc_samples,
                      "Monte Carlo sample count for the moment checks");
    }
    {
        CLI::App* e = app.add_subcommand("experiment", "tuned-estimator sweeps on synthetic data");
        add_common(e, exp_c);
        e->add_flag("--detail", detail, "also write per-trial records");
        e->add_flag("--table-g7", table_g7, "print and save a formatted summary table");
    }
    add_common(app.add_subcommand("simulate", "trajectories or stationary snapshots"), sim_c);
    add_common(app.add_subcommand("moments", "stationary covariance decompositions"), mom_c);
    add_common(app.add_subcommand("risk", "risk reports and rate curves"), risk_c);
    add_common(app.add_subcommand("optimal-rate", "search the best resetting rate"), opt_c);
    add_common(app.add_subcommand("landscape", "best-law map over (mu tau, nu) cells"), land_c);
    add_common(app.add_subcommand("mismatch", "per-mode effective-penalty spread of laws"),
               mis_c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand("filter-curve")) return cmd_filter_curve(curve_c);
        if (app.got_subcommand("verify")) return cmd_verify(verify_c, mc_samples);
        if (app.got_subcommand("experiment")) return cmd_experiment(exp_c, detail, table_g7);
        if (app.got_subcommand("simulate")) return cmd_simulate(sim_c);
        if (app.got_subcommand("moments")) return cmd_moments(mom_c);
        if (app.got_subcommand("risk")) return cmd_risk(risk_c);
        if (app.got_subcommand("optimal-rate")) return cmd_optimal_rate(opt_c);
        if (app.got_subcommand("landscape")) return cmd_landscape(land_c);
        if (app.got_subcommand("mismatch")) return cmd_mismatch(mis_c);
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;  // unreachable with require_subcommand(1)
}
