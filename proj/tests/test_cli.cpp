// Integration tests that drive the reset_ridge binary end to end: exit codes,
// file layout, CSV headers, seed precedence, and byte-level determinism across
// thread counts. The binary path is injected by the build.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#ifndef RESET_RIDGE_CLI_PATH
#error "RESET_RIDGE_CLI_PATH must be defined by the build"
#endif

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(bool(in), "cannot open " << p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    REQUIRE(bool(out));
    out << text;
}

RunResult run_cli(const std::string& args, const fs::path& scratch) {
    const fs::path out_file = scratch / "stdout.capture";
    const fs::path err_file = scratch / "stderr.capture";
    const std::string cmd = std::string(RESET_RIDGE_CLI_PATH) + " " + args + " >" +
                            out_file.string() + " 2>" + err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("reset_ridge_cli_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int n = 0;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

}  // namespace

TEST_CASE("help exits zero, missing subcommand exits two") {
    TempDir tmp("help");
    CHECK(run_cli("--help", tmp.path).exit_code == 0);
    CHECK(run_cli("", tmp.path).exit_code == 2);
    CHECK(run_cli("no-such-subcommand", tmp.path).exit_code == 2);
}

TEST_CASE("filter-curve writes per-filter and combined CSVs") {
    TempDir tmp("curve");
    spit(tmp.path / "cfg.json", R"({
      "filters": [
        {"kind": "renewal", "law": {"kind": "exponential", "rate": 2.0}},
        {"kind": "ridge", "lambda": 2.0},
        {"kind": "cutoff", "threshold": 0.5}
      ],
      "grid": {"lo": 1e-3, "hi": 1e2, "n": 40, "spacing": "log"}
    })");
    const fs::path out = tmp.path / "out";
    const RunResult r = run_cli("filter-curve --config " + (tmp.path / "cfg.json").string() +
                                    " --out " + out.string(),
                                tmp.path);
    CHECK(r.exit_code == 0);

    const auto f1 = lines_of(slurp(out / "filter_curve_1.csv"));
    const auto f2 = lines_of(slurp(out / "filter_curve_2.csv"));
    const auto f3 = lines_of(slurp(out / "filter_curve_3.csv"));
    REQUIRE(f1.size() == 41);
    CHECK(f1[0] == "mu,g");
    CHECK(f2[0] == "mu,g");

    // exponential resetting at rate lambda is exactly the ridge shrinker
    for (std::size_t i = 1; i < f1.size(); ++i) CHECK(f1[i] == f2[i]);
    // cutoff column is exactly 0/1
    for (std::size_t i = 1; i < f3.size(); ++i) {
        const auto cells = split_csv(f3[i]);
        REQUIRE(cells.size() == 2);
        const bool zero_or_one = cells[1] == "0" || cells[1] == "1";
        CHECK(zero_or_one);
    }

    const auto combined = lines_of(slurp(out / "filter_curves.csv"));
    REQUIRE(combined.size() == 41);
    const auto header = split_csv(combined[0]);
    REQUIRE(header.size() == 4);
    CHECK(header[0] == "mu");
    CHECK(split_csv(combined[1]).size() == 4);
}

TEST_CASE("filter-curve rejects malformed configs naming the problem") {
    TempDir tmp("curve_bad");
    const fs::path out = tmp.path / "out";

    spit(tmp.path / "notjson.json", "{ this is not json");
    RunResult r = run_cli("filter-curve --config " + (tmp.path / "notjson.json").string() +
                              " --out " + out.string(),
                          tmp.path);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("config error") != std::string::npos);

    spit(tmp.path / "badkey.json", R"({
      "filtres": [{"kind": "ridge", "lambda": 1.0}],
      "grid": {"lo": 0.1, "hi": 1.0, "n": 5}
    })");
    r = run_cli("filter-curve --config " + (tmp.path / "badkey.json").string() + " --out " +
                    out.string(),
                tmp.path);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("filtres") != std::string::npos);

    spit(tmp.path / "badfilter.json", R"({
      "filters": [{"kind": "rigde", "lambda": 1.0}],
      "grid": {"lo": 0.1, "hi": 1.0, "n": 5}
    })");
    r = run_cli("filter-curve --config " + (tmp.path / "badfilter.json").string() + " --out " +
                    out.string(),
                tmp.path);
    CHECK(r.exit_code == 2);

    r = run_cli("filter-curve --config " + (tmp.path / "missing.json").string() + " --out " +
                    out.string(),
                tmp.path);
    CHECK(r.exit_code == 2);
}

TEST_CASE("verify prints a pass table and writes a report") {
    TempDir tmp("verify");
    const fs::path out = tmp.path / "out";
    const RunResult r =
        run_cli("verify --seed 42 --mc-samples 20000 --out " + out.string(), tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(count_occurrences(r.out, "[PASS]") == 5);
    CHECK(count_occurrences(r.out, "[FAIL]") == 0);
    const std::string report = slurp(out / "verify_report.json");
    CHECK(report.find("\"all_pass\": true") != std::string::npos);

    spit(tmp.path / "broken.json", "not json at all");
    CHECK(run_cli("verify --config " + (tmp.path / "broken.json").string() + " --out " +
                      out.string(),
                  tmp.path)
              .exit_code == 2);
}

TEST_CASE("experiment sweep: determinism, pairing, and method validation") {
    TempDir tmp("exp");
    spit(tmp.path / "cfg.json", R"({
      "kind": "spiked",
      "methods": ["ridge", "exponential"],
      "trials": 3,
      "n_train": 24, "n_val": 40, "n_test": 40,
      "gamma_grid": [0.5],
      "tuning_grid": {"lo": 1e-2, "hi": 10.0, "n": 8}
    })");
    const std::string cfg = (tmp.path / "cfg.json").string();
    const fs::path out1 = tmp.path / "t1";
    const fs::path out2 = tmp.path / "t3";

    RunResult r = run_cli("experiment --config " + cfg + " --seed 5 --threads 1 --detail --out " +
                              out1.string(),
                          tmp.path);
    CHECK(r.exit_code == 0);
    r = run_cli("experiment --config " + cfg + " --seed 5 --threads 3 --detail --out " +
                    out2.string(),
                tmp.path);
    CHECK(r.exit_code == 0);

    // byte-identical outputs regardless of the worker count
    CHECK(slurp(out1 / "sweep.csv") == slurp(out2 / "sweep.csv"));
    CHECK(slurp(out1 / "sweep_detail.csv") == slurp(out2 / "sweep_detail.csv"));
    CHECK(slurp(out1 / "sweep.json") == slurp(out2 / "sweep.json"));

    const auto sweep = lines_of(slurp(out1 / "sweep.csv"));
    REQUIRE(sweep.size() == 3);  // header + 2 methods at one sweep point
    CHECK(sweep[0] == "sweep_value,method,mean_mse,gain_pct,se_gain_pct,trials");
    const auto ridge_row = split_csv(sweep[1]);
    REQUIRE(ridge_row.size() == 6);
    CHECK(ridge_row[1] == "ridge");
    CHECK(ridge_row[3] == "0");  // baseline gain is exactly zero
    CHECK(ridge_row[4] == "0");
    CHECK(ridge_row[5] == "3");

    const auto detail = lines_of(slurp(out1 / "sweep_detail.csv"));
    CHECK(detail.size() == 1 + 3 * 2);  // header + trials x methods
    CHECK(detail[0] == "sweep_value,trial,method,test_mse,best_param");

    // a different seed must change the results
    const fs::path out3 = tmp.path / "s6";
    r = run_cli("experiment --config " + cfg + " --seed 6 --out " + out3.string(), tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(slurp(out1 / "sweep.csv") != slurp(out3 / "sweep.csv"));

    // table flag prints the summary
    const fs::path out4 = tmp.path / "tbl";
    r = run_cli("experiment --config " + cfg + " --seed 5 --table-g7 --out " + out4.string(),
                tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("mean test MSE") != std::string::npos);
    CHECK(fs::exists(out4 / "summary_table.txt"));

    // unknown method: exit 2 and the message lists the valid families
    spit(tmp.path / "badmethod.json", R"({
      "kind": "spiked",
      "methods": ["ridge", "frobnicate"],
      "trials": 2,
      "n_train": 24, "n_val": 40, "n_test": 40,
      "gamma_grid": [0.5],
      "tuning_grid": {"lo": 1e-2, "hi": 10.0, "n": 4}
    })");
    r = run_cli("experiment --config " + (tmp.path / "badmethod.json").string() + " --out " +
                    (tmp.path / "bad").string(),
                tmp.path);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("frobnicate") != std::string::npos);
    CHECK(r.err.find("ridge") != std::string::npos);
    CHECK(r.err.find("periodic") != std::string::npos);

    // infeasible sizes: dimension collapses below 2
    spit(tmp.path / "toosmall.json", R"({
      "kind": "spiked",
      "methods": ["ridge"],
      "trials": 2,
      "n_train": 3, "n_val": 10, "n_test": 10,
      "gamma_grid": [0.25],
      "tuning_grid": {"lo": 1e-2, "hi": 10.0, "n": 4}
    })");
    r = run_cli("experiment --config " + (tmp.path / "toosmall.json").string() + " --out " +
                    (tmp.path / "small").string(),
                tmp.path);
    CHECK(r.exit_code == 2);
}

TEST_CASE("simulate trajectory: grid rows and reset epochs") {
    TempDir tmp("traj");
    spit(tmp.path / "cfg.json", R"({
      "model": {"kind": "spectrum", "mu": [3.0, 1.0], "w_star": [1.0, 1.0]},
      "law": {"kind": "deterministic", "period": 0.25},
      "noise": {"kind": "none"},
      "mode": "trajectory",
      "horizon": 2.0,
      "dt": 0.5
    })");
    const fs::path out = tmp.path / "out";
    const RunResult r = run_cli("simulate --config " + (tmp.path / "cfg.json").string() +
                                    " --seed 1 --out " + out.string(),
                                tmp.path);
    CHECK(r.exit_code == 0);

    const auto traj = lines_of(slurp(out / "trajectory.csv"));
    REQUIRE(traj.size() == 6);  // header + horizon/dt + 1 rows
    CHECK(traj[0] == "t,w1,w2");
    CHECK(split_csv(traj[1])[0] == "0");

    const auto resets = lines_of(slurp(out / "resets.csv"));
    REQUIRE(resets.size() == 9);  // header + 8 deterministic epochs in (0, 2]
    CHECK(resets[0] == "t_reset");
    CHECK(std::stod(resets[1]) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::stod(resets[8]) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("simulate snapshots: threads do not change bytes, seeds do") {
    TempDir tmp("snap");
    spit(tmp.path / "cfg.json", R"({
      "model": {"kind": "spectrum", "mu": [2.0, 0.5], "w_star": [1.0, -1.0]},
      "law": {"kind": "gamma", "shape": 3.0, "mean": 1.0},
      "noise": {"kind": "isotropic", "level": 0.3},
      "mode": "snapshots",
      "count": 9000
    })");
    const std::string cfg = (tmp.path / "cfg.json").string();
    const fs::path a = tmp.path / "a";
    const fs::path b = tmp.path / "b";
    const fs::path c = tmp.path / "c";

    CHECK(run_cli("simulate --config " + cfg + " --seed 11 --threads 1 --out " + a.string(),
                  tmp.path)
              .exit_code == 0);
    CHECK(run_cli("simulate --config " + cfg + " --seed 11 --threads 4 --out " + b.string(),
                  tmp.path)
              .exit_code == 0);
    CHECK(run_cli("simulate --config " + cfg + " --seed 12 --threads 4 --out " + c.string(),
                  tmp.path)
              .exit_code == 0);

    const std::string snap_a = slurp(a / "snapshots.csv");
    CHECK(snap_a == slurp(b / "snapshots.csv"));
    CHECK(snap_a != slurp(c / "snapshots.csv"));

    const auto rows = lines_of(snap_a);
    REQUIRE(rows.size() == 9001);
    CHECK(rows[0] == "sample_id,w1,w2");
    CHECK(fs::exists(a / "snapshot_moments.json"));
}

TEST_CASE("seed precedence: flag beats environment beats config default") {
    TempDir tmp("seed");
    spit(tmp.path / "cfg.json", R"({
      "model": {"kind": "spectrum", "mu": [1.0], "w_star": [1.0]},
      "law": {"kind": "exponential", "rate": 1.0},
      "noise": {"kind": "isotropic", "level": 0.5},
      "mode": "snapshots",
      "count": 500,
      "seed": 3
    })");
    const std::string cfg = (tmp.path / "cfg.json").string();
    const fs::path flag_dir = tmp.path / "flag";
    const fs::path env_dir = tmp.path / "env";
    const fs::path env2_dir = tmp.path / "env2";
    const fs::path cfg_dir = tmp.path / "cfgseed";
    const fs::path plain_dir = tmp.path / "plain";

    // --seed 123 with a conflicting env var: the flag wins
    setenv("RESET_RIDGE_SEED", "9999", 1);
    CHECK(run_cli("simulate --config " + cfg + " --seed 123 --out " + flag_dir.string(),
                  tmp.path)
              .exit_code == 0);
    // env alone
    CHECK(run_cli("simulate --config " + cfg + " --out " + env_dir.string(), tmp.path)
              .exit_code == 0);
    setenv("RESET_RIDGE_SEED", "123", 1);
    CHECK(run_cli("simulate --config " + cfg + " --out " + env2_dir.string(), tmp.path)
              .exit_code == 0);
    // junk env value is a config error
    setenv("RESET_RIDGE_SEED", "12x", 1);
    CHECK(run_cli("simulate --config " + cfg + " --out " + plain_dir.string(), tmp.path)
              .exit_code == 2);
    unsetenv("RESET_RIDGE_SEED");
    // no flag, no env: config seed applies
    CHECK(run_cli("simulate --config " + cfg + " --out " + cfg_dir.string(), tmp.path)
              .exit_code == 0);
    // --seed 3 must reproduce the config-seed run
    CHECK(run_cli("simulate --config " + cfg + " --seed 3 --out " + plain_dir.string(),
                  tmp.path)
              .exit_code == 0);

    const std::string flag_bytes = slurp(flag_dir / "snapshots.csv");
    const std::string env_bytes = slurp(env_dir / "snapshots.csv");
    const std::string env2_bytes = slurp(env2_dir / "snapshots.csv");
    CHECK(flag_bytes != env_bytes);    // env 9999 lost to the flag
    CHECK(flag_bytes == env2_bytes);   // env 123 matches --seed 123
    CHECK(slurp(cfg_dir / "snapshots.csv") == slurp(plain_dir / "snapshots.csv"));
}

TEST_CASE("moments subcommand emits closed-form decompositions") {
    TempDir tmp("mom");
    spit(tmp.path / "poisson.json", R"({
      "model": {"kind": "spectrum", "mu": [2.0, 1.0], "w_star": [1.0, 0.5]},
      "noise": {"kind": "isotropic", "level": 0.4},
      "rate": 1.5
    })");
    const fs::path out = tmp.path / "out";
    RunResult r = run_cli("moments --config " + (tmp.path / "poisson.json").string() +
                              " --out " + out.string(),
                          tmp.path);
    CHECK(r.exit_code == 0);
    const std::string mj = slurp(out / "moments.json");
    CHECK(mj.find("\"lyapunov_residual\"") != std::string::npos);
    CHECK(mj.find("poisson") != std::string::npos);

    spit(tmp.path / "renewal.json", R"({
      "model": {"kind": "spectrum", "mu": [2.0, 1.0], "w_star": [1.0, 0.5]},
      "noise": {"kind": "diagonal", "diag": [0.4, 0.2]},
      "law": {"kind": "gamma", "shape": 3.0, "mean": 1.0}
    })");
    r = run_cli("moments --config " + (tmp.path / "renewal.json").string() + " --out " +
                    out.string(),
                tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(slurp(out / "moments.json").find("gamma") != std::string::npos);

    // both law and rate present is ambiguous
    spit(tmp.path / "both.json", R"({
      "model": {"kind": "spectrum", "mu": [1.0], "w_star": [1.0]},
      "rate": 1.0,
      "law": {"kind": "exponential", "rate": 1.0}
    })");
    r = run_cli("moments --config " + (tmp.path / "both.json").string() + " --out " +
                    out.string(),
                tmp.path);
    CHECK(r.exit_code == 2);
}

TEST_CASE("risk subcommand: frozen ridge value and rate curves") {
    TempDir tmp("risk");
    spit(tmp.path / "ridge.json", R"({
      "mu": [4.0, 1.0],
      "alpha": [1.0, 1.0],
      "sigma_eta": 1.0,
      "estimator": {"kind": "ridge", "lambda": 2.0}
    })");
    const fs::path out = tmp.path / "out";
    RunResult r = run_cli("risk --config " + (tmp.path / "ridge.json").string() + " --out " +
                              out.string(),
                          tmp.path);
    CHECK(r.exit_code == 0);
    // two-mode closed form: total risk 7/9
    CHECK(r.out.find("0.7777777777777") != std::string::npos);

    spit(tmp.path / "curve.json", R"({
      "mu": [4.0, 1.0],
      "alpha": [1.0, 1.0],
      "sigma_eta": 1.0,
      "noise": {"kind": "isotropic", "level": 0.2},
      "estimator": {"kind": "poisson", "rate": 2.0},
      "rate_grid": {"lo": 0.1, "hi": 10.0, "n": 25}
    })");
    r = run_cli("risk --config " + (tmp.path / "curve.json").string() + " --out " + out.string(),
                tmp.path);
    CHECK(r.exit_code == 0);
    const auto curve = lines_of(slurp(out / "risk_curve.csv"));
    REQUIRE(curve.size() == 26);
    CHECK(curve[0] == "r,bias_sq,obs_var,sgd_var,timing_var,total");
    CHECK(fs::exists(out / "risk_report.json"));

    spit(tmp.path / "badest.json", R"({
      "mu": [1.0], "alpha": [1.0], "estimator": {"kind": "lasso", "lambda": 1.0}
    })");
    r = run_cli("risk --config " + (tmp.path / "badest.json").string() + " --out " +
                    out.string(),
                tmp.path);
    CHECK(r.exit_code == 2);
}

TEST_CASE("optimal-rate finds an interior optimum") {
    TempDir tmp("opt");
    spit(tmp.path / "cfg.json", R"({
      "mu": [1.0],
      "alpha": [1.0],
      "sigma_eta": 1.0,
      "r_grid": {"lo": 1e-3, "hi": 1e3, "n": 40}
    })");
    const fs::path out = tmp.path / "out";
    const RunResult r = run_cli("optimal-rate --config " + (tmp.path / "cfg.json").string() +
                                    " --out " + out.string(),
                                tmp.path);
    CHECK(r.exit_code == 0);
    const std::string oj = slurp(out / "optimal_rate.json");
    CHECK(oj.find("\"boundary\": false") != std::string::npos);
    CHECK(r.out.find("r_star") != std::string::npos);
}

TEST_CASE("landscape labels an overdamped cell as poisson") {
    TempDir tmp("land");
    spit(tmp.path / "cfg.json", R"({
      "k_values": [1, 3, "periodic"],
      "mu_tau": {"values": [5.0]},
      "nu": {"values": [0.1]}
    })");
    const fs::path out = tmp.path / "out";
    const RunResult r = run_cli("landscape --config " + (tmp.path / "cfg.json").string() +
                                    " --out " + out.string(),
                                tmp.path);
    CHECK(r.exit_code == 0);
    const auto rows = lines_of(slurp(out / "landscape.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "mu_tau,nu,best_law,gain");
    CHECK(split_csv(rows[1])[2] == "poisson");

    // shape grids that omit the exponential member are rejected
    spit(tmp.path / "nok1.json", R"({
      "k_values": [3, "periodic"],
      "mu_tau": {"values": [5.0]},
      "nu": {"values": [0.1]}
    })");
    CHECK(run_cli("landscape --config " + (tmp.path / "nok1.json").string() + " --out " +
                      out.string(),
                  tmp.path)
              .exit_code == 2);
}

TEST_CASE("mismatch reports per-law effective-penalty spread") {
    TempDir tmp("mis");
    spit(tmp.path / "cfg.json", R"({
      "laws": [
        {"kind": "exponential", "rate": 1.0},
        {"kind": "gamma", "shape": 3.0, "mean": 1.0},
        {"kind": "deterministic", "period": 1.0}
      ],
      "mu_weak": 0.1,
      "mu_strong": 10.0
    })");
    const fs::path out = tmp.path / "out";
    const RunResult r = run_cli("mismatch --config " + (tmp.path / "cfg.json").string() +
                                    " --out " + out.string(),
                                tmp.path);
    CHECK(r.exit_code == 0);
    const auto rows = lines_of(slurp(out / "mismatch.csv"));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "law,lambda_weak,lambda_strong,relative_gap");
    // memoryless law: one penalty fits all modes
    CHECK(std::stod(split_csv(rows[1])[3]) < 1e-9);
    // deterministic law has the widest spread
    CHECK(std::stod(split_csv(rows[3])[3]) > std::stod(split_csv(rows[2])[3]));
}

TEST_CASE("design_csv model source and missing-file handling") {
    TempDir tmp("design");
    spit(tmp.path / "data.csv",
         "x1,x2,y\n"
         "1.0,0.0,2.0\n"
         "0.0,1.0,1.0\n"
         "1.0,1.0,3.0\n");
    spit(tmp.path / "cfg.json", std::string(R"({
      "model": {"kind": "design_csv", "path": ")") +
                                    (tmp.path / "data.csv").string() + R"("},
      "rate": 1.0
    })");
    const fs::path out = tmp.path / "out";
    CHECK(run_cli("moments --config " + (tmp.path / "cfg.json").string() + " --out " +
                      out.string(),
                  tmp.path)
              .exit_code == 0);

    spit(tmp.path / "gone.json", R"({
      "model": {"kind": "design_csv", "path": "/nonexistent/file.csv"},
      "rate": 1.0
    })");
    CHECK(run_cli("moments --config " + (tmp.path / "gone.json").string() + " --out " +
                      out.string(),
                  tmp.path)
              .exit_code == 2);

    // unwritable output directory is a usage error
    CHECK(run_cli("moments --config " + (tmp.path / "cfg.json").string() +
                      " --out /proc/not_allowed/x",
                  tmp.path)
              .exit_code == 2);
}
