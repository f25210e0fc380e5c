#include <benchmark/benchmark.h>

#include "resetridge/dynamics.hpp"
#include "resetridge/experiments.hpp"
#include "resetridge/filters.hpp"
#include "resetridge/io.hpp"
#include "resetridge/moments.hpp"
#include "resetridge/rng.hpp"
#include "resetridge/spectral.hpp"

namespace rr = resetridge;

namespace {

rr::DesignData random_design(int n, int d, std::uint64_t seed) {
    rr::Rng rng(seed);
    rr::DesignData data;
    data.x = rr::Matrix(n, d);
    data.y = rr::Vector(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) data.x(i, j) = rng.normal();
        data.y[i] = rng.normal();
    }
    return data;
}

rr::SpectralModel bench_model(int d) {
    rr::Vector mu(d), w(d);
    for (int i = 0; i < d; ++i) {
        mu[i] = std::pow(10.0, 2.0 - 4.0 * i / std::max(1, d - 1));
        w[i] = 1.0;
    }
    return rr::model_from_spectrum(mu, rr::Matrix::Identity(d, d), w);
}

void bm_spectral_build(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const rr::DesignData data = random_design(4 * d, d, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rr::build_spectral_model(data));
    }
}
BENCHMARK(bm_spectral_build)->Arg(16)->Arg(64)->Arg(128);

void bm_filter_eval(benchmark::State& state) {
    const rr::FilterSpec f = rr::FilterSpec::renewal(rr::ResetLaw::gamma(3.0, 1.0));
    const std::vector<double> grid = rr::log_spaced(1e-4, 1e4, 512);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rr::filter_curve(f, grid));
    }
}
BENCHMARK(bm_filter_eval);

void bm_snapshot_batch(benchmark::State& state) {
    const rr::SpectralModel m = bench_model(8);
    const rr::ResetLaw law = rr::ResetLaw::gamma(3.0, 1.0);
    const rr::NoiseModel noise = rr::NoiseModel::make_isotropic(8, 0.5);
    const int count = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(rr::sample_snapshot_batch(m, law, noise, count, 11, 1));
    }
    state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(bm_snapshot_batch)->Arg(1024)->Arg(8192);

void bm_renewal_covariance(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const rr::SpectralModel m = bench_model(d);
    const rr::ResetLaw law = rr::ResetLaw::gamma(3.0, 1.0);
    const rr::NoiseModel noise = rr::NoiseModel::make_isotropic(d, 0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rr::renewal_covariance(m, law, noise));
    }
}
BENCHMARK(bm_renewal_covariance)->Arg(16)->Arg(64);

void bm_validation_tuning(benchmark::State& state) {
    rr::SpikedConfig cfg = rr::SpikedConfig::defaults();
    cfg.n_train = 80;
    cfg.n_val = 200;
    cfg.n_test = 2;
    rr::Rng rng(3);
    const rr::DataTriple data = rr::gen_spiked(cfg, 1.5, rng);
    const rr::FilterFamily family = rr::FilterFamily::parse("erlang-3");
    const std::vector<double> grid = rr::log_spaced(1e-3, 1e2, 60);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rr::tune_on_validation(data.train, data.val, family, grid));
    }
}
BENCHMARK(bm_validation_tuning);

}  // namespace

BENCHMARK_MAIN();
