#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>

#include "resetridge/dynamics.hpp"
#include "resetridge/spectral.hpp"

using namespace resetridge;

namespace {

SpectralModel diag_model(const Vector& mu, const Vector& w_star) {
    return model_from_spectrum(mu, Matrix::Identity(mu.size(), mu.size()), w_star);
}

Matrix random_orthonormal(int d, Rng& rng) {
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
    return Eigen::HouseholderQR<Matrix>(g).householderQ();
}

double relax(double s, double a) { return s == 0.0 ? a : -std::expm1(-s * a) / s; }

}  // namespace

TEST_CASE("gradient flow follows the modewise exponential approach") {
    Vector mu(2), w(2);
    mu << 2.0, 1.0;
    w << 1.0, 1.0;
    const SpectralModel m = diag_model(mu, w);

    const Vector at1 = gradient_flow_state(m, 1.0);
    CHECK(at1[0] == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-14));
    CHECK(at1[1] == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));

    const Vector late = gradient_flow_state(m, 50.0);
    CHECK((late - w).cwiseAbs().maxCoeff() < 1e-12);

    CHECK(gradient_flow_state(m, 0.0).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(gradient_flow_state(m, -1.0), std::invalid_argument);
}

TEST_CASE("transient mean halves the stationary value at the half-life") {
    Vector mu(1), w(1);
    mu << 1.0;
    w << 2.0;  // b̃ = mu ⊙ w̃* = 2
    const SpectralModel m = diag_model(mu, w);
    // rate 1: stationary mean b̃/(mu+r) = 1; at t = ln2/2 the decay e^{-2t} = 1/2
    const Vector mt = mean_transient(m, 1.0, 0.5 * std::log(2.0), Vector::Zero(1));
    CHECK(mt[0] == doctest::Approx(0.5).epsilon(1e-14));

    // t = 0 returns the start, t -> inf the stationary mean
    Vector m0(1);
    m0 << -3.0;
    CHECK(mean_transient(m, 1.0, 0.0, m0)[0] == doctest::Approx(-3.0).epsilon(1e-15));
    CHECK(mean_transient(m, 1.0, 60.0, m0)[0] == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(mean_transient(m, 0.0, 1.0, m0), std::invalid_argument);
    CHECK_THROWS_AS(mean_transient(m, 1.0, 1.0, Vector::Zero(2)), std::invalid_argument);
}

TEST_CASE("conditional OU variance saturates at the diffusion balance") {
    Vector mu(1), w(1);
    mu << 1.0;
    w << 1.0;
    const SpectralModel m = diag_model(mu, w);
    const NoiseModel noise = NoiseModel::make_isotropic(1, 1.0);

    Rng rng(3030);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = ou_conditional_sample(m, noise, 20.0, rng)[0];
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    // stationary variance Sigma/(2 mu) = 1/2; var-of-variance ~ var sqrt(2/n)
    CHECK(std::abs(mean - 1.0) <= 3.0 * std::sqrt(0.5 / n) + 1e-9);
    CHECK(std::abs(var - 0.5) <= 4.0 * 0.5 * std::sqrt(2.0 / n));
}

TEST_CASE("correlated conditional covariance matches the relaxation kernel") {
    Vector mu(2), w(2);
    mu << 2.0, 1.0;
    w << 1.0, -1.0;
    const SpectralModel m = diag_model(mu, w);
    Matrix sig(2, 2);
    sig << 1.0, 0.6, 0.6, 1.0;
    const NoiseModel noise = NoiseModel::from_matrix(sig);
    const double age = 0.7;

    Rng rng(5151);
    const int n = 200000;
    Matrix samples(n, 2);
    for (int i = 0; i < n; ++i)
        samples.row(i) = ou_conditional_sample(m, noise, age, rng).transpose();
    const EmpiricalMoments em = empirical_moments(samples);

    for (int i = 0; i < 2; ++i) {
        CHECK(std::abs(em.mean[i] - gradient_flow_state(m, age)[i]) <= 4.0 * em.se_mean[i]);
        for (int j = 0; j < 2; ++j) {
            const double expected = sig(i, j) * relax(mu[i] + mu[j], age);
            CHECK(std::abs(em.covariance(i, j) - expected) <= 0.01);
        }
    }
}

TEST_CASE("noiseless trajectory without resets converges to min-norm OLS") {
    Rng seed_rng(7);
    Vector mu(3), w(3);
    mu << 3.0, 1.0, 0.5;
    w << 1.0, -2.0, 0.5;
    const SpectralModel m = model_from_spectrum(mu, random_orthonormal(3, seed_rng), w);

    const Trajectory traj = simulate_trajectory(m, ResetLaw::deterministic(1e9),
                                                NoiseModel::zero(3), 30.0, 0.5, 11);
    CHECK(traj.reset_times.empty());
    REQUIRE(traj.times.size() == 61);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == doctest::Approx(30.0).epsilon(1e-12));

    const Vector final_state = traj.states.row(traj.states.rows() - 1).transpose();
    const Vector target = min_norm_ols(m);
    // slowest mode leaves e^{-0.5 * 30} ~ 3e-7 of its gap
    CHECK((final_state - target).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + target.norm()));

    // the sampled path matches the deterministic flow at every grid time
    for (int k = 0; k < 10; ++k) {
        const Vector flow = m.v * gradient_flow_state(m, traj.times[k]);
        CHECK((traj.states.row(k).transpose() - flow).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("reset epochs follow the law") {
    Vector mu(1), w(1);
    mu << 1.0;
    w << 1.0;
    const SpectralModel m = diag_model(mu, w);

    // deterministic quarter-period: exactly 40 resets in 10 time units
    const Trajectory det =
        simulate_trajectory(m, ResetLaw::deterministic(0.25), NoiseModel::zero(1), 10.0, 1.0, 5);
    REQUIRE(det.reset_times.size() == 40);
    for (std::size_t i = 0; i < det.reset_times.size(); ++i)
        CHECK(det.reset_times[i] == doctest::Approx(0.25 * (i + 1)).epsilon(1e-9));

    // Poisson count at rate 2 over 500 time units: mean 1000, sd ~ 31.6
    const Trajectory poi =
        simulate_trajectory(m, ResetLaw::exponential(2.0), NoiseModel::zero(1), 500.0, 1.0, 77);
    const double count = static_cast<double>(poi.reset_times.size());
    CHECK(std::abs(count - 1000.0) <= 3.0 * std::sqrt(1000.0));
    for (std::size_t i = 1; i < poi.reset_times.size(); ++i)
        CHECK(poi.reset_times[i] > poi.reset_times[i - 1]);
    CHECK(poi.reset_times.back() <= 500.0);
}

TEST_CASE("long-run time average matches the stationary mean") {
    Vector mu(2), w(2);
    mu << 2.0, 1.0;
    w << 1.0, 1.0;  // b̃ = (2, 1)
    const SpectralModel m = diag_model(mu, w);
    const double r = 1.0;
    Vector target(2);
    target << 2.0 / 3.0, 0.5;  // b̃_i / (mu_i + r)

    const double horizon = 4000.0, dt = 0.05, burn = 200.0;
    const Trajectory traj = simulate_trajectory(m, ResetLaw::exponential(r),
                                                NoiseModel::make_isotropic(2, 0.25), horizon,
                                                dt, 2025);

    // batch means over 100-time-unit blocks, long past the correlation time
    const long rows_per_batch = std::lround(100.0 / dt);
    const long first = std::lround(burn / dt);
    const long n_batches = (static_cast<long>(traj.times.size()) - first) / rows_per_batch;
    REQUIRE(n_batches >= 30);
    for (int coord = 0; coord < 2; ++coord) {
        double bsum = 0.0, bsum2 = 0.0;
        for (long b = 0; b < n_batches; ++b) {
            const double avg = traj.states.col(coord)
                                   .segment(first + b * rows_per_batch, rows_per_batch)
                                   .mean();
            bsum += avg;
            bsum2 += avg * avg;
        }
        const double mean = bsum / n_batches;
        const double se =
            std::sqrt(std::max(bsum2 / n_batches - mean * mean, 0.0) / n_batches);
        CHECK(std::abs(mean - target[coord]) <= 4.0 * se + 1e-6);
    }
}

TEST_CASE("snapshot batches are identical for any thread count") {
    Rng seed_rng(99);
    Vector mu(3), w(3);
    mu << 3.0, 1.0, 0.2;
    w << 1.0, 1.0, 1.0;
    const SpectralModel m = model_from_spectrum(mu, random_orthonormal(3, seed_rng), w);
    const ResetLaw law = ResetLaw::gamma(3.0, 1.0);
    const NoiseModel noise = NoiseModel::make_isotropic(3, 0.3);

    // 10000 is not a chunk multiple, so the tail chunk is exercised too
    const SnapshotBatch one = sample_snapshot_batch(m, law, noise, 10000, 99, 1);
    const SnapshotBatch four = sample_snapshot_batch(m, law, noise, 10000, 99, 4);
    REQUIRE(one.count() == 10000);
    REQUIRE(four.count() == 10000);
    CHECK(std::memcmp(one.samples.data(), four.samples.data(),
                      sizeof(double) * 10000 * 3) == 0);
    CHECK(one.law_name == law.name());

    // different base seed gives a different batch
    const SnapshotBatch other = sample_snapshot_batch(m, law, noise, 10000, 100, 2);
    CHECK((one.samples - other.samples).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("snapshot mean matches the filtered solution for each law") {
    Vector mu(2), w(2);
    mu << 2.0, 0.5;
    w << 1.0, -1.0;
    const SpectralModel m = diag_model(mu, w);
    const NoiseModel noise = NoiseModel::make_isotropic(2, 0.2);

    for (const ResetLaw& law : {ResetLaw::exponential(1.0), ResetLaw::gamma(3.0, 1.0),
                                ResetLaw::deterministic(1.0)}) {
        const SnapshotBatch batch = sample_snapshot_batch(m, law, noise, 60000, 1234, 0);
        const EmpiricalMoments em = empirical_moments(batch.samples);
        for (int i = 0; i < 2; ++i) {
            const double expected = law.filter(mu[i]) * w[i];
            CHECK(std::abs(em.mean[i] - expected) <= 4.0 * em.se_mean[i] + 1e-9);
        }
    }
}

TEST_CASE("empirical moments of a two-point sample") {
    Matrix s(2, 1);
    s << 0.0, 2.0;
    const EmpiricalMoments em = empirical_moments(s);
    CHECK(em.mean[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(em.covariance(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(em.se_mean[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(empirical_moments(Matrix::Zero(1, 3)), std::invalid_argument);
}

TEST_CASE("noise model validation") {
    CHECK_THROWS_AS(NoiseModel::make_isotropic(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(NoiseModel::make_isotropic(2, -1.0), std::invalid_argument);

    Matrix asym(2, 2);
    asym << 1.0, 0.5, 0.2, 1.0;
    CHECK_THROWS_AS(NoiseModel::from_matrix(asym), std::invalid_argument);

    Matrix indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(NoiseModel::from_matrix(indefinite), std::invalid_argument);

    CHECK(NoiseModel::zero(3).is_zero());
    CHECK(NoiseModel::make_isotropic(3, 0.5).is_diagonal());

    Vector mu(2), w(2);
    mu << 1.0, 0.5;
    w << 1.0, 1.0;
    const SpectralModel m = diag_model(mu, w);
    Rng rng(1);
    CHECK_THROWS_AS(ou_conditional_sample(m, NoiseModel::zero(3), 1.0, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        simulate_trajectory(m, ResetLaw::exponential(1.0), NoiseModel::zero(2), 1.0, 2.0, 0),
        std::invalid_argument);
}
