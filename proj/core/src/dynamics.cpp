#include "resetridge/dynamics.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "resetridge/parallel.hpp"

namespace resetridge {

namespace {

// (1 - e^{-s a}) / s with the continuous limit a at s = 0
inline double relax_kernel(double s, double a) {
    const double x = s * a;
    if (x < 1e-8) return a * (1.0 - 0.5 * x);
    return -std::expm1(-x) / s;
}

void check_noise(const SpectralModel& m, const NoiseModel& noise) {
    if (noise.dim() != m.dim())
        throw std::invalid_argument("noise model dimension does not match the spectral model");
}

// draw from N(mean, C̃(age)) given precomputed mean; general covariance path
Vector sample_conditional(const SpectralModel& m, const NoiseModel& noise, double age,
                          const Vector& mean, Rng& rng) {
    const int d = m.dim();
    if (noise.is_zero() || age == 0.0) return mean;
    if (noise.is_diagonal()) {
        Vector out = mean;
        for (int i = 0; i < d; ++i) {
            const double var = noise.sigma_tilde(i, i) * relax_kernel(2.0 * m.mu[i], age);
            if (var > 0.0) out[i] += std::sqrt(var) * rng.normal();
        }
        return out;
    }
    Matrix c(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            c(i, j) = noise.sigma_tilde(i, j) * relax_kernel(m.mu[i] + m.mu[j], age);
    Eigen::SelfAdjointEigenSolver<Matrix> es(c);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("conditional covariance: eigendecomposition failed");
    const double scale = 1.0 + c.cwiseAbs().maxCoeff();
    Vector lam = es.eigenvalues();
    for (int i = 0; i < d; ++i) {
        if (lam[i] < -1e-10 * scale)
            throw std::runtime_error("conditional covariance is not PSD");
        lam[i] = std::sqrt(std::max(lam[i], 0.0));
    }
    Vector z(d);
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    // symmetric square root U diag(sqrt(lam)) Uᵀ
    return mean + es.eigenvectors() * lam.asDiagonal() * (es.eigenvectors().transpose() * z);
}

}  // namespace

NoiseModel NoiseModel::zero(int d) {
    if (d < 1) throw std::invalid_argument("noise model: dimension must be >= 1");
    NoiseModel n;
    n.sigma_tilde = Matrix::Zero(d, d);
    n.isotropic = true;
    n.level = 0.0;
    return n;
}

NoiseModel NoiseModel::make_isotropic(int d, double level) {
    if (d < 1) throw std::invalid_argument("noise model: dimension must be >= 1");
    if (!(level >= 0.0) || !std::isfinite(level))
        throw std::invalid_argument("noise model: level must be >= 0 and finite");
    NoiseModel n;
    n.sigma_tilde = level * Matrix::Identity(d, d);
    n.isotropic = true;
    n.level = level;
    return n;
}

NoiseModel NoiseModel::from_matrix(Matrix sigma_tilde) {
    if (sigma_tilde.rows() != sigma_tilde.cols() || sigma_tilde.rows() < 1)
        throw std::invalid_argument("noise model: covariance must be square and non-empty");
    if (!sigma_tilde.allFinite())
        throw std::invalid_argument("noise model: covariance must be finite");
    const double scale = 1.0 + sigma_tilde.cwiseAbs().maxCoeff();
    if ((sigma_tilde - sigma_tilde.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("noise model: covariance must be symmetric");
    NoiseModel n;
    n.sigma_tilde = 0.5 * (sigma_tilde + sigma_tilde.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(n.sigma_tilde,
                                             Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("noise model: eigenvalue check failed");
    if (es.eigenvalues().minCoeff() < -1e-10 * scale)
        throw std::invalid_argument("noise model: covariance is not PSD");
    return n;
}

bool NoiseModel::is_zero() const {
    return sigma_tilde.cwiseAbs().maxCoeff() == 0.0;
}

bool NoiseModel::is_diagonal() const {
    const int d = dim();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j && sigma_tilde(i, j) != 0.0) return false;
    return true;
}

Vector gradient_flow_state(const SpectralModel& m, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("gradient_flow_state: t must be >= 0");
    Vector out(m.dim());
    for (int i = 0; i < m.dim(); ++i)
        out[i] = -std::expm1(-m.mu[i] * t) * m.w_star_tilde[i];
    return out;
}

Vector mean_transient(const SpectralModel& m, double r, double t, const Vector& m0_tilde) {
    if (!(r > 0.0)) throw std::invalid_argument("mean_transient: rate must be positive");
    if (!(t >= 0.0)) throw std::invalid_argument("mean_transient: t must be >= 0");
    if (m0_tilde.size() != m.dim())
        throw std::invalid_argument("mean_transient: m0 dimension mismatch");
    Vector out(m.dim());
    for (int i = 0; i < m.dim(); ++i) {
        const double decay = std::exp(-(m.mu[i] + r) * t);
        out[i] = decay * m0_tilde[i] + (1.0 - decay) * m.b_tilde[i] / (m.mu[i] + r);
    }
    return out;
}

Vector ou_conditional_sample(const SpectralModel& m, const NoiseModel& noise, double age,
                             Rng& rng) {
    if (!(age >= 0.0)) throw std::invalid_argument("ou_conditional_sample: age must be >= 0");
    check_noise(m, noise);
    return sample_conditional(m, noise, age, gradient_flow_state(m, age), rng);
}

Vector equilibrium_snapshot(const SpectralModel& m, const ResetLaw& law,
                            const NoiseModel& noise, Rng& rng) {
    check_noise(m, noise);
    const double age = law.sample_equilibrium_age(rng);
    return sample_conditional(m, noise, age, gradient_flow_state(m, age), rng);
}

Trajectory simulate_trajectory(const SpectralModel& m, const ResetLaw& law,
                               const NoiseModel& noise, double horizon, double dt,
                               std::uint64_t seed) {
    if (!(horizon > 0.0) || !(dt > 0.0) || dt > horizon)
        throw std::invalid_argument("simulate_trajectory: need 0 < dt <= horizon");
    check_noise(m, noise);

    Rng rng(seed);
    const int d = m.dim();
    const long steps = static_cast<long>(std::floor(horizon / dt + 1e-9));

    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.resize(steps + 1, d);

    Vector w = Vector::Zero(d);  // eigen-coordinates; process starts at a reset
    traj.times.push_back(0.0);
    traj.states.row(0) = (m.v * w).transpose();

    double t = 0.0;
    double next_reset = law.sample_interval(rng);

    // exact transition over a lag: decay toward b̃/mu plus conditional noise
    auto advance = [&](double lag) {
        if (lag <= 0.0) return;
        Vector mean(d);
        for (int i = 0; i < d; ++i)
            mean[i] = std::exp(-m.mu[i] * lag) * w[i] + m.b_tilde[i] * relax_kernel(m.mu[i], lag);
        w = sample_conditional(m, noise, lag, mean, rng);
    };

    for (long k = 1; k <= steps; ++k) {
        const double t_next = static_cast<double>(k) * dt;
        while (next_reset <= t_next) {
            advance(next_reset - t);
            t = next_reset;
            w.setZero();
            traj.reset_times.push_back(t);
            next_reset = t + law.sample_interval(rng);
        }
        advance(t_next - t);
        t = t_next;
        traj.times.push_back(t);
        traj.states.row(k) = (m.v * w).transpose();
    }
    return traj;
}

SnapshotBatch sample_snapshot_batch(const SpectralModel& m, const ResetLaw& law,
                                    const NoiseModel& noise, int count,
                                    std::uint64_t base_seed, int threads) {
    if (count < 1) throw std::invalid_argument("sample_snapshot_batch: count must be >= 1");
    check_noise(m, noise);

    const auto start = std::chrono::steady_clock::now();
    SnapshotBatch batch;
    batch.base_seed = base_seed;
    batch.law_name = law.name();
    batch.samples.resize(count, m.dim());

    // fixed chunk size => chunk boundaries and seeds do not depend on threads
    constexpr int kChunk = 4096;
    const std::size_t n_chunks = (static_cast<std::size_t>(count) + kChunk - 1) / kChunk;
    parallel_for(n_chunks, threads, [&](std::size_t c) {
        Rng rng(base_seed + static_cast<std::uint64_t>(c));
        const int lo = static_cast<int>(c) * kChunk;
        const int hi = std::min(count, lo + kChunk);
        for (int i = lo; i < hi; ++i)
            batch.samples.row(i) = equilibrium_snapshot(m, law, noise, rng).transpose();
    });

    batch.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return batch;
}

EmpiricalMoments empirical_moments(const Matrix& samples) {
    const long n = samples.rows();
    if (n < 2) throw std::invalid_argument("empirical_moments: need at least 2 samples");
    EmpiricalMoments em;
    em.mean = samples.colwise().mean();
    const Matrix centered = samples.rowwise() - em.mean.transpose();
    em.covariance = centered.transpose() * centered / static_cast<double>(n - 1);
    em.se_mean = (em.covariance.diagonal() / static_cast<double>(n)).cwiseSqrt();
    return em;
}

}  // namespace resetridge
