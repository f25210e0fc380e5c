#include "resetridge/moments.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace resetridge {

namespace {

void check_inputs(const SpectralModel& m, const NoiseModel& noise) {
    if (noise.dim() != m.dim())
        throw std::invalid_argument("covariance: noise dimension does not match the model");
}

void check_component_psd(const Matrix& c, const char* what) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error(std::string(what) + ": eigenvalue check failed");
    const double scale = 1.0 + c.cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-10 * scale)
        throw std::runtime_error(std::string(what) + ": component is not PSD");
}

void finalize(CovarianceDecomposition& cov, const SpectralModel& m) {
    cov.total_tilde = cov.sgd_tilde + cov.timing_tilde;
    cov.total = m.v * cov.total_tilde * m.v.transpose();
    check_component_psd(cov.sgd_tilde, "diffusion covariance");
    check_component_psd(cov.timing_tilde, "timing covariance");
}

// g_S(s)/s with the E[A] limit at s = 0; quadratic guard against cancellation
double filter_over_s(const ResetLaw& law, double s) {
    const double x = s * law.mean_interval();
    if (x < 1e-6) return law.mean_age() - 0.5 * s * law.age_second_moment();
    return law.filter(s) / s;
}

}  // namespace

Vector poisson_stationary_mean(const SpectralModel& m, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("poisson_stationary_mean: rate must be positive");
    return ridge_closed_form(m, r);
}

CovarianceDecomposition poisson_covariance(const SpectralModel& m, double r,
                                           const NoiseModel& noise) {
    if (!(r > 0.0)) throw std::invalid_argument("poisson_covariance: rate must be positive");
    check_inputs(m, noise);
    const int d = m.dim();
    CovarianceDecomposition cov;
    cov.law_name = "poisson(rate=" + std::to_string(r) + ")";
    cov.sgd_tilde.resize(d, d);
    cov.timing_tilde.resize(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double s = m.mu[i] + m.mu[j] + r;
            cov.sgd_tilde(i, j) = noise.sigma_tilde(i, j) / s;
            cov.timing_tilde(i, j) =
                r * m.b_tilde[i] * m.b_tilde[j] / ((m.mu[i] + r) * (m.mu[j] + r) * s);
        }
    }
    finalize(cov, m);
    return cov;
}

double lyapunov_residual(const SpectralModel& m, double r, const NoiseModel& noise,
                         const CovarianceDecomposition& cov, const Vector& mean) {
    if (!(r > 0.0)) throw std::invalid_argument("lyapunov_residual: rate must be positive");
    check_inputs(m, noise);
    if (mean.size() != m.dim())
        throw std::invalid_argument("lyapunov_residual: mean dimension mismatch");
    const int d = m.dim();
    const Matrix a = m.h + 0.5 * r * Matrix::Identity(d, d);
    const Matrix sigma_noise = m.v * noise.sigma_tilde * m.v.transpose();
    const Matrix residual =
        a * cov.total + cov.total * a - r * mean * mean.transpose() - sigma_noise;
    return residual.cwiseAbs().maxCoeff();
}

CovarianceDecomposition renewal_covariance(const SpectralModel& m, const ResetLaw& law,
                                           const NoiseModel& noise) {
    check_inputs(m, noise);
    const int d = m.dim();
    CovarianceDecomposition cov;
    cov.law_name = law.name();

    std::vector<double> h(d);
    for (int i = 0; i < d; ++i) h[i] = law.age_residual(m.mu[i]);

    cov.sgd_tilde.resize(d, d);
    cov.timing_tilde.resize(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            cov.sgd_tilde(i, j) = noise.sigma_tilde(i, j) * filter_over_s(law, m.mu[i] + m.mu[j]);
            cov.timing_tilde(i, j) = m.w_star_tilde[i] * m.w_star_tilde[j] *
                                     (law.age_residual(m.mu[i] + m.mu[j]) - h[i] * h[j]);
        }
    }
    finalize(cov, m);
    return cov;
}

double snr_ratio(const SpectralModel& m, double r, const NoiseModel& noise, int mode) {
    if (!(r > 0.0)) throw std::invalid_argument("snr_ratio: rate must be positive");
    check_inputs(m, noise);
    if (mode < 0 || mode >= m.dim()) throw std::invalid_argument("snr_ratio: mode out of range");
    const double sig = noise.sigma_tilde(mode, mode);
    if (sig == 0.0) return std::numeric_limits<double>::infinity();
    const double mr = m.mu[mode] + r;
    return r * m.b_tilde[mode] * m.b_tilde[mode] / (mr * mr * sig);
}

}  // namespace resetridge
