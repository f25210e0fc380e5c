#include "resetridge/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace resetridge {

namespace {

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " contains non-finite values");
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw std::invalid_argument(std::string(what) + " contains non-finite values");
}

// first entry of v with magnitude above noise decides the sign convention
void fix_sign(Eigen::Ref<Vector> v) {
    for (long j = 0; j < v.size(); ++j) {
        if (std::abs(v[j]) > 1e-12) {
            if (v[j] < 0.0) v = -v;
            return;
        }
    }
}

bool lex_less(const Vector& a, const Vector& b) {
    for (long j = 0; j < a.size(); ++j) {
        if (a[j] < b[j]) return true;
        if (a[j] > b[j]) return false;
    }
    return false;
}

}  // namespace

double default_rank_tol(const Vector& mu) {
    const double mx = mu.size() ? std::max(0.0, mu.maxCoeff()) : 0.0;
    return 1e-10 * mx;
}

SpectralModel build_spectral_model_from_normal(const Matrix& h, const Vector& b,
                                               double rank_tol) {
    if (h.rows() != h.cols()) throw std::invalid_argument("spectral model: H must be square");
    if (b.size() != h.rows()) throw std::invalid_argument("spectral model: b length must match H");
    if (h.rows() == 0) throw std::invalid_argument("spectral model: empty problem");
    require_finite(h, "H");
    require_finite(b, "b");

    const int d = static_cast<int>(h.rows());
    const double h_scale = h.cwiseAbs().maxCoeff();
    const Matrix hs = 0.5 * (h + h.transpose());  // symmetrize round-off

    Eigen::SelfAdjointEigenSolver<Matrix> es(hs);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral model: eigendecomposition failed");

    // reorder descending with deterministic ties
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    Matrix v_raw = es.eigenvectors();
    for (int i = 0; i < d; ++i) fix_sign(v_raw.col(i));
    const Vector ev = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        if (ev[i] != ev[j]) return ev[i] > ev[j];
        return lex_less(v_raw.col(i), v_raw.col(j));
    });

    SpectralModel m;
    m.h = h;
    m.b = b;
    m.mu.resize(d);
    m.v.resize(d, d);
    for (int i = 0; i < d; ++i) {
        m.mu[i] = ev[order[i]];
        m.v.col(i) = v_raw.col(order[i]);
    }

    // H = XᵀX is PSD; anything beyond round-off negative means bad input
    const double clip_tol = 1e-8 * (1.0 + h_scale);
    for (int i = 0; i < d; ++i) {
        if (m.mu[i] < -clip_tol)
            throw std::runtime_error("spectral model: H has a significantly negative eigenvalue");
        if (m.mu[i] < 0.0) m.mu[i] = 0.0;
    }

    m.rank_tol = rank_tol > 0.0 ? rank_tol : default_rank_tol(m.mu);

    // orthonormality / reconstruction self-checks
    const double orth = (m.v.transpose() * m.v - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    if (orth > 1e-10)
        throw std::runtime_error("spectral model: eigenvector orthonormality check failed");
    const double recon =
        (m.v * m.mu.asDiagonal() * m.v.transpose() - hs).cwiseAbs().maxCoeff();
    if (recon > 1e-8 * (1.0 + h_scale))
        throw std::runtime_error("spectral model: eigendecomposition reconstruction check failed");

    m.b_tilde = m.v.transpose() * b;
    m.w_star_tilde = Vector::Zero(d);
    const double b_scale = 1.0 + b.norm();
    for (int i = 0; i < d; ++i) {
        if (m.in_nullspace(i)) {
            // b = Xᵀy is orthogonal to ker(H); a violation signals corrupt input
            if (std::abs(m.b_tilde[i]) > 1e-8 * b_scale)
                throw std::runtime_error(
                    "spectral model: b has a non-negligible nullspace component");
        } else {
            m.w_star_tilde[i] = m.b_tilde[i] / m.mu[i];
        }
    }
    return m;
}

SpectralModel build_spectral_model(const DesignData& data, double rank_tol) {
    if (data.x.rows() < 1 || data.x.cols() < 1)
        throw std::invalid_argument("spectral model: design must be non-empty");
    if (data.y.size() != data.x.rows())
        throw std::invalid_argument("spectral model: y length must match rows of X");
    require_finite(data.x, "X");
    require_finite(data.y, "y");
    const Matrix h = data.x.transpose() * data.x;
    const Vector b = data.x.transpose() * data.y;
    return build_spectral_model_from_normal(h, b, rank_tol);
}

SpectralModel model_from_spectrum(const Vector& mu, const Matrix& v,
                                  const Vector& w_star_tilde) {
    const int d = static_cast<int>(mu.size());
    if (d == 0) throw std::invalid_argument("model_from_spectrum: empty spectrum");
    if (v.rows() != d || v.cols() != d)
        throw std::invalid_argument("model_from_spectrum: V must be d x d");
    if (w_star_tilde.size() != d)
        throw std::invalid_argument("model_from_spectrum: w* length mismatch");
    require_finite(mu, "mu");
    require_finite(v, "V");
    require_finite(w_star_tilde, "w*");
    for (int i = 0; i < d; ++i)
        if (mu[i] < 0.0) throw std::invalid_argument("model_from_spectrum: mu must be >= 0");
    for (int i = 1; i < d; ++i)
        if (mu[i] > mu[i - 1])
            throw std::invalid_argument("model_from_spectrum: mu must be sorted descending");
    const double orth = (v.transpose() * v - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    if (orth > 1e-10)
        throw std::invalid_argument("model_from_spectrum: V columns must be orthonormal");

    SpectralModel m;
    m.mu = mu;
    m.v = v;
    m.rank_tol = default_rank_tol(mu);
    m.w_star_tilde = w_star_tilde;
    m.b_tilde = mu.cwiseProduct(w_star_tilde);
    for (int i = 0; i < d; ++i)
        if (m.in_nullspace(i)) m.w_star_tilde[i] = 0.0;  // nullspace carries no signal
    m.h = v * mu.asDiagonal() * v.transpose();
    m.b = v * m.b_tilde;
    return m;
}

Vector min_norm_ols(const SpectralModel& m) { return m.v * m.w_star_tilde; }

Vector ridge_closed_form(const SpectralModel& m, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("ridge: lambda must be positive");
    Vector shrunk(m.dim());
    for (int i = 0; i < m.dim(); ++i)
        shrunk[i] = m.mu[i] / (m.mu[i] + lambda) * m.w_star_tilde[i];
    return m.v * shrunk;
}

}  // namespace resetridge
