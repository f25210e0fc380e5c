#pragma once

#include <Eigen/Dense>
#include <optional>

namespace resetridge {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A regression data split. Optional ground truth lets prediction-risk code
// separate signal from observation noise.
struct DesignData {
    Matrix x;                         // n x d design
    Vector y;                         // n responses
    std::optional<Vector> beta0;      // ground-truth coefficients, if known
    std::optional<double> sigma_eta;  // observation noise std, if known

    long n() const { return x.rows(); }
    long d() const { return x.cols(); }
};

// Eigenbasis view of the least-squares problem:
//
//   H = XᵀX = V diag(mu) Vᵀ,   b = Xᵀy,   b̃ = Vᵀ b,
//   w̃*_i = b̃_i / mu_i  on modes above rank_tol, 0 on the nullspace,
//
// so w* = V w̃* is the minimum-norm OLS solution. All spectral estimators and
// risk formulas in this library operate on these coordinates.
//
// Conventions enforced at construction:
//   * mu sorted descending, tiny negative round-off clipped to 0;
//   * columns of V orthonormal; sign fixed so the first non-negligible entry
//     of each eigenvector is positive; exact eigenvalue ties broken by
//     lexicographic comparison of the (sign-fixed) eigenvectors;
//   * |b̃_i| on nullspace modes must vanish up to round-off (b = Xᵀy always
//     lies in the column space of H).
struct SpectralModel {
    Vector mu;            // eigenvalues of H, descending, >= 0
    Matrix v;             // eigenvectors, one per column
    Vector b_tilde;       // Vᵀ Xᵀ y
    Vector w_star_tilde;  // min-norm OLS in eigen-coordinates
    Matrix h;             // XᵀX as given
    Vector b;             // Xᵀy as given
    double rank_tol = 0.0;

    int dim() const { return static_cast<int>(mu.size()); }
    bool in_nullspace(int i) const { return mu[i] <= rank_tol; }
    int rank() const {
        int k = 0;
        for (int i = 0; i < dim(); ++i)
            if (!in_nullspace(i)) ++k;
        return k;
    }
};

// Default pseudoinverse threshold: 1e-10 * max(mu).
double default_rank_tol(const Vector& mu);

// Build the model from raw data (H = XᵀX, b = Xᵀy). rank_tol <= 0 selects the
// default. Throws std::invalid_argument on non-finite input or shape mismatch,
// std::runtime_error if the eigensolver fails its own quality checks.
SpectralModel build_spectral_model(const DesignData& data, double rank_tol = -1.0);

// Same, but from precomputed normal equations.
SpectralModel build_spectral_model_from_normal(const Matrix& h, const Vector& b,
                                               double rank_tol = -1.0);

// Synthesizes a model with prescribed spectrum: H = V diag(mu) Vᵀ and
// b̃ = mu ⊙ w̃*. Intended for simulation studies where the eigenbasis is the
// natural parameterization. V must have orthonormal columns.
SpectralModel model_from_spectrum(const Vector& mu, const Matrix& v,
                                  const Vector& w_star_tilde);

// Minimum-norm least squares solution V w̃* (original coordinates).
Vector min_norm_ols(const SpectralModel& m);

// Ridge solution (H + lambda I)^{-1} b computed modewise:
// V diag(mu_i/(mu_i+lambda)) w̃*. lambda must be positive.
Vector ridge_closed_form(const SpectralModel& m, double lambda);

}  // namespace resetridge
