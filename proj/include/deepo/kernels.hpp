#pragma once

// Dense small-matrix numerics: Lyapunov and Riccati solvers, pseudoinverse,
// extremal singular values and eigenvalues. All functions are pure.

#include <Eigen/Dense>

namespace deepo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Spectral radius max |λ_i(a)|.
double spectral_radius(const Matrix& a);

/// Largest singular value (matrix 2-norm).
double norm2(const Matrix& m);

/// Solves Σ = w + a Σ aᵀ through the Kronecker form (I − a⊗a) vec(Σ) = vec(w).
/// Throws Unstable when ρ(a) ≥ 1 − 1e−9 and Dimension on shape mismatch.
Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& w);

/// Solves the β-modified discrete algebraic Riccati equation
///
///   aᵀHa − β²H − aᵀHb (r + bᵀHb)⁻¹ bᵀHa + q = 0
///
/// by value iteration on the scaled pair (a/β, b). β = 1 gives the standard DARE.
/// Throws NoConvergence when the residual does not reach
/// 1e−9·max(1, ‖H‖) within the iteration cap.
Matrix solve_modified_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                           const Matrix& r, double beta);

/// Residual ‖aᵀHa − β²H − aᵀHb(r + bᵀHb)⁻¹bᵀHa + q‖₂ of a candidate H.
double modified_dare_residual(const Matrix& a, const Matrix& b, const Matrix& q,
                              const Matrix& r, double beta, const Matrix& h);

/// Moore–Penrose pseudoinverse via SVD; singular values below
/// max(rows, cols)·ε·σ_max are treated as zero.
Matrix pseudoinverse(const Matrix& m);

/// Smallest singular value, i.e. σ_min(m) over the min(rows, cols) values.
double min_singular_value(const Matrix& m);

/// Smallest eigenvalue of a symmetric matrix. Throws NotSymmetric when
/// max|m − mᵀ| exceeds 1e−12·max(1, max|m|).
double min_eigenvalue_symmetric(const Matrix& m);

/// Largest eigenvalue of a symmetric matrix (same symmetry check).
double max_eigenvalue_symmetric(const Matrix& m);

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

namespace tolerances {
inline constexpr double kStabilityMargin = 1e-9;
inline constexpr double kDareResidual = 1e-9;
inline constexpr int kDareMaxIterations = 100000;
inline constexpr double kSymmetry = 1e-12;
}  // namespace tolerances

}  // namespace deepo
