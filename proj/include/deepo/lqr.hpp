#pragma once

// Model-based and data-driven LQR machinery. Gains follow u = Kx throughout,
// so the closed loop is A + BK and the certainty-equivalence gain carries a
// leading minus sign.

#include <optional>

#include "deepo/datastore.hpp"
#include "deepo/kernels.hpp"

namespace deepo {

/// State and input weights; both must be symmetric positive definite.
struct CostWeights {
  Matrix Q;
  Matrix R;

  CostWeights() = default;
  CostWeights(Matrix q, Matrix r);

  static CostWeights identity(Eigen::Index n, Eigen::Index m) {
    return CostWeights(Matrix::Identity(n, n), Matrix::Identity(m, m));
  }
};

/// Policy in the covariance parametrization together with the quantities the
/// gradient reuses.
struct PolicyState {
  Matrix K;       // m×n
  Matrix V;       // (n+m)×n, X̄₀V = I
  Matrix SigmaV;  // n×n
  Matrix PV;      // n×n
  double cost = 0.0;
};

struct SystemEstimate {
  Matrix A;
  Matrix B;
};

/// tr((Q + KᵀRK)Σ_K) with Σ_K = I + (A+BK)Σ_K(A+BK)ᵀ. Throws Unstable.
double closed_loop_cost(const Matrix& a, const Matrix& b, const Matrix& k, const CostWeights& w);

/// Least-squares [B̂ Â] = X1 𝒟†. Throws RankDeficient when rank(𝒟) < n+m.
SystemEstimate ls_identify(const DataSet& ds);

/// K = −(R + BᵀHB)⁻¹BᵀHA, H from the modified DARE with the given β.
Matrix modified_dare_gain(const Matrix& a, const Matrix& b, const Matrix& h, const Matrix& r);

/// Certainty-equivalence LQR gain for (Â, B̂) (β = 1).
Matrix ce_lqr_gain(const Matrix& a_hat, const Matrix& b_hat, const CostWeights& w);

struct VCost {
  double cost = 0.0;
  Matrix SigmaV;
  Matrix PV;
};

/// Cost of the V-parametrized data-driven problem:
///   Σ_V = I + X̄₁VΣ_VVᵀX̄₁ᵀ,  P_V = Q + VᵀŪ₀ᵀRŪ₀V + VᵀX̄₁ᵀP_VX̄₁V,
///   C(V) = tr((Q + VᵀŪ₀ᵀRŪ₀V)Σ_V).
/// Throws Infeasible when ‖X̄₀V − I‖ > 1e−8 and Unstable when ρ(X̄₁V) ≥ 1.
VCost cost_V(const Matrix& v, const CovParam& cp, const CostWeights& w);

/// ∇_V C = 2(Ū₀ᵀRŪ₀ + X̄₁ᵀP_VX̄₁)VΣ_V, reusing Σ_V and P_V from `cost_V`.
Matrix deepo_gradient(const Matrix& v, const CovParam& cp, const CostWeights& w, const VCost& at_v);
Matrix deepo_gradient(const Matrix& v, const CovParam& cp, const CostWeights& w);

/// Orthogonal projection onto ker(X̄₀): (I − X̄₀†X̄₀)g.
Matrix project_gradient(const Matrix& g, const Matrix& xbar0);

/// V = Φ⁻¹[K; I] (linear solve), followed by one re-projection
/// V ← V − X̄₀†(X̄₀V − I) to cancel rounding drift in the constraint.
Matrix reparametrize(const Matrix& k, const CovParam& cp);

/// Result of one projected-gradient policy update.
struct GradientUpdate {
  PolicyState at;     // policy evaluated at V = Φ⁻¹[K; I]
  Matrix V_next;      // V − η Π ∇C
  Matrix K_next;      // Ū₀ V_next
  double feasibility_residual = 0.0;      // ‖X̄₀V − I‖
  double reconstruction_residual = 0.0;   // ‖Ū₀V − K‖
};

/// Reparametrize, evaluate and take one projected step of size eta. Throws
/// PhiSingular when σ_min(Φ) < 1e−10.
GradientUpdate policy_gradient_step(const Matrix& k, const CovParam& cp, const CostWeights& w,
                                    double eta);

/// As policy_gradient_step, but returns nullopt when the data-based closed
/// loop X̄₁V is not Schur stable (the cost is unbounded at K).
std::optional<GradientUpdate> try_policy_gradient_step(const Matrix& k, const CovParam& cp,
                                                       const CostWeights& w, double eta);

namespace tolerances {
inline constexpr double kFeasibility = 1e-8;
inline constexpr double kPhiSingular = 1e-10;
}  // namespace tolerances

}  // namespace deepo
