#pragma once

// Perturbation-free DeePO: gain updates pause near the equilibrium, and once
// the gain has settled the input is scaled by a random factor drawn from an
// interval certified by a common quadratic Lyapunov function.

#include <cstdint>
#include <optional>
#include <span>

#include "deepo/closed_loop.hpp"
#include "deepo/datastore.hpp"
#include "deepo/lqr.hpp"
#include "deepo/plant.hpp"
#include "deepo/rng.hpp"
#include "deepo/trace.hpp"

namespace deepo {

struct PfdeepoConfig {
  double gamma = 0.1;  // equilibrium threshold on ‖x‖
  double delta = 0.1;  // gain-convergence threshold on ‖ΔK‖
  double eta = 1e-4;
  double beta = 0.98;  // certified decay rate
  double v_cap_lo = 0.5;
  double v_cap_hi = 1.5;
  int horizon = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Interval of multiplicative gain scalings v for which
///   M(v) = Q − Kᵀ((v−1)²B̂ᵀHB̂ + (1−2v)R)K ⪰ 0,
/// with H the β-modified DARE solution for (Â, B̂).
struct StabilityCertificate {
  Matrix H;
  Matrix K;  // gain the interval was computed for
  double beta = 1.0;
  double v_lo = 1.0;
  double v_hi = 1.0;
  double h_min = 0.0;
  double h_max = 0.0;
  bool lo_capped = false;  // v_lo came from the cap rather than the boundary of M(v) ⪰ 0
  bool hi_capped = false;
};

struct IntervalCaps {
  double lo = 0.5;
  double hi = 1.5;
};

/// M(v) for the given gain and Riccati solution (symmetrized).
Matrix scaling_matrix(const Matrix& k, const Matrix& b_hat, const Matrix& h,
                      const CostWeights& w, double v);

/// Certified interval around v = 1: the modified DARE gives H; each endpoint is
/// bracketed by doubling the probe distance from 1e−3 and then bisected to 1e−6
/// against λ_min(M(v)) ≥ 0, and clamped to `caps`. Throws NotPD if M(1) is not
/// positive definite.
StabilityCertificate stability_interval(const Matrix& k, const Matrix& a_hat,
                                        const Matrix& b_hat, const CostWeights& w, double beta,
                                        const IntervalCaps& caps);

/// Outcome of simulating x_{k+1} = (Â + v_k B̂K)x_k against the certified bounds.
struct BoundCheck {
  bool bound_holds = true;      // ‖x_k‖ ≤ βᵏ√(h_max/h_min)‖x₀‖(1 + 1e−9)
  bool decrement_holds = true;  // xᵀ_{k+1}Hx_{k+1} ≤ β² x_kᵀHx_k (1 + 1e−9)
  int first_violation = -1;
  double worst_bound_ratio = 0.0;  // max_k ‖x_k‖ / bound_k

  bool ok() const { return bound_holds && decrement_holds; }
  explicit operator bool() const { return ok(); }
};

BoundCheck verify_exponential_bound(const Matrix& a_hat, const Matrix& b_hat, const Matrix& k,
                                    const StabilityCertificate& cert, const Vector& x0,
                                    std::span<const double> v_seq, int steps);

/// Per-step learner for the perturbation-free variant.
///
/// act(): if ‖ΔK‖ > δ or ‖x‖ ≤ γ apply u = Kx; otherwise (re)certify the
/// current gain on (Â, B̂) identified from the stored data, draw v uniformly
/// from [v_lo, v_hi] and apply u = vKx.
/// observe(): if ‖x‖ > γ append the sample and take the DeePO step;
/// otherwise keep K unchanged and append nothing. A step whose data-based
/// closed loop is unstable keeps the sample, holds K and leaves ‖ΔK‖ as it was.
class PfdeepoAgent {
 public:
  PfdeepoAgent(DataSet ds0, Matrix k0, CostWeights w, PfdeepoConfig cfg);

  Action act(const Vector& x);
  Outcome observe(const Vector& x_next);

  const Matrix& gain() const { return k_; }
  const CovParam& covariance() const { return cp_; }
  const DataSet& data() const { return ds_; }
  double sigma_min_phi() const { return min_singular_value(cp_.Phi); }
  double gating_dk_norm() const { return dk_norm_; }
  const std::optional<StabilityCertificate>& certificate() const { return cert_; }
  int certificate_refreshes() const { return refreshes_; }
  int skipped_updates() const { return skipped_; }
  const std::optional<GradientUpdate>& last_update() const { return last_; }

 private:
  void refresh_certificate();

  DataSet ds_;
  CovParam cp_;
  Matrix k_;
  CostWeights w_;
  PfdeepoConfig cfg_;
  Rng scaling_;
  double dk_norm_;
  std::optional<StabilityCertificate> cert_;
  int refreshes_ = 0;
  int skipped_ = 0;
  std::optional<Vector> pending_x_;
  Vector pending_u_;
  std::optional<GradientUpdate> last_;
};

TraceLog run_pfdeepo(const PlantModel& plant, const DataSet& ds0, const Matrix& k0,
                     const CostWeights& w, const PfdeepoConfig& cfg,
                     const Disturbance& disturbance = {});

namespace tolerances {
inline constexpr double kIntervalProbe = 1e-3;
inline constexpr double kIntervalBisection = 1e-6;
inline constexpr double kCertificateRefresh = 1e-9;
inline constexpr double kBoundRelative = 1e-9;
}  // namespace tolerances

}  // namespace deepo
