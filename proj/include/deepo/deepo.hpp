#pragma once

// Data-enabled policy optimization with additive probing noise.

#include <cstdint>
#include <optional>

#include "deepo/closed_loop.hpp"
#include "deepo/datastore.hpp"
#include "deepo/lqr.hpp"
#include "deepo/plant.hpp"
#include "deepo/rng.hpp"
#include "deepo/trace.hpp"

namespace deepo {

struct DeepoConfig {
  double eta = 1e-4;
  double sigma_e = 0.1;  // probing-noise std; 0 disables probing
  int horizon = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One learning loop. act() draws u = Kx + e; observe() appends the sample,
/// reparametrizes V = Φ⁻¹[K; I], and takes V′ = V − ηΠ∇C, K ← Ū₀V′.
/// When the data-based closed loop is unstable the sample is kept but K is
/// held for that step (reported as not updated).
class DeepoAgent {
 public:
  DeepoAgent(DataSet ds0, Matrix k0, CostWeights w, DeepoConfig cfg);

  Action act(const Vector& x);
  Outcome observe(const Vector& x_next);

  const Matrix& gain() const { return k_; }
  const CovParam& covariance() const { return cp_; }
  const DataSet& data() const { return ds_; }
  double sigma_min_phi() const { return min_singular_value(cp_.Phi); }
  double gating_dk_norm() const { return dk_norm_; }
  /// Details of the most recent gradient update, if any.
  const std::optional<GradientUpdate>& last_update() const { return last_; }
  int skipped_updates() const { return skipped_; }

 private:
  DataSet ds_;
  CovParam cp_;
  Matrix k_;
  CostWeights w_;
  DeepoConfig cfg_;
  Rng probing_;
  std::optional<Vector> pending_x_;
  Vector pending_u_;
  double dk_norm_ = 0.0;
  int skipped_ = 0;
  std::optional<GradientUpdate> last_;
};

/// Runs the loop for cfg.horizon steps against the simulated plant.
TraceLog run_deepo(const PlantModel& plant, const DataSet& ds0, const Matrix& k0,
                   const CostWeights& w, const DeepoConfig& cfg,
                   const Disturbance& disturbance = {});

}  // namespace deepo
