#include "deepo/deepo.hpp"

#include <cmath>

#include "deepo/error.hpp"

namespace deepo {

void DeepoConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorKind::InvalidArgument, "deepo: eta must be finite and non-negative");
  }
  if (!(sigma_e >= 0.0)) throw Error(ErrorKind::InvalidArgument, "deepo: sigma_e must be >= 0");
  if (horizon < 0) throw Error(ErrorKind::InvalidArgument, "deepo: horizon must be >= 0");
}

DeepoAgent::DeepoAgent(DataSet ds0, Matrix k0, CostWeights w, DeepoConfig cfg)
    : ds_(std::move(ds0)),
      cp_(covariance_param(ds_)),
      k_(std::move(k0)),
      w_(std::move(w)),
      cfg_(cfg),
      probing_(cfg.seed, Stream::Probing) {
  cfg_.validate();
  if (k_.rows() != ds_.inputs() || k_.cols() != ds_.states()) {
    throw Error(ErrorKind::Dimension, "deepo: initial gain shape mismatch");
  }
}

Action DeepoAgent::act(const Vector& x) {
  if (x.size() != ds_.states()) throw Error(ErrorKind::Dimension, "deepo: state size mismatch");
  Action a;
  a.u = k_ * x;
  if (cfg_.sigma_e > 0.0) {
    a.u += probing_.normal_vector(ds_.inputs(), cfg_.sigma_e);
    a.branch = ControlBranch::Probe;
  }
  pending_x_ = x;
  pending_u_ = a.u;
  return a;
}

Outcome DeepoAgent::observe(const Vector& x_next) {
  if (!pending_x_) throw Error(ErrorKind::InvalidArgument, "deepo: observe() without act()");
  append_sample(cp_, ds_, *pending_x_, pending_u_, x_next);
  pending_x_.reset();

  Outcome out;
  auto step = try_policy_gradient_step(k_, cp_, w_, cfg_.eta);
  if (!step) {
    ++skipped_;
    return out;
  }
  last_ = std::move(step);
  out.updated = true;
  out.dk_norm = norm2(last_->K_next - k_);
  k_ = last_->K_next;
  dk_norm_ = out.dk_norm;
  return out;
}

TraceLog run_deepo(const PlantModel& plant, const DataSet& ds0, const Matrix& k0,
                   const CostWeights& w, const DeepoConfig& cfg, const Disturbance& disturbance) {
  plant.validate();
  DeepoAgent agent(ds0, k0, w, cfg);
  return simulate(plant, agent, w, cfg.horizon, cfg.seed, disturbance,
                  cfg.sigma_e > 0.0 ? "deepo" : "deepo-noprobe");
}

}  // namespace deepo
