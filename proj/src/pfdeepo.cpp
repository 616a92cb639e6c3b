#include "deepo/pfdeepo.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "deepo/error.hpp"

namespace deepo {

void PfdeepoConfig::validate() const {
  if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "pfdeepo: gamma must be > 0");
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "pfdeepo: delta must be > 0");
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorKind::InvalidArgument, "pfdeepo: eta must be finite and non-negative");
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "pfdeepo: beta must lie in (0, 1)");
  }
  if (!(v_cap_lo > 0.0 && v_cap_lo < 1.0 && v_cap_hi > 1.0 && std::isfinite(v_cap_hi))) {
    throw Error(ErrorKind::InvalidArgument, "pfdeepo: caps must satisfy 0 < lo < 1 < hi");
  }
  if (horizon < 0) throw Error(ErrorKind::InvalidArgument, "pfdeepo: horizon must be >= 0");
}

Matrix scaling_matrix(const Matrix& k, const Matrix& b_hat, const Matrix& h,
                      const CostWeights& w, double v) {
  const Matrix bhb = b_hat.transpose() * h * b_hat;
  const Matrix inner = (v - 1.0) * (v - 1.0) * bhb + (1.0 - 2.0 * v) * w.R;
  return symmetrized(w.Q - k.transpose() * inner * k);
}

namespace {

// Walks from v = 1 toward `cap` (direction given by its sign relative to 1)
// and returns the last v with λ_min(M(v)) ≥ 0, plus whether the cap was hit.
std::pair<double, bool> find_endpoint(const auto& feasible, double cap) {
  const double dir = cap > 1.0 ? 1.0 : -1.0;
  const double reach = std::fabs(cap - 1.0);

  double good = 0.0;  // distance from 1 known feasible
  double probe = tolerances::kIntervalProbe;
  while (probe < reach && feasible(1.0 + dir * probe)) {
    good = probe;
    probe *= 2.0;
  }
  double bad = probe;
  if (probe >= reach) {
    if (feasible(cap)) return {cap, true};
    bad = reach;
  }
  while (bad - good > tolerances::kIntervalBisection) {
    const double mid = 0.5 * (good + bad);
    if (feasible(1.0 + dir * mid)) {
      good = mid;
    } else {
      bad = mid;
    }
  }
  return {1.0 + dir * good, false};
}

}  // namespace

StabilityCertificate stability_interval(const Matrix& k, const Matrix& a_hat,
                                        const Matrix& b_hat, const CostWeights& w, double beta,
                                        const IntervalCaps& caps) {
  if (!(caps.lo >= 0.0 && caps.lo < 1.0 && caps.hi > 1.0 && std::isfinite(caps.hi))) {
    throw Error(ErrorKind::InvalidArgument, "stability_interval: caps must satisfy 0 <= lo < 1 < hi");
  }
  if (k.rows() != b_hat.cols() || k.cols() != a_hat.rows()) {
    throw Error(ErrorKind::Dimension, "stability_interval: gain shape mismatch");
  }

  StabilityCertificate cert;
  cert.beta = beta;
  cert.K = k;
  cert.H = solve_modified_dare(a_hat, b_hat, w.Q, w.R, beta);
  cert.h_min = min_eigenvalue_symmetric(cert.H);
  cert.h_max = max_eigenvalue_symmetric(cert.H);

  if (min_eigenvalue_symmetric(scaling_matrix(k, b_hat, cert.H, w, 1.0)) <= 0.0) {
    throw Error(ErrorKind::NotPD, "stability_interval: Q + KᵀRK is not positive definite");
  }
  const auto feasible = [&](double v) {
    return min_eigenvalue_symmetric(scaling_matrix(k, b_hat, cert.H, w, v)) >= 0.0;
  };
  std::tie(cert.v_lo, cert.lo_capped) = find_endpoint(feasible, caps.lo);
  std::tie(cert.v_hi, cert.hi_capped) = find_endpoint(feasible, caps.hi);
  return cert;
}

BoundCheck verify_exponential_bound(const Matrix& a_hat, const Matrix& b_hat, const Matrix& k,
                                    const StabilityCertificate& cert, const Vector& x0,
                                    std::span<const double> v_seq, int steps) {
  const Eigen::Index n = a_hat.rows();
  if (a_hat.cols() != n || b_hat.rows() != n || k.rows() != b_hat.cols() || k.cols() != n ||
      x0.size() != n || cert.H.rows() != n) {
    throw Error(ErrorKind::Dimension, "verify_exponential_bound: inconsistent shapes");
  }
  if (steps < 0 || v_seq.size() < static_cast<std::size_t>(steps)) {
    throw Error(ErrorKind::Dimension, "verify_exponential_bound: v sequence shorter than steps");
  }

  const double slack = 1.0 + tolerances::kBoundRelative;
  const double gain = std::sqrt(cert.h_max / cert.h_min) * x0.norm();
  const double beta2 = cert.beta * cert.beta;

  BoundCheck out;
  Vector x = x0;
  double lyap = x.dot(cert.H * x);
  double decay = 1.0;
  for (int step = 0; step <= steps; ++step) {
    const double bound = decay * gain;
    const double ratio = bound > 0.0 ? x.norm() / bound : (x.norm() > 0.0 ? INFINITY : 0.0);
    out.worst_bound_ratio = std::max(out.worst_bound_ratio, ratio);
    if (x.norm() > bound * slack) {
      out.bound_holds = false;
      if (out.first_violation < 0) out.first_violation = step;
    }
    if (step == steps) break;

    x = (a_hat + v_seq[static_cast<std::size_t>(step)] * b_hat * k) * x;
    const double next = x.dot(cert.H * x);
    if (next > beta2 * lyap * slack) {
      out.decrement_holds = false;
      if (out.first_violation < 0) out.first_violation = step + 1;
    }
    lyap = next;
    decay *= cert.beta;
  }
  return out;
}

// --- agent -----------------------------------------------------------------

PfdeepoAgent::PfdeepoAgent(DataSet ds0, Matrix k0, CostWeights w, PfdeepoConfig cfg)
    : ds_(std::move(ds0)),
      cp_(covariance_param(ds_)),
      k_(std::move(k0)),
      w_(std::move(w)),
      cfg_(cfg),
      scaling_(cfg.seed, Stream::Scaling) {
  cfg_.validate();
  if (k_.rows() != ds_.inputs() || k_.cols() != ds_.states()) {
    throw Error(ErrorKind::Dimension, "pfdeepo: initial gain shape mismatch");
  }
  // ΔK starts at (δ+1)·𝟙 so the first step never scales.
  dk_norm_ = norm2(Matrix::Constant(k_.rows(), k_.cols(), cfg_.delta + 1.0));
}

void PfdeepoAgent::refresh_certificate() {
  const SystemEstimate est = ls_identify(ds_);
  cert_ = stability_interval(k_, est.A, est.B, w_, cfg_.beta,
                             IntervalCaps{cfg_.v_cap_lo, cfg_.v_cap_hi});
  ++refreshes_;
}

Action PfdeepoAgent::act(const Vector& x) {
  if (x.size() != ds_.states()) throw Error(ErrorKind::Dimension, "pfdeepo: state size mismatch");
  Action a;
  if (dk_norm_ > cfg_.delta || x.norm() <= cfg_.gamma) {
    a.u = k_ * x;
    a.branch = ControlBranch::Plain;
  } else {
    if (!cert_ || norm2(cert_->K - k_) > tolerances::kCertificateRefresh) {
      refresh_certificate();
    }
    a.v = scaling_.uniform(cert_->v_lo, cert_->v_hi);
    a.u = a.v * (k_ * x);
    a.branch = ControlBranch::Scaled;
  }
  a.certified = cert_.has_value();
  pending_x_ = x;
  pending_u_ = a.u;
  return a;
}

Outcome PfdeepoAgent::observe(const Vector& x_next) {
  if (!pending_x_) throw Error(ErrorKind::InvalidArgument, "pfdeepo: observe() without act()");
  const Vector x = *pending_x_;
  pending_x_.reset();

  Outcome out;
  if (x.norm() <= cfg_.gamma) {
    dk_norm_ = 0.0;
    return out;
  }
  append_sample(cp_, ds_, x, pending_u_, x_next);
  auto step = try_policy_gradient_step(k_, cp_, w_, cfg_.eta);
  if (!step) {
    // K held; dk_norm_ keeps its previous value.
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

TraceLog run_pfdeepo(const PlantModel& plant, const DataSet& ds0, const Matrix& k0,
                     const CostWeights& w, const PfdeepoConfig& cfg,
                     const Disturbance& disturbance) {
  plant.validate();
  PfdeepoAgent agent(ds0, k0, w, cfg);
  return simulate(plant, agent, w, cfg.horizon, cfg.seed, disturbance, "pfdeepo");
}

}  // namespace deepo
