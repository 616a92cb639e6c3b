#pragma once

#include <cstdint>
#include <string>

#include "deepo/lqr.hpp"
#include "deepo/plant.hpp"
#include "deepo/rng.hpp"
#include "deepo/trace.hpp"

namespace deepo {

/// State overwrite x ← x + δ, δ uniform on [−magnitude, magnitude]ⁿ, applied at
/// the start of step `time`. Negative time disables it.
struct Disturbance {
  int time = -1;
  double magnitude = 0.0;
};

/// Control decision returned by an agent's act().
struct Action {
  Vector u;
  ControlBranch branch = ControlBranch::Plain;
  double v = 1.0;
  bool certified = false;
};

/// Bookkeeping returned by an agent's observe().
struct Outcome {
  bool updated = false;
  double dk_norm = 0.0;  // ‖K_{i+1} − K_i‖
};

/// Runs `horizon` steps of agent/plant interaction from x₀ = 0.
///
/// Agent must provide act(x) -> Action, observe(x_next) -> Outcome,
/// gain(), sigma_min_phi() and gating_dk_norm().
template <class Agent>
TraceLog simulate(const PlantModel& plant, Agent& agent, const CostWeights& w, int horizon,
                  std::uint64_t seed, const Disturbance& disturbance, std::string label) {
  const Eigen::Index n = plant.states();
  Rng process_noise(seed, Stream::ProcessNoise);
  Rng disturbance_rng(seed, Stream::Disturbance);

  TraceLog log;
  log.label = std::move(label);
  log.n = n;
  log.m = plant.inputs();
  log.records.reserve(static_cast<std::size_t>(horizon) + 1);

  Vector x = Vector::Zero(n);
  for (int k = 0; k <= horizon; ++k) {
    if (k == disturbance.time) {
      x += disturbance_rng.uniform_vector(n, -disturbance.magnitude, disturbance.magnitude);
    }
    TraceRecord rec;
    rec.k = k;
    rec.x = x;
    rec.K = agent.gain();
    rec.sigma_min_phi = agent.sigma_min_phi();
    rec.dk_norm = agent.gating_dk_norm();

    if (k == horizon) {
      rec.u = rec.K * x;
      rec.branch = ControlBranch::End;
    } else {
      const Action action = agent.act(x);
      const Vector x_next = plant_step(plant, x, action.u, process_noise);
      const Outcome outcome = agent.observe(x_next);
      rec.u = action.u;
      rec.branch = action.branch;
      rec.v = action.v;
      rec.certified = action.certified;
      rec.updated = outcome.updated;
      x = x_next;
    }
    rec.cost = rec.x.dot(w.Q * rec.x) + rec.u.dot(w.R * rec.u);
    log.records.push_back(std::move(rec));
  }
  return log;
}

}  // namespace deepo
