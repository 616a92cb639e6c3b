#pragma once

// Experiment orchestration: offline data generation, JSON configuration and
// the three-way comparison run.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "deepo/closed_loop.hpp"
#include "deepo/datastore.hpp"
#include "deepo/deepo.hpp"
#include "deepo/lqr.hpp"
#include "deepo/pfdeepo.hpp"
#include "deepo/plant.hpp"
#include "deepo/trace.hpp"

namespace deepo {

enum class Algorithm { Deepo, DeepoNoProbe, Pfdeepo };

std::string to_string(Algorithm alg);
/// Accepts `deepo`, `deepo-noprobe` and `pfdeepo`; throws Parse otherwise.
Algorithm parse_algorithm(std::string_view name);

/// Offline experiment from x₀ = 0 with u ~ N(0, σ_u² I). Data failing the
/// rank gate rank(𝒟) = n+m is regenerated on a fresh substream, at most 10
/// times. Throws RankDeficient when t < n+m or every attempt fails.
DataSet generate_offline(const PlantModel& p, Eigen::Index t, double sigma_u, std::uint64_t seed);

inline constexpr int kOfflineAttempts = 11;

struct ExperimentConfig {
  PlantModel plant;
  CostWeights weights;
  int offline_samples = 8;
  double sigma_u = 0.01;
  Algorithm algorithm = Algorithm::Pfdeepo;
  DeepoConfig deepo;
  PfdeepoConfig pfdeepo;
  std::optional<int> disturbance_time;
  double disturbance_magnitude = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
  Disturbance disturbance() const;
  int horizon(Algorithm alg) const;
};

/// The 4-state, 2-input benchmark: Q = I, R = I, σ_w = σ_u = 0.01, eight
/// offline samples, a ±4 disturbance at k = 15 and 100-step runs.
ExperimentConfig benchmark_config();

/// Fields missing from the document keep their benchmark values; if only the
/// plant is given, the weights default to identities of matching size.
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Offline generation followed by one closed-loop run from K₀ = 0.
TraceLog run_experiment(const ExperimentConfig& cfg, Algorithm alg);
inline TraceLog run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, cfg.algorithm);
}

struct CompareOutputs {
  std::vector<TraceLog> traces;  // deepo, deepo-noprobe, pfdeepo
  std::vector<std::filesystem::path> csv_files;
  std::filesystem::path states_svg;
  std::filesystem::path minsvd_svg;
};

/// Runs all three algorithms, writing `<label>.csv` for each plus
/// `states.svg` (deepo and pfdeepo, first 25 steps) and `minsvd.svg`.
CompareOutputs run_compare(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

inline constexpr int kStatePlotWindow = 25;

}  // namespace deepo
