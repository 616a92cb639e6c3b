#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "deepo/harness.hpp"

namespace deepo {

struct CriterionResult {
  std::string id;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the acceptance checks against `cfg` (normally the benchmark
/// configuration); criterion 2 reports its three parts separately. Seeded
/// checks use cfg.seed, cfg.seed + 1, ... When `out` is non-null one
/// `PASS`/`FAIL` line per criterion is written as it completes.
std::vector<CriterionResult> run_acceptance(const ExperimentConfig& cfg, std::ostream* out = nullptr);

std::string format_result(const CriterionResult& r);

inline bool all_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return !results.empty();
}

namespace acceptance {
inline constexpr int kSeeds = 10;
inline constexpr int kSeedsRequired = 9;
inline constexpr double kCeRelative = 0.05;
inline constexpr int kMonotoneFrom = 30;
inline constexpr double kNoProbeFinal = 1e-3;
inline constexpr double kSigmaFloor = 1e-4;
inline constexpr int kRmsFrom = 60;
inline constexpr int kRmsTo = 100;
inline constexpr double kRmsNoiseMultiple = 3.0;
inline constexpr double kRmsRatio = 2.0;
inline constexpr double kCertBeta = 0.98;
inline constexpr int kVSequences = 100;
inline constexpr int kVLength = 200;
inline constexpr int kFuzzPlants = 20;
inline constexpr int kGradSystems = 5;
inline constexpr int kGradPoints = 5;
inline constexpr int kGradDirections = 20;
inline constexpr double kGradStep = 1e-6;
inline constexpr double kGradRelative = 1e-5;
inline constexpr double kGradMaxCondition = 1e3;
inline constexpr double kGridTolerance = 1e-9;
inline constexpr int kGridPoints = 101;
inline constexpr double kSharpnessOffset = 0.05;
}  // namespace acceptance

}  // namespace deepo
