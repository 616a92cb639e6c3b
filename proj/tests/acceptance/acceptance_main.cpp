#include <iostream>

#include "deepo/acceptance.hpp"
#include "deepo/harness.hpp"

int main(int argc, char** argv) {
  deepo::ExperimentConfig cfg = deepo::benchmark_config();
  if (argc > 1) cfg = deepo::load_config(argv[1]);

  const auto results = deepo::run_acceptance(cfg, &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
