#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "deepo/acceptance.hpp"
#include "deepo/error.hpp"
#include "deepo/harness.hpp"

namespace {

deepo::ExperimentConfig load(const std::string& path, const std::optional<std::uint64_t>& seed) {
  deepo::ExperimentConfig cfg = deepo::load_config(path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-enabled policy optimization for LQR"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string out_dir;
  std::string alg = "pfdeepo";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "experiment JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the config seed");
  };

  CLI::App* offline = app.add_subcommand("offline-gen", "write the offline dataset as CSV");
  add_common(offline);
  offline->add_option("--out", out, "output CSV")->required();

  CLI::App* run = app.add_subcommand("run", "run one algorithm and write its trace");
  add_common(run);
  run->add_option("--alg", alg, "algorithm")
      ->check(CLI::IsMember({"deepo", "deepo-noprobe", "pfdeepo"}));
  run->add_option("--out", out, "output CSV")->required();

  CLI::App* compare = app.add_subcommand("compare", "run all algorithms, write CSVs and SVGs");
  add_common(compare);
  compare->add_option("--out-dir", out_dir, "output directory")->required();

  CLI::App* verify = app.add_subcommand("verify", "run the acceptance suite");
  add_common(verify);

  CLI11_PARSE(app, argc, argv);

  try {
    const deepo::ExperimentConfig cfg = load(config, seed);
    if (*offline) {
      const deepo::DataSet ds =
          deepo::generate_offline(cfg.plant, cfg.offline_samples, cfg.sigma_u, cfg.seed);
      deepo::write_dataset_csv(ds, std::filesystem::path(out));
      std::cout << "wrote " << ds.samples() << " samples to " << out << '\n';
    } else if (*run) {
      const deepo::TraceLog trace = deepo::run_experiment(cfg, deepo::parse_algorithm(alg));
      deepo::emit_csv(trace, std::filesystem::path(out));
      std::cout << "wrote " << trace.records.size() << " rows to " << out << '\n';
    } else if (*compare) {
      const deepo::CompareOutputs res = deepo::run_compare(cfg, out_dir);
      for (const auto& p : res.csv_files) std::cout << "wrote " << p.string() << '\n';
      std::cout << "wrote " << res.states_svg.string() << '\n';
      std::cout << "wrote " << res.minsvd_svg.string() << '\n';
    } else if (*verify) {
      const auto results = deepo::run_acceptance(cfg, &std::cout);
      const bool ok = deepo::all_passed(results);
      std::cout << (ok ? "acceptance: PASS" : "acceptance: FAIL") << '\n';
      return ok ? 0 : 1;
    }
  } catch (const deepo::Error& e) {
    std::cerr << "error (" << deepo::to_string(e.kind()) << "): " << e.what() << '\n';
    return 2;
  }
  return 0;
}
