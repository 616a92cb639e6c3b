#include "deepo/harness.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "deepo/error.hpp"

namespace deepo {

using nlohmann::json;

std::string to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::Deepo: return "deepo";
    case Algorithm::DeepoNoProbe: return "deepo-noprobe";
    case Algorithm::Pfdeepo: return "pfdeepo";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "deepo") return Algorithm::Deepo;
  if (name == "deepo-noprobe") return Algorithm::DeepoNoProbe;
  if (name == "pfdeepo") return Algorithm::Pfdeepo;
  throw Error(ErrorKind::Parse, "unknown algorithm '" + std::string(name) + "'");
}

DataSet generate_offline(const PlantModel& p, Eigen::Index t, double sigma_u, std::uint64_t seed) {
  p.validate();
  const Eigen::Index n = p.states();
  const Eigen::Index m = p.inputs();
  if (t < n + m) {
    throw Error(ErrorKind::RankDeficient, "generate_offline: need at least n+m = " +
                                              std::to_string(n + m) + " samples, got " +
                                              std::to_string(t));
  }
  if (!(sigma_u >= 0.0) || !std::isfinite(sigma_u)) {
    throw Error(ErrorKind::InvalidArgument, "generate_offline: sigma_u must be finite and >= 0");
  }

  for (int attempt = 0; attempt < kOfflineAttempts; ++attempt) {
    Rng rng(seed, Stream::Offline, static_cast<std::uint32_t>(attempt));
    DataSet ds = DataSet::empty(n, m);
    Vector x = Vector::Zero(n);
    for (Eigen::Index k = 0; k < t; ++k) {
      const Vector u = rng.normal_vector(m, sigma_u);
      const Vector next = plant_step(p, x, u, rng);
      ds.push_back(x, u, next);
      x = next;
    }
    if (numeric_rank(build_D(ds)) == n + m) return ds;
  }
  throw Error(ErrorKind::RankDeficient, "generate_offline: rank([U0; X0]) < n+m after " +
                                            std::to_string(kOfflineAttempts) + " attempts");
}

void ExperimentConfig::validate() const {
  plant.validate();
  const Eigen::Index n = plant.states();
  const Eigen::Index m = plant.inputs();
  if (weights.Q.rows() != n || weights.R.rows() != m) {
    throw Error(ErrorKind::Dimension, "config: weights do not match the plant dimensions");
  }
  if (offline_samples < n + m) {
    throw Error(ErrorKind::InvalidArgument, "config: offline_samples must be >= n+m");
  }
  if (!(sigma_u >= 0.0) || !std::isfinite(sigma_u)) {
    throw Error(ErrorKind::InvalidArgument, "config: sigma_u must be finite and >= 0");
  }
  if (!std::isfinite(disturbance_magnitude) || disturbance_magnitude < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "config: disturbance_magnitude must be >= 0");
  }
  deepo.validate();
  pfdeepo.validate();
}

Disturbance ExperimentConfig::disturbance() const {
  if (!disturbance_time) return {};
  return Disturbance{*disturbance_time, disturbance_magnitude};
}

int ExperimentConfig::horizon(Algorithm alg) const {
  return alg == Algorithm::Pfdeepo ? pfdeepo.horizon : deepo.horizon;
}

ExperimentConfig benchmark_config() {
  ExperimentConfig cfg;
  cfg.plant.A.resize(4, 4);
  cfg.plant.A << -0.13, 0.14, -0.29, 0.28,
                 0.48, 0.09, 0.41, 0.30,
                 -0.01, 0.04, 0.17, 0.43,
                 0.14, 0.31, -0.29, -0.10;
  cfg.plant.B.resize(4, 2);
  cfg.plant.B << 1.63, 0.93,
                 0.26, 1.79,
                 1.46, 1.18,
                 0.77, 0.11;
  cfg.plant.sigma_w = 0.01;
  cfg.weights = CostWeights::identity(4, 2);
  cfg.offline_samples = 8;
  cfg.sigma_u = 0.01;
  cfg.algorithm = Algorithm::Pfdeepo;
  cfg.disturbance_time = 15;
  cfg.disturbance_magnitude = 4.0;
  cfg.seed = 1;
  return cfg;
}

// --- JSON ------------------------------------------------------------------

namespace {

Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw Error(ErrorKind::Parse, std::string("config: ") + what + " must be a nested array");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorKind::Parse, std::string("config: ragged matrix ") + what);
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& cell = row[static_cast<std::size_t>(c)];
      if (!cell.is_number()) throw Error(ErrorKind::Parse, std::string("config: non-numeric ") + what);
      out(i, c) = cell.get<double>();
    }
  }
  return out;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T>
void read_field(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("config: field '") + key + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::Parse, "config: top level must be an object");
  ExperimentConfig cfg = benchmark_config();

  if (doc.contains("plant")) {
    const json& p = doc.at("plant");
    if (p.contains("A")) cfg.plant.A = matrix_from_json(p.at("A"), "plant.A");
    if (p.contains("B")) cfg.plant.B = matrix_from_json(p.at("B"), "plant.B");
    read_field(p, "sigma_w", cfg.plant.sigma_w);
    cfg.plant.validate();
  }
  if (doc.contains("weights")) {
    const json& w = doc.at("weights");
    Matrix q = w.contains("Q") ? matrix_from_json(w.at("Q"), "weights.Q")
                               : Matrix(Matrix::Identity(cfg.plant.states(), cfg.plant.states()));
    Matrix r = w.contains("R") ? matrix_from_json(w.at("R"), "weights.R")
                               : Matrix(Matrix::Identity(cfg.plant.inputs(), cfg.plant.inputs()));
    cfg.weights = CostWeights(std::move(q), std::move(r));
  } else if (cfg.weights.Q.rows() != cfg.plant.states() || cfg.weights.R.rows() != cfg.plant.inputs()) {
    cfg.weights = CostWeights::identity(cfg.plant.states(), cfg.plant.inputs());
  }

  read_field(doc, "offline_samples", cfg.offline_samples);
  read_field(doc, "sigma_u", cfg.sigma_u);
  if (doc.contains("algorithm")) {
    std::string name;
    read_field(doc, "algorithm", name);
    cfg.algorithm = parse_algorithm(name);
  }
  if (doc.contains("deepo")) {
    const json& d = doc.at("deepo");
    read_field(d, "eta", cfg.deepo.eta);
    read_field(d, "sigma_e", cfg.deepo.sigma_e);
    read_field(d, "horizon", cfg.deepo.horizon);
  }
  if (doc.contains("pfdeepo")) {
    const json& d = doc.at("pfdeepo");
    read_field(d, "gamma", cfg.pfdeepo.gamma);
    read_field(d, "delta", cfg.pfdeepo.delta);
    read_field(d, "eta", cfg.pfdeepo.eta);
    read_field(d, "beta", cfg.pfdeepo.beta);
    read_field(d, "v_cap_lo", cfg.pfdeepo.v_cap_lo);
    read_field(d, "v_cap_hi", cfg.pfdeepo.v_cap_hi);
    read_field(d, "horizon", cfg.pfdeepo.horizon);
  }
  if (doc.contains("disturbance_time")) {
    const json& t = doc.at("disturbance_time");
    if (t.is_null()) {
      cfg.disturbance_time.reset();
    } else {
      int time = -1;
      read_field(doc, "disturbance_time", time);
      cfg.disturbance_time = time;
    }
  }
  read_field(doc, "disturbance_magnitude", cfg.disturbance_magnitude);
  read_field(doc, "seed", cfg.seed);

  cfg.validate();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["plant"] = {{"A", matrix_to_json(cfg.plant.A)},
                  {"B", matrix_to_json(cfg.plant.B)},
                  {"sigma_w", cfg.plant.sigma_w}};
  doc["weights"] = {{"Q", matrix_to_json(cfg.weights.Q)}, {"R", matrix_to_json(cfg.weights.R)}};
  doc["offline_samples"] = cfg.offline_samples;
  doc["sigma_u"] = cfg.sigma_u;
  doc["algorithm"] = to_string(cfg.algorithm);
  doc["deepo"] = {{"eta", cfg.deepo.eta},
                  {"sigma_e", cfg.deepo.sigma_e},
                  {"horizon", cfg.deepo.horizon}};
  doc["pfdeepo"] = {{"gamma", cfg.pfdeepo.gamma},       {"delta", cfg.pfdeepo.delta},
                    {"eta", cfg.pfdeepo.eta},           {"beta", cfg.pfdeepo.beta},
                    {"v_cap_lo", cfg.pfdeepo.v_cap_lo}, {"v_cap_hi", cfg.pfdeepo.v_cap_hi},
                    {"horizon", cfg.pfdeepo.horizon}};
  doc["disturbance_time"] = cfg.disturbance_time ? json(*cfg.disturbance_time) : json(nullptr);
  doc["disturbance_magnitude"] = cfg.disturbance_magnitude;
  doc["seed"] = cfg.seed;
  return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, "config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

// --- runs ------------------------------------------------------------------

TraceLog run_experiment(const ExperimentConfig& cfg, Algorithm alg) {
  cfg.validate();
  const DataSet ds0 = generate_offline(cfg.plant, cfg.offline_samples, cfg.sigma_u, cfg.seed);
  const Matrix k0 = Matrix::Zero(cfg.plant.inputs(), cfg.plant.states());

  switch (alg) {
    case Algorithm::Deepo:
    case Algorithm::DeepoNoProbe: {
      DeepoConfig dc = cfg.deepo;
      dc.seed = cfg.seed;
      if (alg == Algorithm::DeepoNoProbe) dc.sigma_e = 0.0;
      return run_deepo(cfg.plant, ds0, k0, cfg.weights, dc, cfg.disturbance());
    }
    case Algorithm::Pfdeepo: {
      PfdeepoConfig pc = cfg.pfdeepo;
      pc.seed = cfg.seed;
      return run_pfdeepo(cfg.plant, ds0, k0, cfg.weights, pc, cfg.disturbance());
    }
  }
  throw Error(ErrorKind::InvalidArgument, "run_experiment: unknown algorithm");
}

CompareOutputs run_compare(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  CompareOutputs out;
  for (Algorithm alg : {Algorithm::Deepo, Algorithm::DeepoNoProbe, Algorithm::Pfdeepo}) {
    TraceLog trace = run_experiment(cfg, alg);
    trace.label = to_string(alg);
    const auto csv = out_dir / (trace.label + ".csv");
    emit_csv(trace, csv);
    out.csv_files.push_back(csv);
    out.traces.push_back(std::move(trace));
  }

  out.states_svg = out_dir / "states.svg";
  PlotOptions states_opts;
  states_opts.max_time = kStatePlotWindow;
  states_opts.title = "State trajectories";
  emit_plot({out.traces[0], out.traces[2]}, PlotQuantity::States, out.states_svg, states_opts);

  out.minsvd_svg = out_dir / "minsvd.svg";
  PlotOptions svd_opts;
  svd_opts.title = "Minimum singular value of the sample covariance";
  emit_plot(out.traces, PlotQuantity::MinSvd, out.minsvd_svg, svd_opts);
  return out;
}

}  // namespace deepo
