#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "deepo/kernels.hpp"

namespace deepo {

/// How the input at a step was formed.
enum class ControlBranch {
  Plain,   // u = Kx
  Probe,   // u = Kx + e
  Scaled,  // u = vKx
  End,     // terminal row: nominal u = Kx, never applied
};

struct TraceRecord {
  int k = 0;
  Vector x;
  Vector u;
  Matrix K;                   // gain in force at step k
  double sigma_min_phi = 0;   // σ_min(Φ) of the data available at step k
  double cost = 0;            // xᵀQx + uᵀRu
  ControlBranch branch = ControlBranch::Plain;
  bool updated = false;       // data appended and gain updated after this step
  double v = 1.0;             // multiplicative scaling drawn (1 when unscaled)
  double dk_norm = 0;         // ‖ΔK‖ used for gating at this step
  bool certified = false;     // a stability certificate was available
};

/// Per-step log of one closed-loop run; `records.size() == horizon + 1`.
struct TraceLog {
  std::string label;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  std::vector<TraceRecord> records;
};

/// Branch column tag: `plain-update`, `scaled-freeze`, `probe-update`, `end`, ...
std::string branch_tag(const TraceRecord& r);

/// CSV `Time,x1..xn,u1..um,minsvd,cost,branch,v`, 9 significant digits, LF.
void emit_csv(const TraceLog& trace, std::ostream& out);
void emit_csv(const TraceLog& trace, const std::filesystem::path& path);

/// Parses the CSV written by emit_csv. Gains and gating fields are not stored
/// in the file and come back empty/zero; branch and update flags are restored.
TraceLog read_trace_csv(std::istream& in);
TraceLog read_trace_csv(const std::filesystem::path& path);

enum class PlotQuantity { States, MinSvd, Cost };

struct PlotOptions {
  int max_time = -1;  // window the time axis to [0, max_time]; < 0 keeps everything
  std::string title;
};

/// Self-contained SVG line chart. States get one panel per trace with one
/// series per coordinate; MinSvd and Cost draw one series per trace.
void emit_plot(const std::vector<TraceLog>& traces, PlotQuantity quantity,
               const std::filesystem::path& path, const PlotOptions& options = {});
std::string render_plot(const std::vector<TraceLog>& traces, PlotQuantity quantity,
                        const PlotOptions& options = {});

}  // namespace deepo
