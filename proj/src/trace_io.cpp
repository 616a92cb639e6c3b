#include <fstream>
#include <ostream>
#include <string>

#include "deepo/error.hpp"
#include "deepo/trace.hpp"
#include "format_util.hpp"

namespace deepo {

std::string branch_tag(const TraceRecord& r) {
  switch (r.branch) {
    case ControlBranch::End: return "end";
    case ControlBranch::Plain: return r.updated ? "plain-update" : "plain-freeze";
    case ControlBranch::Probe: return r.updated ? "probe-update" : "probe-freeze";
    case ControlBranch::Scaled: return r.updated ? "scaled-update" : "scaled-freeze";
  }
  return "unknown";
}

namespace {

void parse_tag(const std::string& tag, TraceRecord& r) {
  if (tag == "end") {
    r.branch = ControlBranch::End;
    return;
  }
  const auto dash = tag.find('-');
  if (dash == std::string::npos) throw Error(ErrorKind::Parse, "bad branch tag '" + tag + "'");
  const std::string control = tag.substr(0, dash);
  const std::string update = tag.substr(dash + 1);
  if (control == "plain") {
    r.branch = ControlBranch::Plain;
  } else if (control == "probe") {
    r.branch = ControlBranch::Probe;
  } else if (control == "scaled") {
    r.branch = ControlBranch::Scaled;
  } else {
    throw Error(ErrorKind::Parse, "bad branch tag '" + tag + "'");
  }
  if (update != "update" && update != "freeze") {
    throw Error(ErrorKind::Parse, "bad branch tag '" + tag + "'");
  }
  r.updated = update == "update";
}

}  // namespace

void emit_csv(const TraceLog& trace, std::ostream& out) {
  out << "Time";
  for (Eigen::Index i = 0; i < trace.n; ++i) out << ",x" << i + 1;
  for (Eigen::Index j = 0; j < trace.m; ++j) out << ",u" << j + 1;
  out << ",minsvd,cost,branch,v\n";
  for (const TraceRecord& r : trace.records) {
    out << r.k;
    for (Eigen::Index i = 0; i < trace.n; ++i) out << ',' << detail::format_decimal(r.x(i));
    for (Eigen::Index j = 0; j < trace.m; ++j) out << ',' << detail::format_decimal(r.u(j));
    out << ',' << detail::format_decimal(r.sigma_min_phi) << ',' << detail::format_decimal(r.cost)
        << ',' << branch_tag(r) << ',' << detail::format_decimal(r.v) << '\n';
  }
}

void emit_csv(const TraceLog& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  emit_csv(trace, out);
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

TraceLog read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "trace csv: missing header");
  const auto header = detail::split_csv_line(line);
  TraceLog log;
  std::size_t c = 1;
  if (header.empty() || header[0] != "Time") throw Error(ErrorKind::Parse, "trace csv: expected 'Time'");
  while (c < header.size() && header[c] == "x" + std::to_string(log.n + 1)) {
    ++log.n;
    ++c;
  }
  while (c < header.size() && header[c] == "u" + std::to_string(log.m + 1)) {
    ++log.m;
    ++c;
  }
  if (header.size() != c + 4 || header[c] != "minsvd" || header[c + 1] != "cost" ||
      header[c + 2] != "branch" || header[c + 3] != "v") {
    throw Error(ErrorKind::Parse, "trace csv: unexpected header layout");
  }

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) throw Error(ErrorKind::Parse, "trace csv: ragged row");
    TraceRecord r;
    r.k = static_cast<int>(detail::parse_double(cells[0]));
    r.x.resize(log.n);
    r.u.resize(log.m);
    std::size_t p = 1;
    for (Eigen::Index i = 0; i < log.n; ++i) r.x(i) = detail::parse_double(cells[p++]);
    for (Eigen::Index j = 0; j < log.m; ++j) r.u(j) = detail::parse_double(cells[p++]);
    r.sigma_min_phi = detail::parse_double(cells[p++]);
    r.cost = detail::parse_double(cells[p++]);
    parse_tag(cells[p++], r);
    r.v = detail::parse_double(cells[p++]);
    log.records.push_back(std::move(r));
  }
  return log;
}

TraceLog read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  TraceLog log = read_trace_csv(in);
  log.label = path.stem().string();
  return log;
}

}  // namespace deepo
