#include "deepo/datastore.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "deepo/error.hpp"
#include "format_util.hpp"

namespace deepo {

DataSet::DataSet(Matrix u0, Matrix x0, Matrix x1)
    : U0(std::move(u0)), X0(std::move(x0)), X1(std::move(x1)) {
  if (U0.cols() != X0.cols() || X1.cols() != X0.cols() || X1.rows() != X0.rows()) {
    throw Error(ErrorKind::Dimension, "dataset: U0, X0, X1 must share the column count");
  }
}

DataSet DataSet::empty(Eigen::Index n, Eigen::Index m) {
  return DataSet(Matrix(m, 0), Matrix(n, 0), Matrix(n, 0));
}

void DataSet::push_back(const Vector& x, const Vector& u, const Vector& x_next) {
  if (x.size() != states() || x_next.size() != states() || u.size() != inputs()) {
    throw Error(ErrorKind::Dimension, "dataset: sample does not match dataset dimensions");
  }
  const Eigen::Index t = samples();
  U0.conservativeResize(Eigen::NoChange, t + 1);
  X0.conservativeResize(Eigen::NoChange, t + 1);
  X1.conservativeResize(Eigen::NoChange, t + 1);
  U0.col(t) = u;
  X0.col(t) = x;
  X1.col(t) = x_next;
}

Matrix build_hankel(const Matrix& u, Eigen::Index l) {
  const Eigen::Index m = u.rows();
  const Eigen::Index t = u.cols();
  if (l < 1 || t < l) {
    throw Error(ErrorKind::Dimension, "hankel: need 1 <= l <= t");
  }
  const Eigen::Index cols = t - l + 1;
  Matrix h(m * l, cols);
  for (Eigen::Index i = 0; i < l; ++i) {
    h.middleRows(i * m, m) = u.middleCols(i, cols);
  }
  return h;
}

Eigen::Index numeric_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  const double tol = std::max(tolerances::kRankRelative * s(0), tolerances::kRankAbsolute);
  return (s.array() > tol).count();
}

bool is_persistently_exciting(const Matrix& u, Eigen::Index l) {
  return numeric_rank(build_hankel(u, l)) == u.rows() * l;
}

Matrix build_D(const DataSet& ds) {
  Matrix d(ds.inputs() + ds.states(), ds.samples());
  d << ds.U0, ds.X0;
  return d;
}

CovParam covariance_param(const DataSet& ds) {
  if (ds.samples() < 1) {
    throw Error(ErrorKind::Dimension, "covariance_param: dataset is empty");
  }
  const Matrix d = build_D(ds);
  const double t = static_cast<double>(ds.samples());
  CovParam cp;
  cp.Phi = symmetrized(d * d.transpose() / t);
  cp.Xbar1 = ds.X1 * d.transpose() / t;
  cp.t = ds.samples();
  cp.m = ds.inputs();
  return cp;
}

void append_sample(CovParam& cp, DataSet& ds, const Vector& x, const Vector& u,
                   const Vector& x_next) {
  const Eigen::Index n = ds.states();
  const Eigen::Index m = ds.inputs();
  if (cp.t != ds.samples() || cp.m != m) {
    throw Error(ErrorKind::Dimension, "append_sample: CovParam and DataSet out of sync");
  }
  ds.push_back(x, u, x_next);

  Vector d(n + m);
  d << u, x;
  const double t = static_cast<double>(cp.t);
  if (cp.t == 0) {
    cp.Phi = d * d.transpose();
    cp.Xbar1 = x_next * d.transpose();
  } else {
    cp.Phi = symmetrized((t * cp.Phi + d * d.transpose()) / (t + 1.0));
    cp.Xbar1 = (t * cp.Xbar1 + x_next * d.transpose()) / (t + 1.0);
  }
  cp.t += 1;
}

// --- CSV -------------------------------------------------------------------

void write_dataset_csv(const DataSet& ds, std::ostream& out) {
  const Eigen::Index n = ds.states();
  const Eigen::Index m = ds.inputs();
  out << 'k';
  for (Eigen::Index j = 0; j < m; ++j) out << ",u" << j + 1;
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i + 1;
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i + 1 << "next";
  out << '\n';
  for (Eigen::Index k = 0; k < ds.samples(); ++k) {
    out << k;
    for (Eigen::Index j = 0; j < m; ++j) out << ',' << detail::format_decimal(ds.U0(j, k));
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << detail::format_decimal(ds.X0(i, k));
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << detail::format_decimal(ds.X1(i, k));
    out << '\n';
  }
}

void write_dataset_csv(const DataSet& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  write_dataset_csv(ds, out);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

DataSet read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "dataset csv: missing header");
  const std::vector<std::string> header = detail::split_csv_line(line);
  if (header.empty() || header[0] != "k") {
    throw Error(ErrorKind::Parse, "dataset csv: first column must be 'k'");
  }

  const std::regex input_re("u([0-9]+)");
  const std::regex state_re("x([0-9]+)");
  const std::regex next_re("x([0-9]+)next");
  Eigen::Index m = 0, n = 0, n_next = 0;
  std::vector<int> role(header.size(), -1);  // 0 input, 1 state, 2 successor
  std::vector<Eigen::Index> index(header.size(), 0);
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::smatch match;
    if (std::regex_match(header[c], match, next_re)) {
      role[c] = 2;
      index[c] = std::stol(match[1]) - 1;
      ++n_next;
    } else if (std::regex_match(header[c], match, state_re)) {
      role[c] = 1;
      index[c] = std::stol(match[1]) - 1;
      ++n;
    } else if (std::regex_match(header[c], match, input_re)) {
      role[c] = 0;
      index[c] = std::stol(match[1]) - 1;
      ++m;
    } else {
      throw Error(ErrorKind::Parse, "dataset csv: unknown column '" + header[c] + "'");
    }
  }
  if (n == 0 || m == 0 || n != n_next) {
    throw Error(ErrorKind::Parse, "dataset csv: inconsistent u/x/xnext columns");
  }
  for (std::size_t c = 1; c < header.size(); ++c) {
    const Eigen::Index limit = role[c] == 0 ? m : n;
    if (index[c] < 0 || index[c] >= limit) {
      throw Error(ErrorKind::Parse, "dataset csv: column index out of range in '" + header[c] + "'");
    }
  }

  DataSet ds = DataSet::empty(n, m);
  Vector u(m), x(n), xn(n);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::Parse, "dataset csv: row " + std::to_string(row) + " has " +
                                        std::to_string(cells.size()) + " fields");
    }
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const double v = detail::parse_double(cells[c]);
      switch (role[c]) {
        case 0: u(index[c]) = v; break;
        case 1: x(index[c]) = v; break;
        default: xn(index[c]) = v; break;
      }
    }
    ds.push_back(x, u, xn);
  }
  return ds;
}

DataSet read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_dataset_csv(in);
}

}  // namespace deepo
