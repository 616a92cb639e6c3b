#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deepo {

enum class ErrorKind {
  Dimension,
  Unstable,
  NoConvergence,
  NotSymmetric,
  NotPD,
  RankDeficient,
  Infeasible,
  PhiSingular,
  InvalidArgument,
  Io,
  Parse,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` distinguishes failure modes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "Dimension";
    case ErrorKind::Unstable: return "Unstable";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotPD: return "NotPD";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::PhiSingular: return "PhiSingular";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace deepo
