#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace podnolab {

// Machine-readable category carried by every library exception. The CLI
// reports it verbatim in its stderr error JSON.
enum class ErrorKind {
  InvalidArgument,
  ShapeMismatch,
  NonPeriodicGrid,
  ModeBounds,
  NonConvergence,
  NumericalBlowup,
  RankDeficient,
  MissingCache,
  Io,
  VersionMismatch,
  SizeMismatch,
  ChecksumFailure,
  EmptyDataset,
  Config,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::NonPeriodicGrid: return "non-periodic-grid";
    case ErrorKind::ModeBounds: return "mode-bounds";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::NumericalBlowup: return "numerical-blowup";
    case ErrorKind::RankDeficient: return "rank-deficient";
    case ErrorKind::MissingCache: return "missing-cache";
    case ErrorKind::Io: return "io";
    case ErrorKind::VersionMismatch: return "version-mismatch";
    case ErrorKind::SizeMismatch: return "size-mismatch";
    case ErrorKind::ChecksumFailure: return "checksum-failure";
    case ErrorKind::EmptyDataset: return "empty-dataset";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace podnolab
