#include "podnolab/pod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace podnolab {

void append_snapshot(SnapshotMatrix& X, const Field& f, const std::string& tag) {
  if (X.data.size() == 0 && X.meta.empty()) {
    X.grid = f.grid();
    X.data.resize(static_cast<Eigen::Index>(f.grid().size()), 0);
  }
  require(f.grid() == X.grid, ErrorKind::ShapeMismatch, "snapshot " + tag + " is on a different grid");
  const Eigen::Index n = X.data.rows();
  const Eigen::Index start = X.data.cols();
  X.data.conservativeResize(n, start + f.channels());
  for (int c = 0; c < f.channels(); ++c) {
    auto src = f.channel(c);
    X.data.col(start + c) = Eigen::Map<const Eigen::VectorXd>(src.data(), n);
    X.meta.push_back(tag + ".c" + std::to_string(c));
  }
}

SnapshotMatrix build_snapshots(const std::vector<Field>& inputs, const std::vector<Field>& outputs) {
  require(!inputs.empty() || !outputs.empty(), ErrorKind::InvalidArgument, "snapshot matrix needs at least one field");
  SnapshotMatrix X;
  for (std::size_t j = 0; j < inputs.size(); ++j) append_snapshot(X, inputs[j], "in" + std::to_string(j));
  for (std::size_t j = 0; j < outputs.size(); ++j) append_snapshot(X, outputs[j], "out" + std::to_string(j));
  return X;
}

double PodBasis::total_energy() const {
  double total = 0.0;
  for (double s : sigma) total += s * s;
  return total / snapshot_count;
}

int PodBasis::degenerate_count() const {
  return static_cast<int>(std::count(degenerate.begin(), degenerate.end(), true));
}

namespace {

// Two passes of modified Gram-Schmidt of column k against columns [0, k).
double orthogonalize(Eigen::MatrixXd& Q, Eigen::Index k) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < k; ++j) Q.col(k) -= Q.col(j).dot(Q.col(k)) * Q.col(j);
  }
  return Q.col(k).norm();
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-10 * scale) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

}  // namespace

PodBasis compute_basis(const SnapshotMatrix& X, int N) {
  const Eigen::Index nmesh = X.data.rows();
  const Eigen::Index M = X.data.cols();
  require(M >= 1 && nmesh >= 1, ErrorKind::InvalidArgument, "compute_basis: empty snapshot matrix");
  require(N >= 1 && N <= std::min(nmesh, M), ErrorKind::InvalidArgument,
          "compute_basis: N=" + std::to_string(N) + " outside [1, min(nmesh, M)=" +
              std::to_string(std::min(nmesh, M)) + "]");
  require(X.data.allFinite(), ErrorKind::InvalidArgument, "compute_basis: non-finite snapshot entries");

  PodBasis b;
  b.grid = X.grid;
  b.snapshot_count = static_cast<int>(M);
  b.modes.resize(nmesh, N);
  b.degenerate.assign(N, false);

  const bool snapshots_route = M < nmesh;
  const Eigen::MatrixXd gram = snapshots_route ? Eigen::MatrixXd(X.data.transpose() * X.data)
                                               : Eigen::MatrixXd(X.data * X.data.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  require(eig.info() == Eigen::Success, ErrorKind::NonConvergence, "compute_basis: eigensolver failed");
  const Eigen::Index count = gram.rows();
  // Eigen returns ascending eigenvalues.
  b.sigma.resize(count);
  for (Eigen::Index k = 0; k < count; ++k) b.sigma[k] = std::sqrt(std::max(eig.eigenvalues()[count - 1 - k], 0.0));

  const double cutoff = kSigmaCutoff * b.sigma[0];
  for (int k = 0; k < N; ++k) b.degenerate[k] = b.sigma[k] <= cutoff || b.sigma[0] == 0.0;

  if (!snapshots_route) {
    // Eigenvectors of X X^T are already a complete orthonormal set.
    for (int k = 0; k < N; ++k) b.modes.col(k) = eig.eigenvectors().col(count - 1 - k);
  } else {
    // phi_k = X w_k / sigma_k, then re-orthonormalized; degenerate slots are
    // filled from unit vectors.
    Eigen::Index unit = 0;
    for (int k = 0; k < N; ++k) {
      if (!b.degenerate[k]) {
        b.modes.col(k) = X.data * eig.eigenvectors().col(count - 1 - k) / b.sigma[k];
        b.modes.col(k) /= orthogonalize(b.modes, k);
        continue;
      }
      for (;; ++unit) {
        require(unit < nmesh, ErrorKind::RankDeficient, "compute_basis: could not complete the basis");
        b.modes.col(k).setZero();
        b.modes(unit, k) = 1.0;
        const double norm = orthogonalize(b.modes, k);
        if (norm > 0.5) {
          b.modes.col(k) /= norm;
          ++unit;
          break;
        }
      }
    }
  }
  for (int k = 0; k < N; ++k) fix_sign(b.modes.col(k));
  return b;
}

double energy_ratio(const PodBasis& b, int N) {
  require(N >= 0 && N <= static_cast<int>(b.sigma.size()), ErrorKind::InvalidArgument,
          "energy_ratio: N=" + std::to_string(N) + " exceeds available modes");
  // Same summation order for numerator and total, so N = all gives exactly 1.
  double captured = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < b.sigma.size(); ++k) {
    const double lambda = b.sigma[k] * b.sigma[k];
    total += lambda;
    if (static_cast<int>(k) < N) captured += lambda;
  }
  if (total == 0.0) return N == static_cast<int>(b.sigma.size()) ? 1.0 : 0.0;
  return captured / total;
}

int modes_for_energy(const PodBasis& b, double rho) {
  const int available = static_cast<int>(b.sigma.size());
  for (int n = 1; n <= available; ++n) {
    if (energy_ratio(b, n) >= rho) return n;
  }
  return available;
}

PodBasis truncate_basis(const PodBasis& b, int N) {
  require(N >= 1 && N <= b.size(), ErrorKind::InvalidArgument, "truncate_basis: N out of range");
  PodBasis out = b;
  out.modes = b.modes.leftCols(N);
  out.degenerate.resize(N);
  return out;
}

Eigen::MatrixXd pod_forward(const PodBasis& b, const Field& f) {
  require(f.grid() == b.grid, ErrorKind::ShapeMismatch, "pod_forward: grid mismatch");
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMat F = Eigen::Map<const RowMat>(f.values().data(), f.channels(), b.nmesh());
  return F * b.modes;
}

Field pod_inverse(const PodBasis& b, const Eigen::MatrixXd& coeffs) {
  require(coeffs.cols() == b.size(), ErrorKind::ShapeMismatch,
          "pod_inverse: expected " + std::to_string(b.size()) + " coefficients per channel");
  require(coeffs.rows() >= 1, ErrorKind::ShapeMismatch, "pod_inverse: no channels");
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Field f(b.grid, static_cast<int>(coeffs.rows()));
  const RowMat F = coeffs * b.modes.transpose();
  Eigen::Map<RowMat>(f.values().data(), coeffs.rows(), b.nmesh()) = F;
  return f;
}

}  // namespace podnolab
