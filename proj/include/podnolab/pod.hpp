#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "podnolab/grid.hpp"

namespace podnolab {

// Column-per-snapshot matrix [nmesh x M]. Every channel of every field
// becomes its own column, so a complex (re, im) field contributes two.
struct SnapshotMatrix {
  Grid2D grid;
  Eigen::MatrixXd data;
  std::vector<std::string> meta;  // provenance tag per column

  int rows() const { return static_cast<int>(data.rows()); }
  int cols() const { return static_cast<int>(data.cols()); }
};

SnapshotMatrix build_snapshots(const std::vector<Field>& inputs, const std::vector<Field>& outputs);
// Appends every channel of f as a column tagged "<tag>.c<channel>".
void append_snapshot(SnapshotMatrix& X, const Field& f, const std::string& tag);

// Orthonormal POD modes of a snapshot matrix.
struct PodBasis {
  Grid2D grid;
  Eigen::MatrixXd modes;           // [nmesh x N], columns phi_k
  std::vector<double> sigma;       // all singular values of X, nonincreasing
  int snapshot_count = 0;          // M
  // Modes whose singular value fell below 1e-12 sigma_1; these columns are an
  // orthonormal completion rather than data directions.
  std::vector<bool> degenerate;

  int size() const { return static_cast<int>(modes.cols()); }
  int nmesh() const { return static_cast<int>(modes.rows()); }
  // lambda_k = sigma_k^2 / M
  double eigenvalue(int k) const { return sigma[k] * sigma[k] / snapshot_count; }
  double total_energy() const;
  int degenerate_count() const;
};

inline constexpr double kSigmaCutoff = 1e-12;

// N leading left singular vectors of X. Uses the M x M Gram matrix X^T X when
// M < nmesh (method of snapshots), otherwise X X^T.
PodBasis compute_basis(const SnapshotMatrix& X, int N);

// Captured energy fraction sum_{k<N} lambda_k / sum_k lambda_k.
double energy_ratio(const PodBasis& b, int N);
// Smallest N with energy_ratio >= rho, or the number of singular values if
// none reaches it.
int modes_for_energy(const PodBasis& b, double rho);

// Keeps the leading N modes.
PodBasis truncate_basis(const PodBasis& b, int N);

// Per-channel coefficients phi_k^T f, returned as [channels x N]. The pairing
// is the plain dot product: the cell-area weight cancels between forward and
// inverse, so round trips do not depend on the quadrature.
Eigen::MatrixXd pod_forward(const PodBasis& b, const Field& f);
// sum_k c_k phi_k per channel.
Field pod_inverse(const PodBasis& b, const Eigen::MatrixXd& coeffs);

}  // namespace podnolab
