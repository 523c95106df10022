#pragma once

#include <functional>
#include <vector>

#include "podnolab/grid.hpp"
#include "podnolab/pod.hpp"

namespace podnolab {

// -div(a grad u) = f on (0,1)^2 with u = 0 on the boundary.
struct DarcyProblem {
  Grid2D grid;
  Field a;
  // Forcing field; when left empty the constant `forcing` is used.
  Field f;
  double forcing = 1.0;
  double rel_tol = 1e-12;
  int max_iter_factor = 10;

  void validate() const;
};

// Five-point flux-form operator with harmonic-mean face coefficients, applied
// to the interior nodes of u (boundary entries of the result are zero and
// boundary entries of u are ignored).
Field darcy_apply(const DarcyProblem& p, const Field& u);
Field solve_darcy(const DarcyProblem& p);

// i u_t + Lap u + V u = (2/eps)(|u|^eps - 1) u on a periodic grid.
struct NlsProblem {
  Grid2D grid;
  double epsilon = 0.5;
  Field V;
  double T = 0.5;
  int steps = 1000;

  double dt() const { return T / steps; }
  void validate() const;
};

// (2/eps)(|u|^eps - 1) for |u| > 0.
double nls_nonlinearity(double modulus, double eps);

// Exact flow of i w_t = ((2/eps)(|w|^eps - 1) - V) w: a pointwise phase
// rotation. Nodes with w = 0 stay at zero.
void nls_flow_nonlinear(ComplexField& w, const Field& V, double eps, double dt);

// Exact flow of i z_t = -Lap z applied through the DFT.
class NlsLinearFlow {
 public:
  NlsLinearFlow(const Grid2D& grid, double dt);
  void apply(ComplexField& z) const;
  const std::vector<cplx>& multiplier() const { return multiplier_; }

 private:
  Grid2D grid_;
  std::vector<cplx> multiplier_;  // exp(-i dt (kx^2 + ky^2))
};

using NlsObserver = std::function<void(int step, const ComplexField& u)>;

// Lie-Trotter splitting: u_i = Phi_A(dt) Phi_B(dt) u_{i-1}. The observer is
// called with step 0 (initial data) and after every step.
ComplexField lie_trotter_nls(const NlsProblem& p, const ComplexField& u0, const NlsObserver& observer = {});
Field lie_trotter_nls(const NlsProblem& p, const Field& u0);

enum class SnapshotRecipe {
  Endpoints = 1,                // [u_0, u_NT]
  Trajectory = 2,               // [u_0, ..., u_NT]
  TrajectoryWithDifferences = 3 // trajectory plus u_i - u_{i-1}
};

// Runs the reference splitting and collects snapshots per recipe (complex
// states contribute re and im columns).
SnapshotMatrix nls_snapshots(const NlsProblem& p, const ComplexField& u0, SnapshotRecipe recipe);

// Splitting with the linear flow restricted to span(basis):
// c <- (Phi^T e^{i dt Lap} Phi) Phi^T (Phi_B u), u = Phi c.
class PodSplittingSolver {
 public:
  PodSplittingSolver(const NlsProblem& p, const PodBasis& basis);
  // Uses the leading n modes (n <= basis size); n = 0 means all.
  ComplexField solve(const ComplexField& u0, int n = 0) const;

 private:
  NlsProblem problem_;
  PodBasis basis_;
  Eigen::MatrixXcd propagator_;  // Phi^T e^{i dt Lap} Phi for the full basis
};

ComplexField pod_lie_trotter_nls(const NlsProblem& p, const ComplexField& u0, const PodBasis& basis);

// d_x(u_t + u u_x + eps^2 u_xxx) + lambda u_yy = 0 on a periodic grid.
struct KpProblem {
  Grid2D grid;
  double epsilon = 0.02;
  double lambda = -1.0;
  double T = 0.3;
  int steps = 1000;
  bool nonlinear = true;
  // 2/3-rule truncation of the quadratic term.
  bool dealias = true;

  double dt() const { return T / steps; }
  void validate() const;
};

// Linear symbol L(kx, ky) = i(eps^2 kx^3 - lambda ky^2 / kx), standard DFT
// ordering [ky, kx]. Modes with kx = 0 and the x-Nyquist column are frozen
// (L = 0): d_x annihilates them and they carry no dynamics.
std::vector<cplx> kp_linear_symbol(const KpProblem& p);

// Fraction of spectral energy carried by kx = 0 modes.
double kp_kx0_energy_fraction(const Field& u);

Field etdrk4_kp(const KpProblem& p, const Field& u0);
// Exact solution of the linear equation by spectral multiplication.
Field kp_linear_exact(const KpProblem& p, const Field& u0, double t);

// Contour-integral ETDRK4 coefficients for a single linear eigenvalue.
struct Etdrk4Coefficients {
  cplx E, E2, Q, f1, f2, f3;
};
Etdrk4Coefficients etdrk4_coefficients(cplx L, double h, int contour_points = 32);

}  // namespace podnolab
