#include "podnolab/solvers.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <string>

#include "podnolab/spectral.hpp"

namespace podnolab {

// ---------------------------------------------------------------------------
// Darcy

void DarcyProblem::validate() const {
  require(!grid.periodic(), ErrorKind::InvalidArgument, "darcy problem needs a non-periodic grid");
  require(grid.nx() >= 3 && grid.ny() >= 3, ErrorKind::InvalidArgument, "darcy grid needs interior nodes");
  require(a.grid() == grid && a.channels() == 1, ErrorKind::ShapeMismatch, "darcy permeability must be one channel on the grid");
  for (double v : a.values()) {
    require(std::isfinite(v) && v > 0.0, ErrorKind::InvalidArgument, "darcy permeability must be positive everywhere");
  }
  if (f.channels() != 0) {
    require(f.grid() == grid && f.channels() == 1, ErrorKind::ShapeMismatch, "darcy forcing must be one channel on the grid");
  }
  require(rel_tol > 0.0 && max_iter_factor >= 1, ErrorKind::InvalidArgument, "darcy solver settings");
}

namespace {

struct DarcyOperator {
  int nx, ny;
  double inv_dx2, inv_dy2;
  std::vector<double> ax;  // face (j, i+1/2), i in [0, nx-1)
  std::vector<double> ay;  // face (j+1/2, i), j in [0, ny-1)

  explicit DarcyOperator(const DarcyProblem& p)
      : nx(p.grid.nx()), ny(p.grid.ny()),
        inv_dx2(1.0 / (p.grid.dx() * p.grid.dx())), inv_dy2(1.0 / (p.grid.dy() * p.grid.dy())),
        ax(static_cast<std::size_t>(ny) * (nx - 1)), ay(static_cast<std::size_t>(ny - 1) * nx) {
    auto harmonic = [](double l, double r) { return 2.0 * l * r / (l + r); };
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) ax[static_cast<std::size_t>(j) * (nx - 1) + i] = harmonic(p.a.at(0, j, i), p.a.at(0, j, i + 1));
    }
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i < nx; ++i) ay[static_cast<std::size_t>(j) * nx + i] = harmonic(p.a.at(0, j, i), p.a.at(0, j + 1, i));
    }
  }

  bool interior(int i, int j) const { return i > 0 && j > 0 && i < nx - 1 && j < ny - 1; }

  // out = A u on interior nodes, zero elsewhere; boundary values of u read as 0.
  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    auto val = [&](int i, int j) { return interior(i, j) ? u[static_cast<std::size_t>(j) * nx + i] : 0.0; };
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t n = static_cast<std::size_t>(j) * nx + i;
        if (!interior(i, j)) {
          out[n] = 0.0;
          continue;
        }
        const double c = u[n];
        const double east = ax[static_cast<std::size_t>(j) * (nx - 1) + i];
        const double west = ax[static_cast<std::size_t>(j) * (nx - 1) + i - 1];
        const double north = ay[static_cast<std::size_t>(j) * nx + i];
        const double south = ay[static_cast<std::size_t>(j - 1) * nx + i];
        out[n] = (east * (c - val(i + 1, j)) + west * (c - val(i - 1, j))) * inv_dx2 +
                 (north * (c - val(i, j + 1)) + south * (c - val(i, j - 1))) * inv_dy2;
      }
    }
  }
};

double interior_dot(const DarcyOperator& op, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (int j = 1; j < op.ny - 1; ++j) {
    for (int i = 1; i < op.nx - 1; ++i) {
      const std::size_t n = static_cast<std::size_t>(j) * op.nx + i;
      s += a[n] * b[n];
    }
  }
  return s;
}

}  // namespace

Field darcy_apply(const DarcyProblem& p, const Field& u) {
  p.validate();
  require(u.grid() == p.grid && u.channels() == 1, ErrorKind::ShapeMismatch, "darcy_apply: field shape");
  DarcyOperator op(p);
  Field out(p.grid, 1);
  op.apply(u.values(), out.values());
  return out;
}

Field solve_darcy(const DarcyProblem& p) {
  p.validate();
  DarcyOperator op(p);
  const std::size_t n = p.grid.size();
  std::vector<double> b(n, 0.0);
  for (int j = 1; j < op.ny - 1; ++j) {
    for (int i = 1; i < op.nx - 1; ++i) {
      b[static_cast<std::size_t>(j) * op.nx + i] = p.f.channels() != 0 ? p.f.at(0, j, i) : p.forcing;
    }
  }
  Field u(p.grid, 1);
  std::vector<double>& x = u.values();
  std::vector<double> r = b, d = b, q(n);
  const double b_norm = std::sqrt(interior_dot(op, b, b));
  if (b_norm == 0.0) return u;
  double rr = interior_dot(op, r, r);
  const int max_iter = p.max_iter_factor * static_cast<int>(n);
  int iter = 0;
  while (std::sqrt(rr) > p.rel_tol * b_norm) {
    require(iter < max_iter, ErrorKind::NonConvergence,
            "solve_darcy: CG did not converge in " + std::to_string(max_iter) + " iterations");
    op.apply(d, q);
    const double alpha = rr / interior_dot(op, d, q);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * d[k];
      r[k] -= alpha * q[k];
    }
    const double rr_new = interior_dot(op, r, r);
    const double beta = rr_new / rr;
    for (std::size_t k = 0; k < n; ++k) d[k] = r[k] + beta * d[k];
    rr = rr_new;
    ++iter;
  }
  // Recursive residuals drift; confirm against the assembled operator.
  op.apply(x, q);
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - q[k];
  const double true_residual = std::sqrt(interior_dot(op, r, r)) / b_norm;
  require(true_residual < 1e-10, ErrorKind::NonConvergence,
          "solve_darcy: final relative residual " + std::to_string(true_residual));
  return u;
}

// ---------------------------------------------------------------------------
// NLS

void NlsProblem::validate() const {
  require(grid.periodic(), ErrorKind::NonPeriodicGrid, "nls problem needs a periodic grid");
  require(std::isfinite(epsilon) && epsilon > -1.0 && epsilon < 0.5 && epsilon != 0.0, ErrorKind::InvalidArgument,
          "nls epsilon must lie in (-1,0) U (0,1/2)");
  require(steps >= 1 && T > 0.0, ErrorKind::InvalidArgument, "nls problem needs steps >= 1 and T > 0");
  require(V.grid() == grid && V.channels() == 1, ErrorKind::ShapeMismatch, "nls potential must be one channel on the grid");
}

double nls_nonlinearity(double modulus, double eps) { return 2.0 / eps * (std::pow(modulus, eps) - 1.0); }

void nls_flow_nonlinear(ComplexField& w, const Field& V, double eps, double dt) {
  auto v = V.channel(0);
  for (std::size_t n = 0; n < w.data.size(); ++n) {
    const double modulus = std::abs(w.data[n]);
    if (modulus == 0.0) continue;
    const double phase = -dt * (nls_nonlinearity(modulus, eps) - v[n]);
    w.data[n] *= std::polar(1.0, phase);
  }
}

NlsLinearFlow::NlsLinearFlow(const Grid2D& grid, double dt) : grid_(grid), multiplier_(grid.size()) {
  for (int ky = 0; ky < grid.ny(); ++ky) {
    const double wy = grid.wavenumber_y(ky);
    for (int kx = 0; kx < grid.nx(); ++kx) {
      const double wx = grid.wavenumber_x(kx);
      multiplier_[static_cast<std::size_t>(ky) * grid.nx() + kx] = std::polar(1.0, -dt * (wx * wx + wy * wy));
    }
  }
}

void NlsLinearFlow::apply(ComplexField& z) const {
  Fft2D fft(grid_.nx(), grid_.ny());
  fft.forward(z.data);
  for (std::size_t n = 0; n < z.data.size(); ++n) z.data[n] *= multiplier_[n];
  fft.inverse(z.data);
}

namespace {

void check_finite_state(const ComplexField& u, int step) {
  double s = 0.0;
  for (const auto& v : u.data) s += std::norm(v);
  require(std::isfinite(s), ErrorKind::NumericalBlowup, "non-finite state at step " + std::to_string(step));
}

}  // namespace

ComplexField lie_trotter_nls(const NlsProblem& p, const ComplexField& u0, const NlsObserver& observer) {
  p.validate();
  require(u0.grid == p.grid, ErrorKind::ShapeMismatch, "lie_trotter_nls: initial data grid mismatch");
  const double dt = p.dt();
  NlsLinearFlow linear(p.grid, dt);
  Fft2D fft(p.grid.nx(), p.grid.ny());
  ComplexField u = u0;
  if (observer) observer(0, u);
  for (int step = 1; step <= p.steps; ++step) {
    nls_flow_nonlinear(u, p.V, p.epsilon, dt);
    fft.forward(u.data);
    for (std::size_t n = 0; n < u.data.size(); ++n) u.data[n] *= linear.multiplier()[n];
    fft.inverse(u.data);
    check_finite_state(u, step);
    if (observer) observer(step, u);
  }
  return u;
}

Field lie_trotter_nls(const NlsProblem& p, const Field& u0) { return to_field(lie_trotter_nls(p, to_complex(u0))); }

SnapshotMatrix nls_snapshots(const NlsProblem& p, const ComplexField& u0, SnapshotRecipe recipe) {
  std::vector<ComplexField> states;
  lie_trotter_nls(p, u0, [&](int step, const ComplexField& u) {
    if (recipe != SnapshotRecipe::Endpoints || step == 0 || step == p.steps) states.push_back(u);
  });
  SnapshotMatrix X;
  for (std::size_t i = 0; i < states.size(); ++i) append_snapshot(X, to_field(states[i]), "u" + std::to_string(i));
  if (recipe == SnapshotRecipe::TrajectoryWithDifferences) {
    for (std::size_t i = 1; i < states.size(); ++i) {
      ComplexField d = states[i];
      for (std::size_t n = 0; n < d.data.size(); ++n) d.data[n] -= states[i - 1].data[n];
      append_snapshot(X, to_field(d), "du" + std::to_string(i));
    }
  }
  return X;
}

PodSplittingSolver::PodSplittingSolver(const NlsProblem& p, const PodBasis& basis) : problem_(p), basis_(basis) {
  p.validate();
  require(basis.grid == p.grid, ErrorKind::ShapeMismatch, "pod splitting: basis/grid mismatch");
  const Eigen::Index nmesh = basis.nmesh();
  const Eigen::Index N = basis.size();
  NlsLinearFlow linear(p.grid, p.dt());
  Eigen::MatrixXcd propagated(nmesh, N);
  ComplexField z(p.grid);
  for (Eigen::Index k = 0; k < N; ++k) {
    for (Eigen::Index n = 0; n < nmesh; ++n) z.data[n] = basis.modes(n, k);
    linear.apply(z);
    for (Eigen::Index n = 0; n < nmesh; ++n) propagated(n, k) = z.data[n];
  }
  propagator_ = basis.modes.transpose().cast<cplx>() * propagated;
}

ComplexField PodSplittingSolver::solve(const ComplexField& u0, int n) const {
  const int N = n == 0 ? basis_.size() : n;
  require(N >= 1 && N <= basis_.size(), ErrorKind::InvalidArgument, "pod splitting: mode count out of range");
  require(u0.grid == problem_.grid, ErrorKind::ShapeMismatch, "pod splitting: initial data grid mismatch");
  const Eigen::MatrixXcd phi = basis_.modes.leftCols(N).cast<cplx>();
  const Eigen::MatrixXcd prop = propagator_.topLeftCorner(N, N);
  ComplexField u = u0;
  const auto nmesh = static_cast<Eigen::Index>(u.data.size());
  Eigen::VectorXcd state(nmesh);
  Eigen::VectorXcd c(N);
  for (int step = 1; step <= problem_.steps; ++step) {
    nls_flow_nonlinear(u, problem_.V, problem_.epsilon, problem_.dt());
    for (Eigen::Index n = 0; n < nmesh; ++n) state[n] = u.data[n];
    c.noalias() = phi.transpose() * state;
    const Eigen::VectorXcd next = prop * c;
    state.noalias() = phi * next;
    for (Eigen::Index n = 0; n < nmesh; ++n) u.data[n] = state[n];
    check_finite_state(u, step);
  }
  return u;
}

ComplexField pod_lie_trotter_nls(const NlsProblem& p, const ComplexField& u0, const PodBasis& basis) {
  return PodSplittingSolver(p, basis).solve(u0);
}

// ---------------------------------------------------------------------------
// KP

void KpProblem::validate() const {
  require(grid.periodic(), ErrorKind::NonPeriodicGrid, "kp problem needs a periodic grid");
  require(epsilon > 0.0, ErrorKind::InvalidArgument, "kp epsilon must be positive");
  require(steps >= 1 && T >= 0.0, ErrorKind::InvalidArgument, "kp problem needs steps >= 1 and T >= 0");
}

namespace {

bool kp_frozen(int kx_index, const Grid2D& g) {
  return kx_index == 0 || (g.nx() % 2 == 0 && kx_index == g.nx() / 2);
}

}  // namespace

std::vector<cplx> kp_linear_symbol(const KpProblem& p) {
  const Grid2D& g = p.grid;
  std::vector<cplx> L(g.size(), 0.0);
  const double e2 = p.epsilon * p.epsilon;
  for (int ky = 0; ky < g.ny(); ++ky) {
    const double wy = g.wavenumber_y(ky);
    for (int kx = 0; kx < g.nx(); ++kx) {
      if (kp_frozen(kx, g)) continue;
      const double wx = g.wavenumber_x(kx);
      L[static_cast<std::size_t>(ky) * g.nx() + kx] = cplx(0.0, e2 * wx * wx * wx - p.lambda * wy * wy / wx);
    }
  }
  return L;
}

double kp_kx0_energy_fraction(const Field& u) {
  const Spectrum2D s = dft2(u);
  double total = 0.0;
  double zero = 0.0;
  for (int ky = 0; ky < s.grid.ny(); ++ky) {
    for (int kx = 0; kx < s.grid.nx(); ++kx) {
      const double e = std::norm(s.at(0, ky, kx));
      total += e;
      if (kx == 0) zero += e;
    }
  }
  return total > 0.0 ? zero / total : 0.0;
}

Etdrk4Coefficients etdrk4_coefficients(cplx L, double h, int contour_points) {
  const cplx Lh = L * h;
  Etdrk4Coefficients c{std::exp(Lh), std::exp(Lh / 2.0), 0.0, 0.0, 0.0, 0.0};
  for (int j = 0; j < contour_points; ++j) {
    const cplx r = std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / contour_points);
    const cplx z = Lh + r;
    const cplx ez = std::exp(z);
    const cplx z3 = z * z * z;
    c.Q += (std::exp(z / 2.0) - 1.0) / z;
    c.f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
    c.f2 += (2.0 + z + ez * (z - 2.0)) / z3;
    c.f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
  }
  const double scale = h / contour_points;
  c.Q *= scale;
  c.f1 *= scale;
  c.f2 *= scale;
  c.f3 *= scale;
  return c;
}

namespace {

class KpNonlinearTerm {
 public:
  explicit KpNonlinearTerm(const KpProblem& p) : fft_(p.grid.nx(), p.grid.ny()), buf_(p.grid.size()), factor_(p.grid.size()) {
    const Grid2D& g = p.grid;
    for (int ky = 0; ky < g.ny(); ++ky) {
      const int sy = std::abs(signed_frequency(ky, g.ny()));
      for (int kx = 0; kx < g.nx(); ++kx) {
        const int sx = std::abs(signed_frequency(kx, g.nx()));
        const bool keep = !p.dealias || (3 * sx < g.nx() && 3 * sy < g.ny());
        const double wx = kp_frozen(kx, g) ? 0.0 : g.wavenumber_x(kx);
        // F[-u u_x] = -(i kx / 2) F[u^2]
        factor_[static_cast<std::size_t>(ky) * g.nx() + kx] = keep ? cplx(0.0, -0.5 * wx) : cplx(0.0);
      }
    }
  }

  void operator()(const std::vector<cplx>& v, std::vector<cplx>& out) {
    buf_ = v;
    fft_.inverse(buf_);
    for (auto& b : buf_) b = b.real() * b.real();
    fft_.forward(buf_);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = factor_[n] * buf_[n];
  }

 private:
  Fft2D fft_;
  std::vector<cplx> buf_;
  std::vector<cplx> factor_;
};

std::vector<cplx> real_spectrum(const Field& u) {
  ComplexField z(u.grid());
  auto src = u.channel(0);
  for (std::size_t n = 0; n < src.size(); ++n) z.data[n] = src[n];
  return dft2(z);
}

Field real_field_from_spectrum(const Grid2D& g, std::vector<cplx> v) {
  Fft2D(g.nx(), g.ny()).inverse(v);
  Field u(g, 1);
  auto dst = u.channel(0);
  for (std::size_t n = 0; n < v.size(); ++n) dst[n] = v[n].real();
  return u;
}

}  // namespace

Field etdrk4_kp(const KpProblem& p, const Field& u0) {
  p.validate();
  require(u0.grid() == p.grid && u0.channels() == 1, ErrorKind::ShapeMismatch, "etdrk4_kp: initial data shape");
  const std::size_t n = p.grid.size();
  const double h = p.dt();
  const std::vector<cplx> L = kp_linear_symbol(p);
  std::vector<Etdrk4Coefficients> coef(n);
  for (std::size_t k = 0; k < n; ++k) coef[k] = etdrk4_coefficients(L[k], h);

  std::vector<cplx> v = real_spectrum(u0);
  if (!p.nonlinear) {
    for (int step = 0; step < p.steps; ++step) {
      for (std::size_t k = 0; k < n; ++k) v[k] *= coef[k].E;
    }
    return real_field_from_spectrum(p.grid, std::move(v));
  }

  KpNonlinearTerm nonlinear(p);
  std::vector<cplx> Nv(n), Na(n), Nb(n), Nc(n), a(n), b(n), c(n);
  for (int step = 1; step <= p.steps; ++step) {
    nonlinear(v, Nv);
    for (std::size_t k = 0; k < n; ++k) a[k] = coef[k].E2 * v[k] + coef[k].Q * Nv[k];
    nonlinear(a, Na);
    for (std::size_t k = 0; k < n; ++k) b[k] = coef[k].E2 * v[k] + coef[k].Q * Na[k];
    nonlinear(b, Nb);
    for (std::size_t k = 0; k < n; ++k) c[k] = coef[k].E2 * a[k] + coef[k].Q * (2.0 * Nb[k] - Nv[k]);
    nonlinear(c, Nc);
    double mass = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      v[k] = coef[k].E * v[k] + Nv[k] * coef[k].f1 + 2.0 * (Na[k] + Nb[k]) * coef[k].f2 + Nc[k] * coef[k].f3;
      mass += std::norm(v[k]);
    }
    require(std::isfinite(mass), ErrorKind::NumericalBlowup, "etdrk4_kp: non-finite state at step " + std::to_string(step));
  }
  return real_field_from_spectrum(p.grid, std::move(v));
}

Field kp_linear_exact(const KpProblem& p, const Field& u0, double t) {
  p.validate();
  require(u0.grid() == p.grid && u0.channels() == 1, ErrorKind::ShapeMismatch, "kp_linear_exact: initial data shape");
  const double frac = kp_kx0_energy_fraction(u0);
  if (frac > 1e-8) {
    std::clog << "warning: kp_linear_exact: kx=0 modes carry " << frac
              << " of the energy; they are carried unchanged\n";
  }
  const std::vector<cplx> L = kp_linear_symbol(p);
  std::vector<cplx> v = real_spectrum(u0);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] *= std::exp(L[k] * t);
  return real_field_from_spectrum(p.grid, std::move(v));
}

}  // namespace podnolab
