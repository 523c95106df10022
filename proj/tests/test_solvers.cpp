#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "podnolab/datagen.hpp"
#include "podnolab/solvers.hpp"

using namespace podnolab;

namespace {

const double pi = std::numbers::pi;

double darcy_manufactured_error(int n) {
  const Grid2D g = make_grid(n, n, {0, 1, 0, 1}, false);
  DarcyProblem p;
  p.grid = g;
  p.a = Field(g, 1);
  for (double& v : p.a.values()) v = 1.0;
  p.f = Field(g, 1);
  Field exact(g, 1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      exact.at(0, j, i) = std::sin(pi * g.x(i)) * std::sin(pi * g.y(j));
      p.f.at(0, j, i) = 2 * pi * pi * exact.at(0, j, i);
    }
  const Field u = solve_darcy(p);
  double err = 0.0;
  for (std::size_t k = 0; k < u.values().size(); ++k) err = std::max(err, std::abs(u.values()[k] - exact.values()[k]));
  return err;
}

NlsProblem free_nls(int n, double eps, double T, int steps) {
  const Grid2D g = oracle::periodic_grid(n);
  return NlsProblem{g, eps, Field(g, 1), T, steps};
}

KpProblem kp_problem(int n, double T, int steps, bool nonlinear) {
  KpProblem p;
  p.grid = oracle::periodic_grid(n, -pi, pi);
  p.T = T;
  p.steps = steps;
  p.nonlinear = nonlinear;
  return p;
}

double field_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

double field_max(const Field& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

Field shift_x(const Field& f, int s) {
  Field out(f.grid(), f.channels());
  const int nx = f.grid().nx();
  for (int c = 0; c < f.channels(); ++c)
    for (int j = 0; j < f.grid().ny(); ++j)
      for (int i = 0; i < nx; ++i) out.at(c, j, (i + s) % nx) = f.at(c, j, i);
  return out;
}

}  // namespace

TEST_CASE("darcy manufactured solution converges at second order") {
  const double e1 = darcy_manufactured_error(17);
  const double e2 = darcy_manufactured_error(33);
  CHECK(std::abs(e1 / e2 - 4.0) < 0.5);
}

TEST_CASE("darcy solution is symmetric and nonnegative") {
  const Grid2D g = make_grid(21, 21, {0, 1, 0, 1}, false);
  DarcyProblem p;
  p.grid = g;
  p.a = Field(g, 1);
  for (int j = 0; j < 21; ++j)
    for (int i = 0; i < 21; ++i) p.a.at(0, j, i) = 1.0 + g.x(i) * g.y(j) + (i + j > 20 ? 5.0 : 0.0);
  const Field u = solve_darcy(p);
  for (int j = 0; j < 21; ++j)
    for (int i = 0; i < 21; ++i) {
      CHECK(std::abs(u.at(0, j, i) - u.at(0, i, j)) < 1e-10);
      CHECK(u.at(0, j, i) >= 0.0);
      if (i == 0 || j == 0 || i == 20 || j == 20) CHECK(u.at(0, j, i) == 0.0);
    }
}

TEST_CASE("darcy operator is symmetric positive definite") {
  const Grid2D g = make_grid(12, 12, {0, 1, 0, 1}, false);
  DarcyProblem p;
  p.grid = g;
  p.a = sample_darcy_a(g, DarcyLaw{}, 3, 0);
  auto interior = [&](std::uint64_t seed) {
    Field f = oracle::random_field(g, 1, seed);
    for (int j = 0; j < 12; ++j)
      for (int i = 0; i < 12; ++i)
        if (i == 0 || j == 0 || i == 11 || j == 11) f.at(0, j, i) = 0.0;
    return f;
  };
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Field u = interior(2 * s), v = interior(2 * s + 1);
    const double uv = inner_product(darcy_apply(p, u), v);
    const double vu = inner_product(u, darcy_apply(p, v));
    CHECK(std::abs(uv - vu) < 1e-12 * std::abs(uv));
    CHECK(inner_product(darcy_apply(p, u), u) > 0.0);
  }
}

TEST_CASE("darcy input validation") {
  const Grid2D g = make_grid(8, 8, {0, 1, 0, 1}, false);
  DarcyProblem p;
  p.grid = g;
  p.a = Field(g, 1);
  CHECK_THROWS_AS(solve_darcy(p), Error);
}

TEST_CASE("nls plane wave is exact") {
  const int n = 16;
  for (int steps : {1, 7, 50}) {
    const NlsProblem p = free_nls(n, 0.3, 0.1, steps);
    const double kx = 2 * pi / 2.0 * 3, ky = 2 * pi / 2.0 * -2;  // periods 2 on (-1, 1)
    ComplexField u0(p.grid);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) u0.data[j * n + i] = std::polar(1.0, kx * p.grid.x(i) + ky * p.grid.y(j));
    const ComplexField u = lie_trotter_nls(p, u0);
    double err = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const cplx ref = std::polar(1.0, kx * p.grid.x(i) + ky * p.grid.y(j) - (kx * kx + ky * ky) * p.T);
        err = std::max(err, std::abs(u.data[j * n + i] - ref));
      }
    CHECK(err < 1e-10);
  }
}

TEST_CASE("nls mass is conserved at every step") {
  const Grid2D g = oracle::periodic_grid(32);
  const NlsInitLaw law;
  NlsProblem p{g, -0.4, nls_potential(g, law), 0.05, 100};
  const ComplexField u0 = to_complex(sample_nls_u0(g, law, 1, 0));
  auto mass = [](const ComplexField& z) {
    double s = 0.0;
    for (const auto& v : z.data) s += std::norm(v);
    return s;
  };
  const double m0 = mass(u0);
  double worst = 0.0;
  int calls = 0;
  lie_trotter_nls(p, u0, [&](int step, const ComplexField& z) {
    CHECK(step == calls++);
    worst = std::max(worst, std::abs(mass(z) - m0) / m0);
  });
  CHECK(calls == 101);
  CHECK(worst < 1e-12);
}

TEST_CASE("nls sub-flows preserve modulus and norm") {
  const Grid2D g = oracle::periodic_grid(16);
  ComplexField w = to_complex(oracle::random_field(g, 2, 8));
  w.data[3] = 0.0;
  const ComplexField w0 = w;
  nls_flow_nonlinear(w, nls_potential(g, NlsInitLaw{}), 0.25, 0.01);
  for (std::size_t k = 0; k < w.data.size(); ++k) CHECK(std::abs(std::abs(w.data[k]) - std::abs(w0.data[k])) < 1e-15);
  CHECK(w.data[3] == cplx(0.0));

  ComplexField z = w0;
  NlsLinearFlow(g, 0.37).apply(z);
  double n0 = 0.0, n1 = 0.0;
  for (std::size_t k = 0; k < z.data.size(); ++k) {
    n0 += std::norm(w0.data[k]);
    n1 += std::norm(z.data[k]);
  }
  CHECK(std::abs(n1 - n0) / n0 < 1e-12);
}

TEST_CASE("nls nonlinearity has the logarithmic limit") {
  for (double m : {0.1, 0.5, 1.0, 2.0, 7.0}) CHECK(std::abs(nls_nonlinearity(m, 1e-6) - std::log(m * m)) < 1e-5);
  CHECK(nls_nonlinearity(1.0, 0.3) == 0.0);
}

TEST_CASE("nls problem validation") {
  CHECK_THROWS_AS(free_nls(8, 0.0, 0.1, 1).validate(), Error);
  CHECK_THROWS_AS(free_nls(8, 0.5, 0.1, 1).validate(), Error);
  CHECK_THROWS_AS(free_nls(8, -1.0, 0.1, 1).validate(), Error);
  CHECK_NOTHROW(free_nls(8, 0.49, 0.1, 1).validate());
}

TEST_CASE("pod splitting with a full basis reproduces the fft splitting") {
  const Grid2D g = oracle::periodic_grid(8);
  const NlsInitLaw law;
  NlsProblem p{g, 0.2, nls_potential(g, law), 0.02, 40};
  const ComplexField u0 = to_complex(nls_packet_sum(g, 4.0, {WavePacket{0.2, -0.1, 1.0, 0.5}}));
  const SnapshotMatrix X = nls_snapshots(p, u0, SnapshotRecipe::Trajectory);
  CHECK(X.cols() == 2 * 41);
  const PodBasis full = compute_basis(X, 64);
  const ComplexField ref = lie_trotter_nls(p, u0);
  const ComplexField pod = pod_lie_trotter_nls(p, u0, full);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < ref.data.size(); ++k) {
    num += std::norm(pod.data[k] - ref.data[k]);
    den += std::norm(ref.data[k]);
  }
  CHECK(std::sqrt(num / den) < 1e-10);

  CHECK(nls_snapshots(p, u0, SnapshotRecipe::Endpoints).cols() == 4);
  CHECK(nls_snapshots(p, u0, SnapshotRecipe::TrajectoryWithDifferences).cols() == 2 * (41 + 40));
}

TEST_CASE("rank-one pod splitting stays in the span of the initial data") {
  const Grid2D g = oracle::periodic_grid(16);
  NlsProblem p{g, 0.2, nls_potential(g, NlsInitLaw{}), 0.02, 20};
  const Field a = nls_packet_sum(g, 10.0, {WavePacket{}});  // real bump
  SnapshotMatrix X{g, Eigen::MatrixXd(g.size(), 3), {}};
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < g.size(); ++k) X.data(k, c) = a.channel(0)[k];
  const PodBasis b = compute_basis(X, 1);
  const ComplexField u = pod_lie_trotter_nls(p, to_complex(a), b);
  const Eigen::VectorXd phi = b.modes.col(0);
  cplx c = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) c += phi(k) * u.data[k];
  double resid = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) resid = std::max(resid, std::abs(u.data[k] - c * phi(k)));
  CHECK(resid < 1e-12);
  CHECK(std::abs(c) > 0.0);
}

TEST_CASE("kp linear propagation is exact") {
  for (int steps : {1, 10, 37}) {
    const KpProblem p = kp_problem(32, 0.3, steps, false);
    const Field u0 = sample_kp_u0(p.grid, KpInitLaw{}, 2, 0);
    const Field a = etdrk4_kp(p, u0);
    const Field b = kp_linear_exact(p, u0, p.T);
    CHECK(field_diff(a, b) / field_max(b) < 1e-10);
  }
}

TEST_CASE("kp linear exact propagator on a single mode") {
  KpProblem p = kp_problem(16, 1.0, 1, false);
  p.epsilon = 1.0;
  p.lambda = -1.0;
  Field u0(p.grid, 1);
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) u0.at(0, j, i) = std::cos(p.grid.x(i));
  CHECK(field_diff(kp_linear_exact(p, u0, 0.0), u0) < 1e-14);
  for (double t : {0.3, 1.7}) {
    const Field u = kp_linear_exact(p, u0, t);
    // symbol i(eps^2 kx^3 - lambda ky^2 / kx) = i at (1, 0): cos(x) -> cos(x + t)
    Field ref(p.grid, 1);
    for (int j = 0; j < 16; ++j)
      for (int i = 0; i < 16; ++i) ref.at(0, j, i) = std::cos(p.grid.x(i) + t);
    CHECK(field_diff(u, ref) < 1e-12);
  }
  const Field r = sample_kp_u0(p.grid, KpInitLaw{}, 4, 0);
  CHECK(std::abs(l2_norm(kp_linear_exact(p, r, 0.9)) - l2_norm(r)) < 1e-12 * l2_norm(r));
}

TEST_CASE("kp symbol and frozen modes") {
  const KpProblem p = kp_problem(8, 0.1, 1, true);
  const auto L = kp_linear_symbol(p);
  for (int ky = 0; ky < 8; ++ky) {
    CHECK(L[ky * 8 + 0] == cplx(0.0));
    CHECK(L[ky * 8 + 4] == cplx(0.0));
    for (int kx : {1, 2, 3, 5, 7}) {
      const double k = signed_frequency(kx, 8), l = signed_frequency(ky, 8);
      const cplx ref(0.0, p.epsilon * p.epsilon * k * k * k - p.lambda * l * l / k);
      CHECK(std::abs(L[ky * 8 + kx] - ref) < 1e-12);
    }
  }
}

TEST_CASE("kp zero data stays zero and shifts commute") {
  const KpProblem p = kp_problem(32, 0.05, 20, true);
  const Field zero(p.grid, 1);
  const Field still = etdrk4_kp(p, zero);
  for (double v : still.values()) CHECK(v == 0.0);

  const Field u0 = sample_kp_u0(p.grid, KpInitLaw{}, 6, 0);
  const Field a = shift_x(etdrk4_kp(p, u0), 5);
  const Field b = etdrk4_kp(p, shift_x(u0, 5));
  CHECK(field_diff(a, b) / field_max(a) < 1e-10);
  const Field c = shift_x(kp_linear_exact(p, u0, 0.2), 3);
  const Field d = kp_linear_exact(p, shift_x(u0, 3), 0.2);
  CHECK(field_diff(c, d) / field_max(c) < 1e-10);
}

TEST_CASE("etdrk4 is fourth order on nonlinear kp") {
  auto run = [](int steps) {
    const KpProblem p = kp_problem(32, 0.05, steps, true);
    return etdrk4_kp(p, sample_kp_u0(p.grid, KpInitLaw{}, 0, 0));
  };
  const Field u1 = run(10), u2 = run(20), u4 = run(40);
  const double order = std::log2(field_diff(u1, u2) / field_diff(u2, u4));
  INFO("observed order " << order);
  CHECK(order >= 3.5);
}

TEST_CASE("etdrk4 coefficients match closed forms away from zero") {
  const double h = 0.01;
  for (cplx L : {cplx(0, 30.0), cplx(-5.0, 2.0), cplx(0, -120.0)}) {
    const Etdrk4Coefficients c = etdrk4_coefficients(L, h);
    const cplx z = L * h;
    CHECK(std::abs(c.E - std::exp(z)) < 1e-14);
    CHECK(std::abs(c.E2 - std::exp(z / 2.0)) < 1e-14);
    const cplx Q = h * (std::exp(z / 2.0) - 1.0) / z;
    CHECK(std::abs(c.Q - Q) < 1e-12 * std::abs(Q));
    const cplx f1 = h * (-4.0 - z + std::exp(z) * (4.0 - 3.0 * z + z * z)) / (z * z * z);
    CHECK(std::abs(c.f1 - f1) < 1e-9 * std::abs(f1));
  }
  const Etdrk4Coefficients c0 = etdrk4_coefficients(0.0, h);
  CHECK(std::abs(c0.Q - h / 2) < 1e-15);
  CHECK(std::abs(c0.f1 - h / 6) < 1e-15);
  CHECK(std::abs(c0.f2 - h / 6) < 1e-15);
  CHECK(std::abs(c0.f3 - h / 6) < 1e-15);
}
