#include "podnolab/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "podnolab/rng.hpp"

namespace podnolab {

void DarcyLaw::validate() const {
  require(hi > lo && lo > 0.0, ErrorKind::InvalidArgument, "darcy law needs hi > lo > 0");
  require(tau2 > 0.0 && power > 0.0, ErrorKind::InvalidArgument, "darcy law needs tau2 > 0 and power > 0");
  require(kl_cutoff_factor >= 1, ErrorKind::InvalidArgument, "darcy KL cutoff factor must be >= 1");
}

void NlsInitLaw::validate() const {
  require(alpha > 0.0, ErrorKind::InvalidArgument, "nls law needs alpha > 0");
  require(beta_hi > beta_lo && beta_lo >= 0.0, ErrorKind::InvalidArgument, "nls beta range must be ordered");
}

void KpInitLaw::validate() const {
  require(theta_hi > theta_lo && theta_lo > 0.0, ErrorKind::InvalidArgument, "kp theta range must be positive and ordered");
  require(delta > 0.0, ErrorKind::InvalidArgument, "kp delta must be positive");
}

Field sample_darcy_latent(const Grid2D& grid, const DarcyLaw& law, std::uint64_t seed, std::uint64_t index,
                          int cutoff) {
  law.validate();
  require(!grid.periodic() && grid.bounds() == Bounds{0.0, 1.0, 0.0, 1.0}, ErrorKind::InvalidArgument,
          "darcy sampling needs a non-periodic (0,1)^2 grid");
  require(cutoff >= 0 && cutoff < (1 << 16), ErrorKind::InvalidArgument, "darcy KL cutoff out of range");
  const int K = cutoff + 1;
  const double pi = std::numbers::pi;
  const std::uint64_t key = KeyedRng(seed, index, RngPurpose::DarcyField).key();

  // coef[k1][k2] = xi * std * normalization; z(x,y) = sum coef cos(pi k1 x) cos(pi k2 y)
  std::vector<double> coef(static_cast<std::size_t>(K) * K);
  for (int k1 = 0; k1 < K; ++k1) {
    for (int k2 = 0; k2 < K; ++k2) {
      const double eig = pi * pi * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2) + law.tau2;
      const double sd = std::pow(eig, -0.5 * law.power);
      const double norm = std::sqrt(static_cast<double>(1 << ((k1 > 0) + (k2 > 0))));
      const double xi = KeyedRng::normal_at(key, (static_cast<std::uint64_t>(k1) << 16) | static_cast<std::uint64_t>(k2));
      coef[static_cast<std::size_t>(k1) * K + k2] = xi * sd * norm;
    }
  }

  const int nx = grid.nx();
  const int ny = grid.ny();
  std::vector<double> cx(static_cast<std::size_t>(K) * nx);
  std::vector<double> cy(static_cast<std::size_t>(K) * ny);
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < nx; ++i) cx[static_cast<std::size_t>(k) * nx + i] = std::cos(pi * k * grid.x(i));
    for (int j = 0; j < ny; ++j) cy[static_cast<std::size_t>(k) * ny + j] = std::cos(pi * k * grid.y(j));
  }
  // t[k1][j] = sum_k2 coef[k1][k2] cos(pi k2 y_j)
  std::vector<double> t(static_cast<std::size_t>(K) * ny, 0.0);
  for (int k1 = 0; k1 < K; ++k1) {
    for (int k2 = 0; k2 < K; ++k2) {
      const double c = coef[static_cast<std::size_t>(k1) * K + k2];
      const double* row = &cy[static_cast<std::size_t>(k2) * ny];
      double* out = &t[static_cast<std::size_t>(k1) * ny];
      for (int j = 0; j < ny; ++j) out[j] += c * row[j];
    }
  }
  Field z(grid, 1);
  for (int j = 0; j < ny; ++j) {
    for (int k1 = 0; k1 < K; ++k1) {
      const double c = t[static_cast<std::size_t>(k1) * ny + j];
      const double* row = &cx[static_cast<std::size_t>(k1) * nx];
      for (int i = 0; i < nx; ++i) z.at(0, j, i) += c * row[i];
    }
  }
  return z;
}

Field darcy_threshold(const Field& z, const DarcyLaw& law) {
  Field a(z.grid(), z.channels());
  auto src = z.data();
  auto dst = a.data();
  for (std::size_t n = 0; n < src.size(); ++n) dst[n] = src[n] >= 0.0 ? law.hi : law.lo;
  return a;
}

Field sample_darcy_a(const Grid2D& grid, const DarcyLaw& law, std::uint64_t seed, std::uint64_t index) {
  const int cutoff = law.kl_cutoff_factor * std::max(grid.nx(), grid.ny());
  return darcy_threshold(sample_darcy_latent(grid, law, seed, index, cutoff), law);
}

Field nls_packet_sum(const Grid2D& grid, double alpha, const std::vector<WavePacket>& packets) {
  Field u(grid, 2);
  for (int j = 0; j < grid.ny(); ++j) {
    const double y = grid.y(j);
    for (int i = 0; i < grid.nx(); ++i) {
      const double x = grid.x(i);
      cplx sum = 0.0;
      for (const auto& p : packets) {
        const double dx = x + p.beta_x;
        const double dy = y + p.beta_y;
        const cplx exponent(-0.5 * alpha * (dx * dx + dy * dy), -0.5 * alpha * (p.gamma_x * x + p.gamma_y * y));
        sum += std::exp(exponent);
      }
      u.at(0, j, i) = sum.real();
      u.at(1, j, i) = sum.imag();
    }
  }
  return u;
}

std::vector<WavePacket> sample_nls_packets(const NlsInitLaw& law, std::uint64_t seed, std::uint64_t index) {
  law.validate();
  KeyedRng rng(seed, index, RngPurpose::NlsPackets);
  std::vector<WavePacket> packets(4);
  for (int l = 0; l < 4; ++l) {
    const double bx = rng.uniform(law.beta_lo, law.beta_hi);
    const double by = rng.uniform(law.beta_lo, law.beta_hi);
    packets[l] = {law.beta_sign[l][0] * bx, law.beta_sign[l][1] * by, law.gamma[l][0], law.gamma[l][1]};
  }
  return packets;
}

Field sample_nls_u0(const Grid2D& grid, const NlsInitLaw& law, std::uint64_t seed, std::uint64_t index) {
  require(grid.periodic(), ErrorKind::NonPeriodicGrid, "nls initial data needs a periodic grid");
  return nls_packet_sum(grid, law.alpha, sample_nls_packets(law, seed, index));
}

Field nls_potential(const Grid2D& grid, const NlsInitLaw& law) {
  require(grid.periodic(), ErrorKind::NonPeriodicGrid, "nls potential needs a periodic grid");
  Field v(grid, 1);
  for (int j = 0; j < grid.ny(); ++j) {
    const double cy = std::cos(law.zeta2 * grid.y(j));
    for (int i = 0; i < grid.nx(); ++i) v.at(0, j, i) = law.V0 * std::cos(law.zeta1 * grid.x(i)) * cy;
  }
  return v;
}

Field kp_initial(const Grid2D& grid, double theta1, double theta2, double delta) {
  Field u(grid, 1);
  for (int j = 0; j < grid.ny(); ++j) {
    const double y = grid.y(j);
    for (int i = 0; i < grid.nx(); ++i) {
      const double x = grid.x(i);
      const double r = std::sqrt(x * x + y * y);
      const double sech = 1.0 / std::cosh(theta2 * r);
      u.at(0, j, i) = 8.0 * x * std::tanh(theta1 * r) / (r + delta) * sech * sech;
    }
  }
  return u;
}

Field sample_kp_u0(const Grid2D& grid, const KpInitLaw& law, std::uint64_t seed, std::uint64_t index) {
  law.validate();
  require(grid.periodic(), ErrorKind::NonPeriodicGrid, "kp initial data needs a periodic grid");
  KeyedRng rng(seed, index, RngPurpose::KpShape);
  const double theta1 = rng.uniform(law.theta_lo, law.theta_hi);
  const double theta2 = rng.uniform(law.theta_lo, law.theta_hi);
  return kp_initial(grid, theta1, theta2, law.delta);
}

double sample_epsilon(std::uint64_t seed, std::uint64_t index) {
  // (-1, 0) U (0, 1/2) is (-1, 1/2) minus a point: one uniform draw covers
  // both intervals with mass proportional to their lengths.
  KeyedRng rng(seed, index, RngPurpose::Epsilon);
  for (;;) {
    const double eps = -1.0 + 1.5 * rng.uniform();
    if (eps != 0.0 && eps > -1.0 && eps < 0.5) return eps;
  }
}

}  // namespace podnolab
