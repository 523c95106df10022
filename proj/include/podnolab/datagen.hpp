#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "podnolab/grid.hpp"

namespace podnolab {

// Darcy permeability law: psi applied to a centered Gaussian field with
// covariance (-Laplacian + tau2 I)^(-power) under zero Neumann conditions.
struct DarcyLaw {
  double tau2 = 9.0;
  double power = 2.0;
  double hi = 12.0;
  double lo = 3.0;
  // Karhunen-Loeve cutoff per axis, as a multiple of the grid side.
  int kl_cutoff_factor = 4;

  void validate() const;
};

// Four Gaussian-type packets plus the cosine lattice potential.
struct NlsInitLaw {
  double alpha = 120.0;
  // Sign of each beta draw: -1 draws from (-0.6,-0.4), +1 from (0.4,0.6).
  std::array<std::array<int, 2>, 4> beta_sign{{{-1, -1}, {+1, -1}, {-1, +1}, {+1, +1}}};
  double beta_lo = 0.4;
  double beta_hi = 0.6;
  std::array<std::array<double, 2>, 4> gamma{{{-2.0, -2.0}, {2.0, 2.0}, {-2.0, -2.0}, {2.0, 2.0}}};
  double V0 = 120.0;
  double zeta1 = 60.0;
  double zeta2 = 60.0;

  void validate() const;
};

struct KpInitLaw {
  double theta_lo = 1.5;
  double theta_hi = 2.5;
  double delta = 1e-10;

  void validate() const;
};

struct WavePacket {
  double beta_x = 0.0;
  double beta_y = 0.0;
  double gamma_x = 0.0;
  double gamma_y = 0.0;
};

// Gaussian field z before thresholding, evaluated with the given KL cutoff
// (modes 0..cutoff per axis). Coefficients are keyed per mode, so raising the
// cutoff only appends terms.
Field sample_darcy_latent(const Grid2D& grid, const DarcyLaw& law, std::uint64_t seed, std::uint64_t index,
                          int cutoff);
// psi: hi where z >= 0, lo elsewhere.
Field darcy_threshold(const Field& z, const DarcyLaw& law);
Field sample_darcy_a(const Grid2D& grid, const DarcyLaw& law, std::uint64_t seed, std::uint64_t index = 0);

// Sum of exp(-(alpha/2)[(x+bx)^2 + (y+by)^2 + i gx x + i gy y]) over packets,
// as a two-channel (re, im) field.
Field nls_packet_sum(const Grid2D& grid, double alpha, const std::vector<WavePacket>& packets);
std::vector<WavePacket> sample_nls_packets(const NlsInitLaw& law, std::uint64_t seed, std::uint64_t index);
Field sample_nls_u0(const Grid2D& grid, const NlsInitLaw& law, std::uint64_t seed, std::uint64_t index = 0);
Field nls_potential(const Grid2D& grid, const NlsInitLaw& law);

// 8x tanh(theta1 r) / (r + delta) sech^2(theta2 r), r = sqrt(x^2 + y^2).
Field kp_initial(const Grid2D& grid, double theta1, double theta2, double delta);
Field sample_kp_u0(const Grid2D& grid, const KpInitLaw& law, std::uint64_t seed, std::uint64_t index = 0);

// Uniform on (-1, 0) U (0, 1/2), mass proportional to interval length.
double sample_epsilon(std::uint64_t seed, std::uint64_t index = 0);

}  // namespace podnolab
