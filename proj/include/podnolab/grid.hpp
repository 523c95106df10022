#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "podnolab/error.hpp"

namespace podnolab {

using cplx = std::complex<double>;

struct Bounds {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  bool operator==(const Bounds&) const = default;
};

// Uniform rectangular discretization. Periodic grids drop the duplicate
// endpoint (spacing = length / n); non-periodic grids keep both endpoints
// (spacing = length / (n - 1)).
class Grid2D {
 public:
  Grid2D() = default;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const Bounds& bounds() const { return bounds_; }
  bool periodic() const { return periodic_; }

  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
  double length_x() const { return bounds_.x_max - bounds_.x_min; }
  double length_y() const { return bounds_.y_max - bounds_.y_min; }
  double dx() const { return length_x() / (periodic_ ? nx_ : nx_ - 1); }
  double dy() const { return length_y() / (periodic_ ? ny_ : ny_ - 1); }
  double cell_area() const { return dx() * dy(); }
  double x(int i) const { return bounds_.x_min + i * dx(); }
  double y(int j) const { return bounds_.y_min + j * dy(); }

  // Angular wavenumber of DFT index k along each axis (2*pi*k/L with the
  // signed representative of k).
  double wavenumber_x(int k) const;
  double wavenumber_y(int k) const;

  bool operator==(const Grid2D&) const = default;

 private:
  friend Grid2D make_grid(int nx, int ny, const Bounds& bounds, bool periodic);

  int nx_ = 0;
  int ny_ = 0;
  Bounds bounds_{};
  bool periodic_ = false;
};

Grid2D make_grid(int nx, int ny, const Bounds& bounds, bool periodic);

// Signed DFT frequency for index k of an n-point transform: k for k <= n/2,
// k - n otherwise.
inline int signed_frequency(int k, int n) { return k <= n / 2 ? k : k - n; }

// Multi-channel real sample laid out [channel, y, x].
class Field {
 public:
  Field() = default;
  Field(const Grid2D& grid, int channels);
  Field(const Grid2D& grid, int channels, std::vector<double> data);

  const Grid2D& grid() const { return grid_; }
  int channels() const { return channels_; }
  std::size_t plane_size() const { return grid_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  std::span<double> channel(int c) {
    return std::span<double>(data_).subspan(c * plane_size(), plane_size());
  }
  std::span<const double> channel(int c) const {
    return std::span<const double>(data_).subspan(c * plane_size(), plane_size());
  }

  double& at(int c, int j, int i) { return data_[(c * static_cast<std::size_t>(grid_.ny()) + j) * grid_.nx() + i]; }
  double at(int c, int j, int i) const { return data_[(c * static_cast<std::size_t>(grid_.ny()) + j) * grid_.nx() + i]; }

  bool is_finite() const;

 private:
  Grid2D grid_{};
  int channels_ = 0;
  std::vector<double> data_;
};

// Interprets two channels of a Field as one complex function.
struct ComplexView {
  int re_channel = 0;
  int im_channel = 1;

  void validate(int channels) const;
};

// A single complex function on a grid, used inside the time steppers.
struct ComplexField {
  Grid2D grid;
  std::vector<cplx> data;

  ComplexField() = default;
  explicit ComplexField(const Grid2D& g) : grid(g), data(g.size()) {}
};

ComplexField to_complex(const Field& f, ComplexView view = {});
Field to_field(const ComplexField& z);

// Discrete L2 pairing: sum over channels and nodes of f*g times cell area.
double inner_product(const Field& f, const Field& g);
double l2_norm(const Field& f);

void require_same_shape(const Field& a, const Field& b, const char* where);

}  // namespace podnolab
