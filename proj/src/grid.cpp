#include "podnolab/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace podnolab {

Grid2D make_grid(int nx, int ny, const Bounds& bounds, bool periodic) {
  require(nx >= 2 && ny >= 2, ErrorKind::InvalidArgument,
          "grid needs at least 2 points per axis, got " + std::to_string(nx) + "x" + std::to_string(ny));
  require(bounds.x_max > bounds.x_min && bounds.y_max > bounds.y_min, ErrorKind::InvalidArgument,
          "grid bounds must be ordered");
  require(std::isfinite(bounds.x_min) && std::isfinite(bounds.x_max) && std::isfinite(bounds.y_min) &&
              std::isfinite(bounds.y_max),
          ErrorKind::InvalidArgument, "grid bounds must be finite");
  Grid2D g;
  g.nx_ = nx;
  g.ny_ = ny;
  g.bounds_ = bounds;
  g.periodic_ = periodic;
  return g;
}

double Grid2D::wavenumber_x(int k) const {
  return 2.0 * std::numbers::pi * signed_frequency(k, nx_) / length_x();
}

double Grid2D::wavenumber_y(int k) const {
  return 2.0 * std::numbers::pi * signed_frequency(k, ny_) / length_y();
}

Field::Field(const Grid2D& grid, int channels)
    : grid_(grid), channels_(channels), data_(static_cast<std::size_t>(channels) * grid.size(), 0.0) {
  require(channels >= 1, ErrorKind::InvalidArgument, "field needs at least one channel");
}

Field::Field(const Grid2D& grid, int channels, std::vector<double> data)
    : grid_(grid), channels_(channels), data_(std::move(data)) {
  require(channels >= 1, ErrorKind::InvalidArgument, "field needs at least one channel");
  require(data_.size() == static_cast<std::size_t>(channels) * grid.size(), ErrorKind::ShapeMismatch,
          "field data length " + std::to_string(data_.size()) + " != channels*ny*nx");
}

bool Field::is_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void ComplexView::validate(int channels) const {
  require(re_channel >= 0 && re_channel < channels && im_channel >= 0 && im_channel < channels,
          ErrorKind::InvalidArgument, "complex view channel out of range");
  require(re_channel != im_channel, ErrorKind::InvalidArgument, "complex view channels must differ");
}

ComplexField to_complex(const Field& f, ComplexView view) {
  view.validate(f.channels());
  ComplexField z(f.grid());
  auto re = f.channel(view.re_channel);
  auto im = f.channel(view.im_channel);
  for (std::size_t n = 0; n < z.data.size(); ++n) z.data[n] = {re[n], im[n]};
  return z;
}

Field to_field(const ComplexField& z) {
  Field f(z.grid, 2);
  auto re = f.channel(0);
  auto im = f.channel(1);
  for (std::size_t n = 0; n < z.data.size(); ++n) {
    re[n] = z.data[n].real();
    im[n] = z.data[n].imag();
  }
  return f;
}

void require_same_shape(const Field& a, const Field& b, const char* where) {
  require(a.grid() == b.grid() && a.channels() == b.channels(), ErrorKind::ShapeMismatch,
          std::string(where) + ": fields differ in grid or channel count");
}

double inner_product(const Field& f, const Field& g) {
  require_same_shape(f, g, "inner_product");
  double sum = 0.0;
  auto a = f.data();
  auto b = g.data();
  for (std::size_t n = 0; n < a.size(); ++n) sum += a[n] * b[n];
  return sum * f.grid().cell_area();
}

double l2_norm(const Field& f) { return std::sqrt(inner_product(f, f)); }

}  // namespace podnolab
