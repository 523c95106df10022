#include "podnolab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace podnolab {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Fft1D::Fft1D(int n) : n_(n), pow2_(is_pow2(n)), twiddle_(n), scratch_(n) {
  require(n >= 1, ErrorKind::InvalidArgument, "transform length must be positive");
  for (int k = 0; k < n; ++k) {
    const double angle = -2.0 * std::numbers::pi * k / n;
    twiddle_[k] = {std::cos(angle), std::sin(angle)};
  }
  if (pow2_) {
    bitrev_.resize(n);
    int bits = 0;
    while ((1 << bits) < n) ++bits;
    for (int i = 0; i < n; ++i) {
      int r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1) << (bits - 1 - b);
      bitrev_[i] = r;
    }
  }
}

void Fft1D::forward(std::span<cplx> x) const { transform(x, false); }
void Fft1D::backward(std::span<cplx> x) const { transform(x, true); }

void Fft1D::transform(std::span<cplx> x, bool inverse) const {
  const int n = n_;
  if (!pow2_) {
    for (int k = 0; k < n; ++k) {
      cplx acc = 0.0;
      for (int j = 0; j < n; ++j) {
        const cplx w = twiddle_[(static_cast<long>(k) * j) % n];
        acc += x[j] * (inverse ? std::conj(w) : w);
      }
      scratch_[k] = acc;
    }
    std::copy(scratch_.begin(), scratch_.end(), x.begin());
    return;
  }
  for (int i = 0; i < n; ++i) {
    if (i < bitrev_[i]) std::swap(x[i], x[bitrev_[i]]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const int half = len / 2;
    const int step = n / len;
    for (int start = 0; start < n; start += len) {
      for (int k = 0; k < half; ++k) {
        const cplx w = inverse ? std::conj(twiddle_[k * step]) : twiddle_[k * step];
        const cplx a = x[start + k];
        const cplx b = x[start + k + half] * w;
        x[start + k] = a + b;
        x[start + k + half] = a - b;
      }
    }
  }
}

Fft2D::Fft2D(int nx, int ny) : row_(nx), col_(ny), column_(ny) {}

void Fft2D::forward(std::span<cplx> data) const { apply(data, false); }

void Fft2D::inverse(std::span<cplx> data) const {
  apply(data, true);
  const double scale = 1.0 / (static_cast<double>(nx()) * ny());
  for (auto& v : data) v *= scale;
}

void Fft2D::apply(std::span<cplx> data, bool inverse) const {
  const int nx = this->nx();
  const int ny = this->ny();
  require(data.size() == static_cast<std::size_t>(nx) * ny, ErrorKind::ShapeMismatch, "fft2: buffer size");
  for (int j = 0; j < ny; ++j) {
    auto row = data.subspan(static_cast<std::size_t>(j) * nx, nx);
    inverse ? row_.backward(row) : row_.forward(row);
  }
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) column_[j] = data[static_cast<std::size_t>(j) * nx + i];
    inverse ? col_.backward(column_) : col_.forward(column_);
    for (int j = 0; j < ny; ++j) data[static_cast<std::size_t>(j) * nx + i] = column_[j];
  }
}

void ModeSet::validate(const Grid2D& grid) const {
  require(mx >= 1 && my >= 1 && mx <= grid.nx() / 2 && my <= grid.ny() / 2, ErrorKind::ModeBounds,
          "mode set (" + std::to_string(mx) + "," + std::to_string(my) + ") outside Nyquist bounds of " +
              std::to_string(grid.nx()) + "x" + std::to_string(grid.ny()));
}

bool ModeSet::keeps(int kx_index, int ky_index, const Grid2D& grid) const {
  // Nyquist indices are never kept: at m = n/2 the strict inequality drops them.
  return std::abs(signed_frequency(kx_index, grid.nx())) < mx &&
         std::abs(signed_frequency(ky_index, grid.ny())) < my;
}

Spectrum2D dft2(const Field& f) {
  const Grid2D& g = f.grid();
  require(g.periodic(), ErrorKind::NonPeriodicGrid, "dft2 requires a periodic grid");
  Spectrum2D s{g, f.channels(), std::vector<cplx>(f.values().size())};
  Fft2D fft(g.nx(), g.ny());
  const std::size_t plane = g.size();
  for (int c = 0; c < f.channels(); ++c) {
    auto src = f.channel(c);
    std::span<cplx> dst(s.coeffs.data() + c * plane, plane);
    for (std::size_t n = 0; n < plane; ++n) dst[n] = src[n];
    fft.forward(dst);
  }
  return s;
}

std::vector<cplx> dft2(const ComplexField& z) {
  require(z.grid.periodic(), ErrorKind::NonPeriodicGrid, "dft2 requires a periodic grid");
  std::vector<cplx> out = z.data;
  Fft2D(z.grid.nx(), z.grid.ny()).forward(out);
  return out;
}

std::vector<cplx> idft2_complex(const Spectrum2D& s, int channel) {
  require(channel >= 0 && channel < s.channels, ErrorKind::InvalidArgument, "idft2: channel out of range");
  const std::size_t plane = s.grid.size();
  std::vector<cplx> out(s.coeffs.begin() + channel * plane, s.coeffs.begin() + (channel + 1) * plane);
  Fft2D(s.grid.nx(), s.grid.ny()).inverse(out);
  return out;
}

Field idft2(const Spectrum2D& s) {
  require(s.coeffs.size() == static_cast<std::size_t>(s.channels) * s.grid.size(), ErrorKind::ShapeMismatch,
          "idft2: malformed spectrum");
  Field f(s.grid, s.channels);
  Fft2D fft(s.grid.nx(), s.grid.ny());
  const std::size_t plane = s.grid.size();
  std::vector<cplx> buf(plane);
  for (int c = 0; c < s.channels; ++c) {
    std::copy(s.coeffs.begin() + c * plane, s.coeffs.begin() + (c + 1) * plane, buf.begin());
    fft.inverse(buf);
    auto dst = f.channel(c);
    for (std::size_t n = 0; n < plane; ++n) dst[n] = buf[n].real();
  }
  return f;
}

Spectrum2D truncate_modes(const Spectrum2D& s, const ModeSet& m) {
  m.validate(s.grid);
  Spectrum2D out = s;
  for (int c = 0; c < s.channels; ++c) {
    for (int ky = 0; ky < s.grid.ny(); ++ky) {
      for (int kx = 0; kx < s.grid.nx(); ++kx) {
        if (!m.keeps(kx, ky, s.grid)) out.at(c, ky, kx) = 0.0;
      }
    }
  }
  return out;
}

std::vector<ModeLabel> sorted_mode_index(int n) {
  require(n >= 1, ErrorKind::InvalidArgument, "sorted_mode_index: n must be positive");
  std::vector<ModeLabel> labels;
  labels.reserve(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      labels.push_back({ix, iy, std::min(ix, n - ix), std::min(iy, n - iy)});
    }
  }
  std::sort(labels.begin(), labels.end(), [](const ModeLabel& a, const ModeLabel& b) {
    const int sa = a.kx + a.ky;
    const int sb = b.kx + b.ky;
    if (sa != sb) return sa < sb;
    if (a.kx != b.kx) return a.kx < b.kx;
    if (a.ky != b.ky) return a.ky < b.ky;
    if (a.kx_index != b.kx_index) return a.kx_index < b.kx_index;
    return a.ky_index < b.ky_index;
  });
  return labels;
}

}  // namespace podnolab
