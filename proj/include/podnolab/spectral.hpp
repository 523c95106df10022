#pragma once

#include <span>
#include <vector>

#include "podnolab/grid.hpp"

namespace podnolab {

// One-dimensional complex DFT of fixed length. Power-of-two lengths use an
// iterative radix-2 transform; other lengths fall back to the direct sum.
class Fft1D {
 public:
  explicit Fft1D(int n);

  int size() const { return n_; }
  // Unnormalized, sign -1 in the exponent.
  void forward(std::span<cplx> x) const;
  // Sign +1 in the exponent, no 1/n scaling.
  void backward(std::span<cplx> x) const;

 private:
  void transform(std::span<cplx> x, bool inverse) const;

  int n_;
  bool pow2_;
  std::vector<cplx> twiddle_;  // exp(-2 pi i k / n)
  std::vector<int> bitrev_;
  mutable std::vector<cplx> scratch_;
};

// Row/column 2-D transform over a [ny, nx] complex array.
class Fft2D {
 public:
  Fft2D(int nx, int ny);

  int nx() const { return row_.size(); }
  int ny() const { return col_.size(); }

  void forward(std::span<cplx> data) const;
  // Includes the 1/(nx*ny) factor, so backward(forward(x)) == x.
  void inverse(std::span<cplx> data) const;

 private:
  void apply(std::span<cplx> data, bool inverse) const;

  Fft1D row_;
  Fft1D col_;
  mutable std::vector<cplx> column_;
};

// Per-channel spectrum in standard DFT ordering, laid out [channel, ky, kx].
struct Spectrum2D {
  Grid2D grid;
  int channels = 0;
  std::vector<cplx> coeffs;

  cplx& at(int c, int ky, int kx) { return coeffs[(static_cast<std::size_t>(c) * grid.ny() + ky) * grid.nx() + kx]; }
  cplx at(int c, int ky, int kx) const { return coeffs[(static_cast<std::size_t>(c) * grid.ny() + ky) * grid.nx() + kx]; }
};

// Retained mode counts per axis. A mode (kx, ky) survives truncation when
// |signed kx| < mx and |signed ky| < my.
struct ModeSet {
  int mx = 1;
  int my = 1;

  void validate(const Grid2D& grid) const;
  bool keeps(int kx_index, int ky_index, const Grid2D& grid) const;
  bool operator==(const ModeSet&) const = default;
};

Spectrum2D dft2(const Field& f);
// Real part of the inverse transform.
Field idft2(const Spectrum2D& s);
// Full complex inverse of one channel (used to inspect imaginary residue).
std::vector<cplx> idft2_complex(const Spectrum2D& s, int channel);

Spectrum2D truncate_modes(const Spectrum2D& s, const ModeSet& m);

struct ModeLabel {
  int kx_index = 0;  // DFT index 0..n-1
  int ky_index = 0;
  int kx = 0;        // non-negative representative min(k, n-k)
  int ky = 0;

  bool operator==(const ModeLabel&) const = default;
};

// All n*n mode labels ordered by ascending kx+ky of the non-negative
// representative frequencies; ties by kx, then ky, then raw DFT index.
std::vector<ModeLabel> sorted_mode_index(int n);

// Forward complex DFT of a complex field on a periodic grid (unnormalized).
std::vector<cplx> dft2(const ComplexField& z);

}  // namespace podnolab
