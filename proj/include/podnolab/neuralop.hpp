#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "podnolab/grid.hpp"
#include "podnolab/pod.hpp"
#include "podnolab/spectral.hpp"

namespace podnolab {

// Hidden states are [channels x nmesh] row-major, so each row is one channel
// in the same [y, x] order as a Field plane.
using Activations = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Flat parameter storage. Vector-aligned so Eigen kernels over slices take
// the same code path on every run.
using ParamVector = std::vector<double, Eigen::aligned_allocator<double>>;

Activations to_activations(const Field& f);
Field to_field(const Grid2D& grid, const Activations& a);

double gelu(double x);
double gelu_derivative(double x);

enum class KernelKind { Fourier, Pod };

struct GsoConfig {
  int width = 32;
  int layers = 4;
  KernelKind kernel = KernelKind::Fourier;
  ModeSet modes{12, 12};  // Fourier kernel
  int pod_modes = 0;      // POD kernel
  int in_channels = 1;    // data channels d_a
  int out_channels = 1;
  bool coordinates = true;
  bool use_epsilon = false;
  // Fixed per-channel affine maps around the network: inputs are fed as
  // (a - shift) / scale, outputs are returned as y * scale + shift. Empty
  // vectors mean identity.
  std::vector<double> input_shift, input_scale;
  std::vector<double> output_shift, output_scale;

  int lifted_channels() const { return in_channels + (coordinates ? 2 : 0); }
  void validate() const;
};

struct ParamEntry {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

// Every trainable scalar lives in one flat vector; the table records name,
// shape, and offset per tensor. Gradients and optimizer moments use the same
// layout.
class ParamStore {
 public:
  std::size_t add(const std::string& name, std::vector<int> shape);

  const std::vector<ParamEntry>& table() const { return table_; }
  const ParamEntry& entry(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t size() const { return values_.size(); }

  ParamVector& values() { return values_; }
  const ParamVector& values() const { return values_; }
  std::span<double> slot(const std::string& name);
  std::span<const double> slot(const std::string& name) const;

 private:
  std::vector<ParamEntry> table_;
  ParamVector values_;
};

// Truncated DFT restricted to the FNO corner blocks: kx in [0, mx) on the
// half spectrum and ky in [0, my) U [ny - my, ny). Mode q = r * mx + kx where
// r < my addresses ky = r and r >= my addresses ky = ny - 2 my + r.
class FourierKernel {
 public:
  FourierKernel(const Grid2D& grid, const ModeSet& modes);

  int mode_count() const { return rows_ * mx_; }
  int kx(int q) const { return q % mx_; }
  int ky_index(int q) const;

  // Forward transform of every channel: [channels x modes], sign -1.
  Eigen::MatrixXcd analyze(const Activations& v) const;
  // Re sum_q w(kx) Y(c, q) exp(+i theta). With real_inverse = true the
  // weights are 1/(nx ny) for kx = 0 and 2/(nx ny) otherwise, which is the
  // real inverse DFT of a Hermitian spectrum; with false they are all 1,
  // which is the adjoint of analyze.
  Activations synthesize(const Eigen::MatrixXcd& Y, bool real_inverse) const;

  // R holds mode_count() complex matrices [out x in] stored (re, im)
  // interleaved, mode-major. Returns the kernel output and, if requested,
  // the analyzed input.
  Activations apply(std::span<const double> R, int out_channels, const Activations& v,
                    Eigen::MatrixXcd* coeffs = nullptr) const;

 private:
  Grid2D grid_;
  int mx_, my_, rows_;
  Eigen::MatrixXd cos_x_, sin_x_;  // [nx x mx]
  Eigen::MatrixXcd ey_;            // [rows x ny], exp(-2 pi i ky j / ny)
};

// Projection onto the leading N POD modes with a real multiplier per mode.
class PodKernel {
 public:
  PodKernel(std::shared_ptr<const PodBasis> basis, int n);

  int mode_count() const { return static_cast<int>(phi_.cols()); }
  const Eigen::MatrixXd& phi() const { return phi_; }

  // R holds N matrices [out x in], mode-major.
  Activations apply(std::span<const double> R, int out_channels, const Activations& v,
                    Eigen::MatrixXd* coeffs = nullptr) const;

 private:
  std::shared_ptr<const PodBasis> basis_;
  Eigen::MatrixXd phi_;  // [nmesh x N]
};

// Intermediates of one forward pass, consumed by GsoModel::backward.
struct ForwardCache {
  Activations input;                     // lifted input (normalized + coordinates)
  std::vector<Activations> hidden;       // v_0 ... v_L
  std::vector<Activations> activation_slope;  // gelu'(z_l) for l < L-1
  std::vector<Eigen::MatrixXcd> fourier_coeffs;
  std::vector<Eigen::MatrixXd> pod_coeffs;
  std::vector<Eigen::VectorXd> eps_hidden_pre;  // W1 eps + b1 per layer
  double epsilon = 0.0;
  bool valid = false;
};

struct ParamBreakdown {
  std::size_t lift = 0;
  std::size_t pointwise = 0;  // W_l, b_l
  std::size_t spectral = 0;   // R_l
  std::size_t epsilon = 0;    // embedding MLPs
  std::size_t reduce = 0;
  std::size_t total() const { return lift + pointwise + spectral + epsilon + reduce; }
};

ParamBreakdown param_breakdown(const GsoConfig& cfg);
std::size_t param_count(const GsoConfig& cfg);

class GsoModel {
 public:
  // The POD kernel needs a basis on the model grid with at least pod_modes
  // columns; the Fourier kernel ignores it.
  GsoModel(const GsoConfig& cfg, const Grid2D& grid, std::shared_ptr<const PodBasis> basis = nullptr);

  const GsoConfig& config() const { return cfg_; }
  const Grid2D& grid() const { return grid_; }
  const std::shared_ptr<const PodBasis>& basis() const { return basis_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  void initialize(std::uint64_t seed);

  Field forward(const Field& a, double eps = 0.0) const;
  Activations forward(const Field& a, double eps, ForwardCache* cache) const;
  // Adds d<g_out, output>/d(params) into grad.
  void backward(const ForwardCache& cache, const Activations& g_out, std::span<double> grad) const;

  // Building blocks.
  Activations lifted_input(const Field& a) const;
  Activations lift(const Activations& input) const;
  Activations reduce(const Activations& v) const;
  Eigen::VectorXd embed_epsilon(int layer, double eps, Eigen::VectorXd* hidden_pre = nullptr) const;
  Activations kernel(int layer, const Activations& v) const;
  // Pre-activation output of layer l: K(v) + W v + b + eps embedding.
  Activations layer(int layer, const Activations& v, double eps) const;

  static std::string layer_name(int layer, const char* tensor);

 private:
  Activations kernel_apply(int layer, const Activations& v, ForwardCache* cache) const;

  GsoConfig cfg_;
  Grid2D grid_;
  std::shared_ptr<const PodBasis> basis_;
  ParamStore params_;
  std::shared_ptr<const FourierKernel> fourier_;
  std::shared_ptr<const PodKernel> pod_;
};

}  // namespace podnolab
