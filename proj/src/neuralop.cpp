#include "podnolab/neuralop.hpp"

#include <cmath>
#include <numbers>

#include "podnolab/rng.hpp"

namespace podnolab {

Activations to_activations(const Field& f) {
  return Eigen::Map<const Activations>(f.values().data(), f.channels(), static_cast<Eigen::Index>(f.plane_size()));
}

Field to_field(const Grid2D& grid, const Activations& a) {
  require(static_cast<std::size_t>(a.cols()) == grid.size(), ErrorKind::ShapeMismatch, "activations do not match grid");
  Field f(grid, static_cast<int>(a.rows()));
  Eigen::Map<Activations>(f.values().data(), a.rows(), a.cols()) = a;
  return f;
}

constexpr double kInvSqrt2 = 0.70710678118654752440;

double gelu(double x) { return 0.5 * x * std::erfc(-x * kInvSqrt2); }

double gelu_derivative(double x) {
  const double pdf = std::exp(-0.5 * x * x) * 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  return 0.5 * std::erfc(-x * kInvSqrt2) + x * pdf;
}

void GsoConfig::validate() const {
  require(width >= 1, ErrorKind::Config, "model width must be >= 1");
  require(layers >= 0, ErrorKind::Config, "model layer count must be >= 0");
  require(in_channels >= 1 && out_channels >= 1, ErrorKind::Config, "model channel counts must be >= 1");
  if (kernel == KernelKind::Pod) require(pod_modes >= 1, ErrorKind::Config, "pod kernel needs pod_modes >= 1");
  auto check = [](const std::vector<double>& v, int n, bool positive, const char* what) {
    require(v.empty() || static_cast<int>(v.size()) == n, ErrorKind::Config, std::string(what) + " has the wrong length");
    for (double x : v) {
      require(std::isfinite(x) && (!positive || x > 0.0), ErrorKind::Config, std::string(what) + " entries invalid");
    }
  };
  check(input_shift, in_channels, false, "input_shift");
  check(input_scale, in_channels, true, "input_scale");
  check(output_shift, out_channels, false, "output_shift");
  check(output_scale, out_channels, true, "output_scale");
}

// ---------------------------------------------------------------------------
// ParamStore

std::size_t ParamStore::add(const std::string& name, std::vector<int> shape) {
  require(!contains(name), ErrorKind::InvalidArgument, "duplicate parameter " + name);
  std::size_t size = 1;
  for (int d : shape) size *= static_cast<std::size_t>(d);
  table_.push_back({name, std::move(shape), values_.size(), size});
  values_.resize(values_.size() + size, 0.0);
  return table_.back().offset;
}

bool ParamStore::contains(const std::string& name) const {
  for (const auto& e : table_) {
    if (e.name == name) return true;
  }
  return false;
}

const ParamEntry& ParamStore::entry(const std::string& name) const {
  for (const auto& e : table_) {
    if (e.name == name) return e;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown parameter " + name);
}

std::span<double> ParamStore::slot(const std::string& name) {
  const ParamEntry& e = entry(name);
  return std::span<double>(values_).subspan(e.offset, e.size);
}

std::span<const double> ParamStore::slot(const std::string& name) const {
  const ParamEntry& e = entry(name);
  return std::span<const double>(values_).subspan(e.offset, e.size);
}

// ---------------------------------------------------------------------------
// Kernels

FourierKernel::FourierKernel(const Grid2D& grid, const ModeSet& modes)
    : grid_(grid), mx_(modes.mx), my_(modes.my), rows_(2 * modes.my) {
  modes.validate(grid);
  const int nx = grid.nx();
  const int ny = grid.ny();
  const double two_pi = 2.0 * std::numbers::pi;
  cos_x_.resize(nx, mx_);
  sin_x_.resize(nx, mx_);
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k < mx_; ++k) {
      // Reduce k*i mod n first so the angle stays small and exact.
      const double theta = two_pi * static_cast<double>((static_cast<long>(k) * i) % nx) / nx;
      cos_x_(i, k) = std::cos(theta);
      sin_x_(i, k) = std::sin(theta);
    }
  }
  ey_.resize(rows_, ny);
  for (int r = 0; r < rows_; ++r) {
    const int ky = r < my_ ? r : ny - 2 * my_ + r;
    for (int j = 0; j < ny; ++j) {
      const double theta = two_pi * static_cast<double>((static_cast<long>(ky) * j) % ny) / ny;
      ey_(r, j) = std::polar(1.0, -theta);
    }
  }
}

int FourierKernel::ky_index(int q) const {
  const int r = q / mx_;
  return r < my_ ? r : grid_.ny() - 2 * my_ + r;
}

Eigen::MatrixXcd FourierKernel::analyze(const Activations& v) const {
  const int nx = grid_.nx();
  const int ny = grid_.ny();
  const Eigen::Index channels = v.rows();
  require(v.cols() == nx * ny, ErrorKind::ShapeMismatch, "fourier kernel: activation size");
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> rows(v.data(), channels * ny, nx);
  const Eigen::MatrixXd re = rows * cos_x_;
  const Eigen::MatrixXd im = -(rows * sin_x_);
  // Stack channels side by side so the y transform is one product.
  Eigen::MatrixXcd stacked(ny, channels * mx_);
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < mx_; ++k) stacked(j, c * mx_ + k) = cplx(re(c * ny + j, k), im(c * ny + j, k));
    }
  }
  const Eigen::MatrixXcd spec = ey_ * stacked;
  Eigen::MatrixXcd out(channels, mode_count());
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (int r = 0; r < rows_; ++r) {
      for (int k = 0; k < mx_; ++k) out(c, r * mx_ + k) = spec(r, c * mx_ + k);
    }
  }
  return out;
}

Activations FourierKernel::synthesize(const Eigen::MatrixXcd& Y, bool real_inverse) const {
  const int nx = grid_.nx();
  const int ny = grid_.ny();
  const Eigen::Index channels = Y.rows();
  require(Y.cols() == mode_count(), ErrorKind::ShapeMismatch, "fourier kernel: coefficient count");
  const double n = static_cast<double>(nx) * ny;
  Eigen::MatrixXcd stacked(rows_, channels * mx_);
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (int r = 0; r < rows_; ++r) {
      for (int k = 0; k < mx_; ++k) {
        const double w = real_inverse ? (k == 0 ? 1.0 : 2.0) / n : 1.0;
        stacked(r, c * mx_ + k) = w * Y(c, r * mx_ + k);
      }
    }
  }
  const Eigen::MatrixXcd h = ey_.adjoint() * stacked;  // [ny x channels*mx]
  Eigen::MatrixXd hr(channels * ny, mx_), hi(channels * ny, mx_);
  for (Eigen::Index c = 0; c < channels; ++c) {
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < mx_; ++k) {
        hr(c * ny + j, k) = h(j, c * mx_ + k).real();
        hi(c * ny + j, k) = h(j, c * mx_ + k).imag();
      }
    }
  }
  Activations out(channels, static_cast<Eigen::Index>(nx) * ny);
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<RowMat> rows(out.data(), channels * ny, nx);
  rows.noalias() = hr * cos_x_.transpose();
  rows.noalias() -= hi * sin_x_.transpose();
  return out;
}

Activations FourierKernel::apply(std::span<const double> R, int out_channels, const Activations& v,
                                 Eigen::MatrixXcd* coeffs) const {
  const Eigen::Index in = v.rows();
  const std::size_t per_mode = static_cast<std::size_t>(out_channels) * in;
  require(R.size() == per_mode * mode_count() * 2, ErrorKind::ShapeMismatch, "fourier kernel: weight size");
  Eigen::MatrixXcd B = analyze(v);
  Eigen::MatrixXcd Y(out_channels, mode_count());
  using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const cplx* weights = reinterpret_cast<const cplx*>(R.data());
  for (int q = 0; q < mode_count(); ++q) {
    Eigen::Map<const CMat> Rq(weights + q * per_mode, out_channels, in);
    Y.col(q).noalias() = Rq * B.col(q);
  }
  if (coeffs) *coeffs = std::move(B);
  return synthesize(Y, true);
}

PodKernel::PodKernel(std::shared_ptr<const PodBasis> basis, int n) : basis_(std::move(basis)) {
  require(basis_ != nullptr, ErrorKind::InvalidArgument, "pod kernel needs a basis");
  require(n >= 1 && n <= basis_->size(), ErrorKind::ModeBounds,
          "pod kernel: " + std::to_string(n) + " modes requested, basis has " + std::to_string(basis_->size()));
  phi_ = basis_->modes.leftCols(n);
}

Activations PodKernel::apply(std::span<const double> R, int out_channels, const Activations& v,
                             Eigen::MatrixXd* coeffs) const {
  const Eigen::Index in = v.rows();
  const std::size_t per_mode = static_cast<std::size_t>(out_channels) * in;
  require(v.cols() == phi_.rows(), ErrorKind::ShapeMismatch, "pod kernel: activation size");
  require(R.size() == per_mode * mode_count(), ErrorKind::ShapeMismatch, "pod kernel: weight size");
  Eigen::MatrixXd C = v * phi_;  // [in x N]
  Eigen::MatrixXd Y(out_channels, mode_count());
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  for (int k = 0; k < mode_count(); ++k) {
    Eigen::Map<const RowMat> Rk(R.data() + k * per_mode, out_channels, in);
    Y.col(k).noalias() = Rk * C.col(k);
  }
  if (coeffs) *coeffs = std::move(C);
  return Y * phi_.transpose();
}

// ---------------------------------------------------------------------------
// Parameter accounting

ParamBreakdown param_breakdown(const GsoConfig& cfg) {
  const std::size_t w = cfg.width;
  ParamBreakdown b;
  b.lift = w * cfg.lifted_channels() + w;
  b.reduce = static_cast<std::size_t>(cfg.out_channels) * w + cfg.out_channels;
  for (int l = 0; l < cfg.layers; ++l) {
    b.pointwise += w * w + w;
    if (cfg.kernel == KernelKind::Fourier) {
      b.spectral += 2 * static_cast<std::size_t>(cfg.modes.my) * cfg.modes.mx * w * w * 2;
    } else {
      b.spectral += static_cast<std::size_t>(cfg.pod_modes) * w * w;
    }
    if (cfg.use_epsilon) b.epsilon += w + w + w * w;
  }
  return b;
}

std::size_t param_count(const GsoConfig& cfg) { return param_breakdown(cfg).total(); }

// ---------------------------------------------------------------------------
// Model

std::string GsoModel::layer_name(int layer, const char* tensor) {
  return "layers." + std::to_string(layer) + "." + tensor;
}

GsoModel::GsoModel(const GsoConfig& cfg, const Grid2D& grid, std::shared_ptr<const PodBasis> basis)
    : cfg_(cfg), grid_(grid), basis_(std::move(basis)) {
  cfg_.validate();
  require(grid.size() > 0, ErrorKind::InvalidArgument, "model grid is empty");
  if (cfg_.layers > 0 && cfg_.kernel == KernelKind::Fourier) {
    fourier_ = std::make_shared<FourierKernel>(grid, cfg_.modes);
  } else if (cfg_.layers > 0) {
    require(basis_ != nullptr, ErrorKind::MissingCache, "pod kernel model needs a basis");
    require(basis_->grid == grid, ErrorKind::ShapeMismatch, "pod basis grid differs from model grid");
    pod_ = std::make_shared<PodKernel>(basis_, cfg_.pod_modes);
  }
  const int w = cfg_.width;
  params_.add("lift.P1", {w, cfg_.lifted_channels()});
  params_.add("lift.P2", {w});
  for (int l = 0; l < cfg_.layers; ++l) {
    params_.add(layer_name(l, "W"), {w, w});
    params_.add(layer_name(l, "b"), {w});
    if (cfg_.kernel == KernelKind::Fourier) {
      params_.add(layer_name(l, "R"), {2, cfg_.modes.my, cfg_.modes.mx, w, w, 2});
    } else {
      params_.add(layer_name(l, "R"), {cfg_.pod_modes, w, w});
    }
    if (cfg_.use_epsilon) {
      params_.add(layer_name(l, "eps_W1"), {w});
      params_.add(layer_name(l, "eps_b1"), {w});
      params_.add(layer_name(l, "eps_W2"), {w, w});
    }
  }
  params_.add("reduce.Q1", {cfg_.out_channels, w});
  params_.add("reduce.Q2", {cfg_.out_channels});
}

void GsoModel::initialize(std::uint64_t seed) {
  const double w = cfg_.width;
  for (std::size_t t = 0; t < params_.table().size(); ++t) {
    const ParamEntry& e = params_.table()[t];
    KeyedRng rng(seed, t, RngPurpose::Init);
    double* p = params_.values().data() + e.offset;
    const std::string& name = e.name;
    auto ends_with = [&](const char* s) {
      const std::string suffix(s);
      return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(".R")) {
      for (std::size_t k = 0; k < e.size; ++k) p[k] = rng.uniform() / (w * w);
      continue;
    }
    // U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and their biases.
    double bound = 1.0;
    if (name == "lift.P1" || name == "lift.P2") {
      bound = 1.0 / std::sqrt(static_cast<double>(cfg_.lifted_channels()));
    } else if (ends_with(".W") || ends_with(".b") || name == "reduce.Q1" || name == "reduce.Q2" || ends_with(".eps_W2")) {
      bound = 1.0 / std::sqrt(w);
    }
    for (std::size_t k = 0; k < e.size; ++k) p[k] = rng.uniform(-bound, bound);
  }
}

Activations GsoModel::lifted_input(const Field& a) const {
  require(a.grid() == grid_, ErrorKind::ShapeMismatch, "model input is on a different grid");
  require(a.channels() == cfg_.in_channels, ErrorKind::ShapeMismatch,
          "model expects " + std::to_string(cfg_.in_channels) + " input channels, got " + std::to_string(a.channels()));
  const Eigen::Index n = static_cast<Eigen::Index>(grid_.size());
  Activations x(cfg_.lifted_channels(), n);
  x.topRows(cfg_.in_channels) = to_activations(a);
  for (int c = 0; c < cfg_.in_channels; ++c) {
    if (!cfg_.input_shift.empty()) x.row(c).array() -= cfg_.input_shift[c];
    if (!cfg_.input_scale.empty()) x.row(c).array() /= cfg_.input_scale[c];
  }
  if (cfg_.coordinates) {
    for (int j = 0; j < grid_.ny(); ++j) {
      for (int i = 0; i < grid_.nx(); ++i) {
        const Eigen::Index k = static_cast<Eigen::Index>(j) * grid_.nx() + i;
        x(cfg_.in_channels, k) = grid_.x(i);
        x(cfg_.in_channels + 1, k) = grid_.y(j);
      }
    }
  }
  return x;
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> as_matrix(std::span<const double> s, int rows, int cols) {
  return Eigen::Map<const RowMat>(s.data(), rows, cols);
}

Eigen::Map<RowMat> as_matrix(std::span<double> s, int rows, int cols) { return Eigen::Map<RowMat>(s.data(), rows, cols); }

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> s) {
  return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

Eigen::Map<Eigen::VectorXd> as_vector(std::span<double> s) {
  return Eigen::Map<Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

}  // namespace

Activations GsoModel::lift(const Activations& input) const {
  require(input.rows() == cfg_.lifted_channels(), ErrorKind::ShapeMismatch, "lift: channel count");
  const auto P1 = as_matrix(params_.slot("lift.P1"), cfg_.width, cfg_.lifted_channels());
  const auto P2 = as_vector(params_.slot("lift.P2"));
  Activations v = P1 * input;
  v.colwise() += P2;
  return v;
}

Activations GsoModel::reduce(const Activations& v) const {
  require(v.rows() == cfg_.width, ErrorKind::ShapeMismatch, "reduce: channel count");
  const auto Q1 = as_matrix(params_.slot("reduce.Q1"), cfg_.out_channels, cfg_.width);
  const auto Q2 = as_vector(params_.slot("reduce.Q2"));
  Activations y = Q1 * v;
  y.colwise() += Q2;
  for (int c = 0; c < cfg_.out_channels; ++c) {
    if (!cfg_.output_scale.empty()) y.row(c).array() *= cfg_.output_scale[c];
    if (!cfg_.output_shift.empty()) y.row(c).array() += cfg_.output_shift[c];
  }
  return y;
}

Eigen::VectorXd GsoModel::embed_epsilon(int layer, double eps, Eigen::VectorXd* hidden_pre) const {
  if (!cfg_.use_epsilon) return Eigen::VectorXd::Zero(cfg_.width);
  const auto W1 = as_vector(params_.slot(layer_name(layer, "eps_W1")));
  const auto b1 = as_vector(params_.slot(layer_name(layer, "eps_b1")));
  const auto W2 = as_matrix(params_.slot(layer_name(layer, "eps_W2")), cfg_.width, cfg_.width);
  const Eigen::VectorXd pre = W1 * eps + b1;
  const Eigen::VectorXd act = pre.unaryExpr([](double x) { return gelu(x); });
  if (hidden_pre) *hidden_pre = pre;
  return W2 * act;
}

Activations GsoModel::kernel_apply(int layer, const Activations& v, ForwardCache* cache) const {
  const auto R = params_.slot(layer_name(layer, "R"));
  if (fourier_) return fourier_->apply(R, cfg_.width, v, cache ? &cache->fourier_coeffs[layer] : nullptr);
  return pod_->apply(R, cfg_.width, v, cache ? &cache->pod_coeffs[layer] : nullptr);
}

Activations GsoModel::kernel(int layer, const Activations& v) const { return kernel_apply(layer, v, nullptr); }

Activations GsoModel::layer(int layer, const Activations& v, double eps) const {
  const auto W = as_matrix(params_.slot(layer_name(layer, "W")), cfg_.width, cfg_.width);
  const auto b = as_vector(params_.slot(layer_name(layer, "b")));
  Activations z = kernel(layer, v);
  z.noalias() += W * v;
  z.colwise() += b + embed_epsilon(layer, eps);
  return z;
}

Field GsoModel::forward(const Field& a, double eps) const { return to_field(grid_, forward(a, eps, nullptr)); }

Activations GsoModel::forward(const Field& a, double eps, ForwardCache* cache) const {
  const int L = cfg_.layers;
  if (cache) {
    cache->valid = false;
    cache->epsilon = eps;
    cache->hidden.assign(L + 1, Activations());
    cache->activation_slope.assign(std::max(L - 1, 0), Activations());
    cache->fourier_coeffs.assign(fourier_ ? L : 0, Eigen::MatrixXcd());
    cache->pod_coeffs.assign(pod_ ? L : 0, Eigen::MatrixXd());
    cache->eps_hidden_pre.assign(cfg_.use_epsilon ? L : 0, Eigen::VectorXd());
  }
  Activations input = lifted_input(a);
  Activations v = lift(input);
  if (cache) cache->input = std::move(input);
  for (int l = 0; l < L; ++l) {
    const auto W = as_matrix(params_.slot(layer_name(l, "W")), cfg_.width, cfg_.width);
    const auto b = as_vector(params_.slot(layer_name(l, "b")));
    Activations z = kernel_apply(l, v, cache);
    z.noalias() += W * v;
    z.colwise() += b + embed_epsilon(l, eps, cache && cfg_.use_epsilon ? &cache->eps_hidden_pre[l] : nullptr);
    if (cache) cache->hidden[l] = std::move(v);
    if (l < L - 1) {
      if (cache) cache->activation_slope[l] = z.unaryExpr([](double x) { return gelu_derivative(x); });
      v = z.unaryExpr([](double x) { return gelu(x); });
    } else {
      v = std::move(z);
    }
  }
  Activations out = reduce(v);
  if (cache) {
    cache->hidden[L] = std::move(v);
    cache->valid = true;
  }
  return out;
}

void GsoModel::backward(const ForwardCache& cache, const Activations& g_out, std::span<double> grad) const {
  require(cache.valid, ErrorKind::MissingCache, "backward called without a recorded forward pass");
  require(grad.size() == params_.size(), ErrorKind::ShapeMismatch, "gradient buffer size differs from parameter count");
  require(g_out.rows() == cfg_.out_channels && g_out.cols() == static_cast<Eigen::Index>(grid_.size()),
          ErrorKind::ShapeMismatch, "backward: output gradient shape");
  const int L = cfg_.layers;
  const int w = cfg_.width;
  auto gslot = [&](const std::string& name) {
    const ParamEntry& e = params_.entry(name);
    return grad.subspan(e.offset, e.size);
  };

  Activations g_y = g_out;
  for (int c = 0; c < cfg_.out_channels; ++c) {
    if (!cfg_.output_scale.empty()) g_y.row(c) *= cfg_.output_scale[c];
  }
  as_matrix(gslot("reduce.Q1"), cfg_.out_channels, w).noalias() += g_y * cache.hidden[L].transpose();
  as_vector(gslot("reduce.Q2")) += g_y.rowwise().sum();
  const auto Q1 = as_matrix(params_.slot("reduce.Q1"), cfg_.out_channels, w);
  Activations g_v = Q1.transpose() * g_y;

  for (int l = L - 1; l >= 0; --l) {
    Activations g_z = l < L - 1 ? Activations(g_v.cwiseProduct(cache.activation_slope[l])) : std::move(g_v);
    const Activations& v = cache.hidden[l];
    as_matrix(gslot(layer_name(l, "W")), w, w).noalias() += g_z * v.transpose();
    const Eigen::VectorXd g_bias = g_z.rowwise().sum();
    as_vector(gslot(layer_name(l, "b"))) += g_bias;

    if (cfg_.use_epsilon) {
      const Eigen::VectorXd& pre = cache.eps_hidden_pre[l];
      const Eigen::VectorXd act = pre.unaryExpr([](double x) { return gelu(x); });
      const Eigen::VectorXd slope = pre.unaryExpr([](double x) { return gelu_derivative(x); });
      const auto W2 = as_matrix(params_.slot(layer_name(l, "eps_W2")), w, w);
      as_matrix(gslot(layer_name(l, "eps_W2")), w, w).noalias() += g_bias * act.transpose();
      const Eigen::VectorXd g_pre = (W2.transpose() * g_bias).cwiseProduct(slope);
      as_vector(gslot(layer_name(l, "eps_W1"))) += g_pre * cache.epsilon;
      as_vector(gslot(layer_name(l, "eps_b1"))) += g_pre;
    }

    const auto W = as_matrix(params_.slot(layer_name(l, "W")), w, w);
    Activations g_prev = W.transpose() * g_z;

    const auto R = params_.slot(layer_name(l, "R"));
    auto gR = gslot(layer_name(l, "R"));
    const std::size_t per_mode = static_cast<std::size_t>(w) * w;
    if (fourier_) {
      // Forward: Y_q = R_q B_q, out = synthesize(Y). Adjoint of synthesize
      // with the real-inverse weights is those weights times analyze.
      const int modes = fourier_->mode_count();
      Eigen::MatrixXcd gY = fourier_->analyze(g_z);
      const double n = static_cast<double>(grid_.size());
      for (int q = 0; q < modes; ++q) gY.col(q) *= (fourier_->kx(q) == 0 ? 1.0 : 2.0) / n;
      const Eigen::MatrixXcd& B = cache.fourier_coeffs[l];
      using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
      const cplx* Rw = reinterpret_cast<const cplx*>(R.data());
      cplx* gRw = reinterpret_cast<cplx*>(gR.data());
      Eigen::MatrixXcd gB(w, modes);
      for (int q = 0; q < modes; ++q) {
        Eigen::Map<const CMat> Rq(Rw + q * per_mode, w, w);
        Eigen::Map<CMat> gRq(gRw + q * per_mode, w, w);
        gRq.noalias() += gY.col(q) * B.col(q).adjoint();
        gB.col(q).noalias() = Rq.adjoint() * gY.col(q);
      }
      g_prev += fourier_->synthesize(gB, false);
    } else {
      const Eigen::MatrixXd& C = cache.pod_coeffs[l];
      const Eigen::MatrixXd gY = g_z * pod_->phi();
      const int modes = pod_->mode_count();
      Eigen::MatrixXd gC(w, modes);
      for (int k = 0; k < modes; ++k) {
        Eigen::Map<const RowMat> Rk(R.data() + k * per_mode, w, w);
        Eigen::Map<RowMat> gRk(gR.data() + k * per_mode, w, w);
        gRk.noalias() += gY.col(k) * C.col(k).transpose();
        gC.col(k).noalias() = Rk.transpose() * gY.col(k);
      }
      g_prev.noalias() += gC * pod_->phi().transpose();
    }
    g_v = std::move(g_prev);
  }

  as_matrix(gslot("lift.P1"), w, cfg_.lifted_channels()).noalias() += g_v * cache.input.transpose();
  as_vector(gslot("lift.P2")) += g_v.rowwise().sum();
}

}  // namespace podnolab
