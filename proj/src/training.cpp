#include "podnolab/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "podnolab/parallel.hpp"
#include "podnolab/rng.hpp"

namespace podnolab {

void TrainConfig::validate() const {
  require(lr > 0.0 && std::isfinite(lr), ErrorKind::Config, "learning rate must be positive");
  require(weight_decay >= 0.0, ErrorKind::Config, "weight decay must be non-negative");
  require(batch >= 1 && epochs >= 0, ErrorKind::Config, "batch must be >= 1 and epochs >= 0");
  require(n_train >= 1 && n_test >= 0, ErrorKind::Config, "sample counts must be positive");
  require(batch <= n_train, ErrorKind::Config, "batch size exceeds training set size");
}

double relative_l2(const Activations& pred, const Activations& truth, Activations* grad) {
  require(pred.rows() == truth.rows() && pred.cols() == truth.cols(), ErrorKind::ShapeMismatch,
          "relative_l2: shape mismatch");
  const double nt = truth.norm();
  require(nt > 0.0, ErrorKind::InvalidArgument, "relative_l2: truth has zero norm");
  const Activations d = pred - truth;
  const double nd = d.norm();
  if (grad) {
    if (nd > 0.0) {
      *grad = d / (nd * nt);
    } else {
      grad->setZero(d.rows(), d.cols());
    }
  }
  return nd / nt;
}

double relative_l2(const Field& pred, const Field& truth) {
  require_same_shape(pred, truth, "relative_l2");
  return relative_l2(to_activations(pred), to_activations(truth), nullptr);
}

std::span<const double> GradientBuffer::slot(const std::string& name) const {
  const ParamEntry& e = layout->entry(name);
  return std::span<const double>(values).subspan(e.offset, e.size);
}

GradientBuffer batch_gradient(const GsoModel& model, const Dataset& data, std::span<const std::size_t> indices,
                              double* loss) {
  require(!indices.empty(), ErrorKind::EmptyDataset, "batch_gradient: empty batch");
  GradientBuffer grad(model.params());
  const double scale = 1.0 / static_cast<double>(indices.size());
  std::vector<double> losses(indices.size());

  auto sample = [&](std::size_t k, std::span<double> target) {
    const std::size_t i = indices[k];
    ForwardCache cache;
    const Activations pred = model.forward(data.inputs[i], data.epsilon(i), &cache);
    Activations g;
    losses[k] = relative_l2(pred, to_activations(data.outputs[i]), &g);
    g *= scale;
    model.backward(cache, g, target);
  };

  // Each sample lands in its own zeroed buffer and the buffers are summed in
  // index order, on every path.
  if (thread_count() <= 1 || indices.size() == 1) {
    ParamVector part(grad.values.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
      std::fill(part.begin(), part.end(), 0.0);
      sample(k, part);
      for (std::size_t p = 0; p < part.size(); ++p) grad.values[p] += part[p];
    }
  } else {
    std::vector<ParamVector> parts(indices.size(), ParamVector(grad.values.size(), 0.0));
    parallel_for(indices.size(), [&](std::size_t k) { sample(k, parts[k]); });
    for (const auto& part : parts) {
      for (std::size_t p = 0; p < part.size(); ++p) grad.values[p] += part[p];
    }
  }
  if (loss) {
    double total = 0.0;
    for (double l : losses) total += l;
    *loss = total * scale;
  }
  return grad;
}

void AdamState::reset(std::size_t n) {
  m.assign(n, 0.0);
  v.assign(n, 0.0);
  step = 0;
  epoch = 0;
}

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state, const TrainConfig& cfg) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  require(grad.size() == params.size(), ErrorKind::ShapeMismatch, "adam_step: gradient size");
  if (state.m.size() != params.size()) state.reset(params.size());
  ++state.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grad[k] + cfg.weight_decay * params[k];
    state.m[k] = beta1 * state.m[k] + (1.0 - beta1) * g;
    state.v[k] = beta2 * state.v[k] + (1.0 - beta2) * g * g;
    const double mhat = state.m[k] / c1;
    const double vhat = state.v[k] / c2;
    params[k] -= cfg.lr * mhat / (std::sqrt(vhat) + eps);
  }
}

Evaluation evaluate(const GsoModel& model, const Dataset& data) {
  require(data.size() > 0, ErrorKind::EmptyDataset, "evaluate: empty dataset");
  Evaluation ev;
  ev.per_sample.resize(data.size());
  parallel_for(data.size(), [&](std::size_t i) {
    const Activations pred = model.forward(data.inputs[i], data.epsilon(i), nullptr);
    ev.per_sample[i] = relative_l2(pred, to_activations(data.outputs[i]), nullptr);
  });
  double total = 0.0;
  for (double e : ev.per_sample) total += e;
  ev.mean = total / static_cast<double>(data.size());
  return ev;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  KeyedRng rng(seed, static_cast<std::uint64_t>(epoch), RngPurpose::Shuffle);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::vector<EpochRecord> train(GsoModel& model, const Dataset& train_set, const Dataset& test_set,
                               const TrainConfig& cfg, AdamState& state, const EpochCallback& on_epoch) {
  cfg.validate();
  std::vector<EpochRecord> history;
  if (cfg.epochs == 0) return history;
  train_set.validate();
  require(static_cast<std::size_t>(cfg.batch) <= train_set.size(), ErrorKind::Config,
          "batch size exceeds training set size");
  if (state.m.size() != model.params().size()) state.reset(model.params().size());

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = train_set.size();
  const std::size_t batches = n / cfg.batch;
  for (int e = 0; e < cfg.epochs; ++e) {
    const int epoch = state.epoch + 1;
    const std::vector<std::size_t> order = epoch_order(n, cfg.seed, epoch);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      std::span<const std::size_t> idx(order.data() + b * cfg.batch, static_cast<std::size_t>(cfg.batch));
      double loss = 0.0;
      const GradientBuffer grad = batch_gradient(model, train_set, idx, &loss);
      bool finite = std::isfinite(loss);
      for (double g : grad.values) finite = finite && std::isfinite(g);
      require(finite, ErrorKind::NumericalBlowup,
              "non-finite loss or gradient at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b));
      adam_step(model.params().values(), grad.values, state, cfg);
      loss_sum += loss;
    }
    state.epoch = epoch;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.test_error = test_set.size() > 0 ? evaluate(model, test_set).mean : std::numeric_limits<double>::quiet_NaN();
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path);
  out << "epoch,train_loss,test_error,wall_seconds\n";
  char line[160];
  for (const auto& r : history) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.3f\n", r.epoch, r.train_loss, r.test_error, r.wall_seconds);
    out << line;
  }
  require(static_cast<bool>(out), ErrorKind::Io, "write failed for " + path);
}

}  // namespace podnolab
