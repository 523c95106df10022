#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "podnolab/dataset.hpp"
#include "podnolab/neuralop.hpp"

namespace podnolab {

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 1e-4;
  int batch = 20;
  int epochs = 0;
  std::uint64_t seed = 0;
  int n_train = 900;
  int n_test = 100;

  void validate() const;
};

// ||pred - truth|| / ||truth|| in the discrete L2 norm.
double relative_l2(const Field& pred, const Field& truth);
// Same ratio on raw activations; writes d(ratio)/d(pred) when grad is given.
double relative_l2(const Activations& pred, const Activations& truth, Activations* grad);

// Gradient slots in the model's parameter layout.
struct GradientBuffer {
  ParamVector values;
  const ParamStore* layout = nullptr;

  explicit GradientBuffer(const ParamStore& params) : values(params.size(), 0.0), layout(&params) {}
  std::span<const double> slot(const std::string& name) const;
};

// Mean relative-L2 loss over the listed samples and its exact gradient.
// Per-sample gradients are reduced in index order, so the result does not
// depend on the worker count.
GradientBuffer batch_gradient(const GsoModel& model, const Dataset& data, std::span<const std::size_t> indices,
                              double* loss = nullptr);

struct AdamState {
  std::vector<double> m, v;
  long step = 0;
  int epoch = 0;

  void reset(std::size_t n);
};

// Adam with bias correction, betas (0.9, 0.999), eps 1e-8; weight decay is
// added to the gradient before the moment updates.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state, const TrainConfig& cfg);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double test_error = 0.0;
  double wall_seconds = 0.0;
};

struct Evaluation {
  double mean = 0.0;
  std::vector<double> per_sample;
};

Evaluation evaluate(const GsoModel& model, const Dataset& data);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Runs cfg.epochs epochs of shuffled minibatch Adam (remainder batches are
// dropped) and evaluates on `test` after each epoch. An empty test set skips
// evaluation (test_error is NaN). The state carries optimizer moments across
// calls.
std::vector<EpochRecord> train(GsoModel& model, const Dataset& train_set, const Dataset& test_set,
                               const TrainConfig& cfg, AdamState& state, const EpochCallback& on_epoch = {});

// Permutation of [0, n) for one epoch, keyed by (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch);

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history);

}  // namespace podnolab
