#include "podnolab/pipeline.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "podnolab/datagen.hpp"
#include "podnolab/parallel.hpp"
#include "podnolab/rng.hpp"
#include "podnolab/solvers.hpp"

namespace podnolab {

void GenerateSpec::validate() const {
  require(family == "darcy" || family == "nls" || family == "kp", ErrorKind::Config,
          "unknown problem family '" + family + "'");
  require(n >= 4, ErrorKind::Config, "grid side must be >= 4");
  require(samples >= 1, ErrorKind::Config, "sample count must be >= 1");
  require(steps >= 1 && T >= 0.0, ErrorKind::Config, "steps must be >= 1 and T >= 0");
  require(epsilon_pool >= 1, ErrorKind::Config, "epsilon pool must hold at least one value");
  require(kp_epsilon > 0.0, ErrorKind::Config, "kp epsilon must be positive");
}

double GenerateSpec::final_time() const {
  if (T > 0.0) return T;
  return family == "kp" ? 0.3 : 0.5;
}

Grid2D family_grid(const std::string& family, int n) {
  if (family == "darcy") return make_grid(n, n, {0.0, 1.0, 0.0, 1.0}, false);
  if (family == "nls") return make_grid(n, n, {-1.0, 1.0, -1.0, 1.0}, true);
  if (family == "kp") {
    const double pi = std::numbers::pi;
    return make_grid(n, n, {-pi, pi, -pi, pi}, true);
  }
  throw Error(ErrorKind::Config, "unknown problem family '" + family + "'");
}

std::vector<double> epsilon_pool(std::uint64_t seed, int size) {
  std::vector<double> pool(size);
  for (int p = 0; p < size; ++p) pool[p] = sample_epsilon(seed, static_cast<std::uint64_t>(p));
  return pool;
}

double nls_sample_epsilon(std::uint64_t seed, std::uint64_t index, int pool_size) {
  KeyedRng pick(seed, index, RngPurpose::EpsilonPick);
  return sample_epsilon(seed, pick.next_u64() % static_cast<std::uint64_t>(pool_size));
}

Dataset generate_dataset(const GenerateSpec& spec) {
  spec.validate();
  Dataset data;
  data.family = spec.family;
  data.grid = family_grid(spec.family, spec.n);
  const std::size_t count = spec.samples;
  data.inputs.resize(count);
  data.outputs.resize(count);
  if (spec.family == "nls") data.epsilons.resize(count);

  const Grid2D grid = data.grid;
  const NlsInitLaw nls_law;
  const Field potential = spec.family == "nls" ? nls_potential(grid, nls_law) : Field();
  parallel_for(count, [&](std::size_t j) {
    const std::uint64_t index = spec.first_index + j;
    if (spec.family == "darcy") {
      DarcyProblem p{grid, sample_darcy_a(grid, DarcyLaw{}, spec.seed, index), Field()};
      data.outputs[j] = solve_darcy(p);
      data.inputs[j] = std::move(p.a);
    } else if (spec.family == "nls") {
      NlsProblem p{grid, nls_sample_epsilon(spec.seed, index, spec.epsilon_pool), potential, spec.final_time(), spec.steps};
      data.inputs[j] = sample_nls_u0(grid, nls_law, spec.seed, index);
      data.outputs[j] = lie_trotter_nls(p, data.inputs[j]);
      data.epsilons[j] = p.epsilon;
    } else {
      KpProblem p{grid, spec.kp_epsilon, -1.0, spec.final_time(), spec.steps};
      data.inputs[j] = sample_kp_u0(grid, KpInitLaw{}, spec.seed, index);
      data.outputs[j] = etdrk4_kp(p, data.inputs[j]);
    }
  });

  nlohmann::json m;
  m["family"] = spec.family;
  m["n"] = spec.n;
  m["samples"] = spec.samples;
  m["seed"] = spec.seed;
  m["first_index"] = spec.first_index;
  if (spec.family != "darcy") {
    m["steps"] = spec.steps;
    m["T"] = spec.final_time();
  }
  if (spec.family == "nls") m["epsilon_pool"] = spec.epsilon_pool;
  if (spec.family == "kp") m["kp_epsilon"] = spec.kp_epsilon;
  data.manifest = m.dump();
  data.validate();
  return data;
}

SnapshotMatrix dataset_snapshots(const Dataset& data, double fraction) {
  require(fraction > 0.0 && fraction <= 1.0, ErrorKind::Config, "snapshot fraction must lie in (0, 1]");
  const std::size_t count = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * data.size())));
  require(count <= data.size(), ErrorKind::EmptyDataset, "dataset has no samples for snapshots");
  SnapshotMatrix X;
  for (std::size_t j = 0; j < count; ++j) {
    append_snapshot(X, data.inputs[j], "in" + std::to_string(j));
    append_snapshot(X, data.outputs[j], "out" + std::to_string(j));
  }
  return X;
}

std::shared_ptr<PodBasis> dataset_basis(const Dataset& data, int modes, double fraction) {
  return std::make_shared<PodBasis>(compute_basis(dataset_snapshots(data, fraction), modes));
}

namespace {

void channel_stats(const std::vector<Field>& fields, int channels, std::vector<double>& mean, std::vector<double>& sd) {
  mean.assign(channels, 0.0);
  sd.assign(channels, 0.0);
  for (int c = 0; c < channels; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : fields) {
      for (double v : f.channel(c)) sum += v;
      n += f.plane_size();
    }
    mean[c] = sum / static_cast<double>(n);
    double sq = 0.0;
    for (const auto& f : fields) {
      for (double v : f.channel(c)) sq += (v - mean[c]) * (v - mean[c]);
    }
    sd[c] = std::sqrt(sq / static_cast<double>(n));
    if (!(sd[c] > 1e-12)) sd[c] = 1.0;
  }
}

}  // namespace

void fit_normalization(GsoConfig& cfg, const Dataset& train) {
  train.validate();
  channel_stats(train.inputs, train.in_channels(), cfg.input_shift, cfg.input_scale);
  channel_stats(train.outputs, train.out_channels(), cfg.output_shift, cfg.output_scale);
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const Dataset& data, const EpochCallback& on_epoch) {
  require(spec.n_train >= 1 && spec.n_test >= 0, ErrorKind::Config, "experiment needs n_train >= 1");
  require(data.size() >= static_cast<std::size_t>(spec.n_train + spec.n_test), ErrorKind::SizeMismatch,
          "dataset holds " + std::to_string(data.size()) + " samples, experiment needs " +
              std::to_string(spec.n_train + spec.n_test));
  const Dataset train_set = data.slice(0, spec.n_train);
  const Dataset test_set = data.slice(spec.n_train, spec.n_train + spec.n_test);

  ExperimentResult result;
  GsoConfig cfg = spec.model;
  cfg.in_channels = data.in_channels();
  cfg.out_channels = data.out_channels();
  cfg.use_epsilon = cfg.use_epsilon || data.has_epsilon();
  if (spec.normalize) fit_normalization(cfg, train_set);
  if (cfg.kernel == KernelKind::Pod) {
    result.basis = spec.basis ? spec.basis : dataset_basis(train_set, cfg.pod_modes, spec.snapshot_fraction);
  }
  result.model = std::make_unique<GsoModel>(cfg, data.grid, result.basis);
  result.model->initialize(spec.train.seed);
  TrainConfig tc = spec.train;
  tc.n_train = spec.n_train;
  tc.n_test = spec.n_test;
  result.history = train(*result.model, train_set, test_set, tc, result.adam, on_epoch);
  if (spec.n_test > 0) result.test = evaluate(*result.model, test_set);
  return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  GenerateSpec g = spec.data;
  g.samples = spec.n_train + spec.n_test;
  return run_experiment(spec, generate_dataset(g));
}

}  // namespace podnolab
