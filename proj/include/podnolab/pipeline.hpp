#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "podnolab/dataset.hpp"
#include "podnolab/neuralop.hpp"
#include "podnolab/pod.hpp"
#include "podnolab/training.hpp"

namespace podnolab {

// How to produce a dataset for one of the three problem families.
struct GenerateSpec {
  std::string family = "nls";  // darcy | nls | kp
  int n = 64;                  // grid side
  int samples = 4;
  std::uint64_t seed = 0;
  std::uint64_t first_index = 0;  // sample j uses stream index first_index + j
  int steps = 1000;               // time steps (nls, kp)
  double T = 0.0;                 // final time; 0 picks the family default
  int epsilon_pool = 30;          // nls: distinct epsilon values drawn per seed
  double kp_epsilon = 0.02;

  void validate() const;
  double final_time() const;
};

// (0,1)^2 with endpoints for darcy, periodic (-1,1)^2 for nls, periodic
// (-pi,pi)^2 for kp.
Grid2D family_grid(const std::string& family, int n);

// The nls epsilon pool for a seed and the pool slot used by a sample.
std::vector<double> epsilon_pool(std::uint64_t seed, int size);
double nls_sample_epsilon(std::uint64_t seed, std::uint64_t index, int pool_size);

Dataset generate_dataset(const GenerateSpec& spec);

// Snapshot matrix from the inputs and outputs of the first
// round(fraction * size) samples, every channel its own column.
SnapshotMatrix dataset_snapshots(const Dataset& data, double fraction = 1.0);
std::shared_ptr<PodBasis> dataset_basis(const Dataset& data, int modes, double fraction = 1.0);

// Per-channel mean and standard deviation over nodes and samples, written
// into the model's input and output normalization.
void fit_normalization(GsoConfig& cfg, const Dataset& train);

struct ExperimentSpec {
  GenerateSpec data;
  int n_train = 900;
  int n_test = 100;
  GsoConfig model;
  TrainConfig train;
  double snapshot_fraction = 1.0;
  bool normalize = true;
  // Used instead of building one from the training split when set.
  std::shared_ptr<const PodBasis> basis;
};

struct ExperimentResult {
  std::shared_ptr<const PodBasis> basis;
  std::unique_ptr<GsoModel> model;
  AdamState adam;
  std::vector<EpochRecord> history;
  Evaluation test;
};

// Splits the first n_train samples for training and the next n_test for
// testing, builds the basis when the kernel needs one, fits normalization,
// initializes with train.seed, and trains.
ExperimentResult run_experiment(const ExperimentSpec& spec, const Dataset& data,
                                const EpochCallback& on_epoch = {});
ExperimentResult run_experiment(const ExperimentSpec& spec);

}  // namespace podnolab
