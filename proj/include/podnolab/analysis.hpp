#pragma once

#include <string>
#include <vector>

#include "podnolab/grid.hpp"
#include "podnolab/pipeline.hpp"
#include "podnolab/spectral.hpp"

namespace podnolab {

// Moduli of the unnormalized DFT of pred - truth, in sorted_mode_index order
// and cut to the retained prefix.
struct SpectrumReport {
  std::vector<ModeLabel> modes;
  std::vector<double> values;
  std::size_t prefix = 0;
};

// 3000 at n = 64; n^2 * 3000 / 4096 rounded at other sizes.
std::size_t spectrum_prefix(int n);

// One-channel fields are real; two-channel fields are (re, im) of one
// complex function. The grid must be square and periodic.
SpectrumReport spectrum_error(const Field& pred, const Field& truth);

struct BandSummary {
  double low = 0.0;
  double high = 0.0;
  std::size_t split = 0;  // first index of the high band
};

// Means of values[0, split) and values[split, n) with split = floor(frac n).
BandSummary band_error_summary(const SpectrumReport& report, double split_frac = 0.5);

void write_spectrum_csv(const std::string& path, const SpectrumReport& report);

enum class AblationAxis { Modes, Snapshots, Resolution, Timesteps };

AblationAxis parse_ablation_axis(const std::string& name);
std::string to_string(AblationAxis axis);

struct AblationRow {
  double value = 0.0;
  double test_error = 0.0;
  double train_loss = 0.0;
};

// Applies one axis value to a copy of the base experiment:
//   modes       -> pod_modes (POD kernel) or modes = (v, v) (Fourier kernel)
//   snapshots   -> snapshot_fraction
//   resolution  -> data.n
//   timesteps   -> data.steps
ExperimentSpec apply_ablation(const ExperimentSpec& base, AblationAxis axis, double value);

// Each row regenerates data only when the axis changes it; seeds are shared.
std::vector<AblationRow> ablation_sweep(AblationAxis axis, const std::vector<double>& values, const ExperimentSpec& base);

void write_ablation_csv(const std::string& path, AblationAxis axis, const std::vector<AblationRow>& rows);

}  // namespace podnolab
