#include "podnolab/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

namespace podnolab {

std::size_t spectrum_prefix(int n) {
  const double scaled = static_cast<double>(n) * n * 3000.0 / 4096.0;
  return static_cast<std::size_t>(std::llround(scaled));
}

SpectrumReport spectrum_error(const Field& pred, const Field& truth) {
  require_same_shape(pred, truth, "spectrum_error");
  const Grid2D& g = pred.grid();
  require(g.periodic(), ErrorKind::NonPeriodicGrid, "spectrum_error needs a periodic grid");
  require(g.nx() == g.ny(), ErrorKind::ShapeMismatch, "spectrum_error needs a square grid");
  require(pred.channels() == 1 || pred.channels() == 2, ErrorKind::ShapeMismatch,
          "spectrum_error takes real (1 channel) or complex (2 channel) fields");
  ComplexField diff(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    double re = pred.channel(0)[k] - truth.channel(0)[k];
    double im = pred.channels() == 2 ? pred.channel(1)[k] - truth.channel(1)[k] : 0.0;
    diff.data[k] = cplx(re, im);
  }
  const std::vector<cplx> spec = dft2(diff);
  SpectrumReport r;
  const int n = g.nx();
  r.prefix = std::min(spectrum_prefix(n), g.size());
  const std::vector<ModeLabel> order = sorted_mode_index(n);
  r.modes.assign(order.begin(), order.begin() + r.prefix);
  r.values.resize(r.prefix);
  for (std::size_t p = 0; p < r.prefix; ++p) {
    r.values[p] = std::abs(spec[static_cast<std::size_t>(r.modes[p].ky_index) * n + r.modes[p].kx_index]);
  }
  return r;
}

BandSummary band_error_summary(const SpectrumReport& report, double split_frac) {
  require(split_frac > 0.0 && split_frac < 1.0, ErrorKind::InvalidArgument, "band split must lie in (0, 1)");
  BandSummary b;
  const std::size_t n = report.values.size();
  b.split = static_cast<std::size_t>(std::floor(split_frac * static_cast<double>(n)));
  double low = 0.0, high = 0.0;
  for (std::size_t k = 0; k < n; ++k) (k < b.split ? low : high) += report.values[k];
  b.low = b.split > 0 ? low / static_cast<double>(b.split) : 0.0;
  b.high = n > b.split ? high / static_cast<double>(n - b.split) : 0.0;
  return b;
}

void write_spectrum_csv(const std::string& path, const SpectrumReport& report) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path);
  out << "rank,kx_index,ky_index,kx,ky,abs_error\n";
  char line[160];
  for (std::size_t p = 0; p < report.values.size(); ++p) {
    const ModeLabel& m = report.modes[p];
    std::snprintf(line, sizeof line, "%zu,%d,%d,%d,%d,%.17g\n", p, m.kx_index, m.ky_index, m.kx, m.ky, report.values[p]);
    out << line;
  }
  require(static_cast<bool>(out), ErrorKind::Io, "write failed for " + path);
}

AblationAxis parse_ablation_axis(const std::string& name) {
  if (name == "modes") return AblationAxis::Modes;
  if (name == "snapshots") return AblationAxis::Snapshots;
  if (name == "resolution") return AblationAxis::Resolution;
  if (name == "timesteps") return AblationAxis::Timesteps;
  throw Error(ErrorKind::Config, "unknown ablation axis '" + name + "' (modes|snapshots|resolution|timesteps)");
}

std::string to_string(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::Modes: return "modes";
    case AblationAxis::Snapshots: return "snapshots";
    case AblationAxis::Resolution: return "resolution";
    case AblationAxis::Timesteps: return "timesteps";
  }
  return "unknown";
}

ExperimentSpec apply_ablation(const ExperimentSpec& base, AblationAxis axis, double value) {
  ExperimentSpec s = base;
  const int iv = static_cast<int>(std::lround(value));
  switch (axis) {
    case AblationAxis::Modes:
      require(iv >= 1, ErrorKind::Config, "mode count must be >= 1");
      if (s.model.kernel == KernelKind::Pod) {
        s.model.pod_modes = iv;
      } else {
        s.model.modes = ModeSet{iv, iv};
      }
      break;
    case AblationAxis::Snapshots:
      s.snapshot_fraction = value;
      break;
    case AblationAxis::Resolution:
      s.data.n = iv;
      break;
    case AblationAxis::Timesteps:
      s.data.steps = iv;
      break;
  }
  return s;
}

std::vector<AblationRow> ablation_sweep(AblationAxis axis, const std::vector<double>& values, const ExperimentSpec& base) {
  require(!values.empty(), ErrorKind::Config, "ablation sweep needs at least one value");
  const bool data_changes = axis == AblationAxis::Resolution || axis == AblationAxis::Timesteps;
  std::optional<Dataset> shared;
  std::vector<AblationRow> rows;
  for (double v : values) {
    const ExperimentSpec s = apply_ablation(base, axis, v);
    GenerateSpec g = s.data;
    g.samples = s.n_train + s.n_test;
    Dataset fresh;
    if (data_changes) {
      fresh = generate_dataset(g);
    } else if (!shared) {
      shared = generate_dataset(g);
    }
    const ExperimentResult r = run_experiment(s, data_changes ? fresh : *shared);
    AblationRow row;
    row.value = v;
    row.test_error = r.test.mean;
    row.train_loss = r.history.empty() ? 0.0 : r.history.back().train_loss;
    rows.push_back(row);
  }
  return rows;
}

void write_ablation_csv(const std::string& path, AblationAxis axis, const std::vector<AblationRow>& rows) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path);
  out << to_string(axis) << ",test_error,train_loss\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", r.value, r.test_error, r.train_loss);
    out << line;
  }
  require(static_cast<bool>(out), ErrorKind::Io, "write failed for " + path);
}

}  // namespace podnolab
