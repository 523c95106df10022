#include "podnolab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "podnolab/analysis.hpp"
#include "podnolab/datagen.hpp"
#include "podnolab/io.hpp"
#include "podnolab/pipeline.hpp"
#include "podnolab/solvers.hpp"

namespace podnolab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "podnolab 1.0.0";

struct Option {
  const char* key;
  json def;
  const char* help;
};

using Handler = std::function<void(json& cfg, const fs::path& out)>;

struct Command {
  const char* name;
  const char* description;
  std::vector<Option> options;
  Handler run;
};

// ---------------------------------------------------------------------------
// Config resolution

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return "--" + s;
}

json parse_flag(const json& def, const std::string& key, const std::string& text) {
  try {
    if (def.is_boolean()) {
      if (text == "true" || text == "1" || text == "yes") return true;
      if (text == "false" || text == "0" || text == "no") return false;
      throw Error(ErrorKind::Config, "--" + key + " expects true or false, got '" + text + "'");
    }
    if (def.is_number_integer()) return std::stoll(text);
    if (def.is_number_float()) return std::stod(text);
    if (def.is_array()) {
      json arr = json::array();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) arr.push_back(std::stod(item));
      }
      return arr;
    }
    if (def.is_null()) {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used == text.size()) return v;
      return text;
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::Config, "cannot parse value '" + text + "' for " + flag_name(key));
  }
  return text;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, path + ": " + e.what());
  }
}

json resolve_config(const Command& cmd, const std::string& config_path, const json& overrides) {
  json cfg = json::object();
  for (const auto& o : cmd.options) cfg[o.key] = o.def;
  if (!config_path.empty()) {
    json file = read_json_file(config_path);
    // A run manifest replays its resolved config.
    if (file.contains("command") && file.contains("config")) {
      require(file["command"] == cmd.name, ErrorKind::Config,
              config_path + " is a manifest for '" + file["command"].get<std::string>() + "', not '" + cmd.name + "'");
      file = file["config"];
    }
    require(file.is_object(), ErrorKind::Config, config_path + ": config must be a JSON object");
    for (const auto& [k, v] : file.items()) {
      require(cfg.contains(k), ErrorKind::Config, config_path + ": unknown key '" + k + "' for " + cmd.name);
      cfg[k] = v;
    }
  }
  for (const auto& [k, v] : overrides.items()) cfg[k] = v;
  return cfg;
}

template <typename T>
T get(const json& cfg, const char* key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config key '") + key + "': " + e.what());
  }
}

std::string require_path(const json& cfg, const char* key) {
  const std::string p = get<std::string>(cfg, key);
  require(!p.empty(), ErrorKind::Config, std::string("--") + key + " is required");
  return p;
}

// A directory argument names the default file inside it.
std::string resolve_file(const std::string& p, const char* default_name) {
  if (fs::is_directory(p)) return (fs::path(p) / default_name).string();
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorKind::Io, "write failed for " + path.string());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared option groups

std::vector<Option> model_options() {
  return {
      {"kernel", "pod", "kernel backend: pod or fourier"},
      {"modes", 16, "POD modes N, or Fourier modes per axis"},
      {"mx", 0, "Fourier modes along x (0: use --modes)"},
      {"my", 0, "Fourier modes along y (0: use --modes)"},
      {"width", 32, "lifting width d_v"},
      {"layers", 4, "number of GSO layers L"},
      {"coordinates", true, "append (x, y) coordinate channels"},
      {"normalize", true, "standardize inputs and outputs with training-split statistics"},
      {"lr", 1e-3, "Adam learning rate"},
      {"weight_decay", 1e-4, "coupled L2 weight decay"},
      {"batch", 20, "batch size"},
      {"epochs", 500, "training epochs"},
      {"seed", 0, "seed for initialization and shuffling"},
      {"n_train", -1, "training samples (-1: automatic)"},
      {"n_test", -1, "test samples (-1: automatic)"},
      {"snapshot_fraction", 1.0, "fraction of training pairs used for the POD snapshot matrix"},
  };
}

// Fills model/train settings of an experiment and resolves the automatic
// split sizes against the number of available samples.
ExperimentSpec experiment_from(json& cfg, std::size_t available) {
  ExperimentSpec s;
  const std::string kernel = get<std::string>(cfg, "kernel");
  require(kernel == "pod" || kernel == "fourier", ErrorKind::Config, "--kernel must be pod or fourier");
  const int modes = get<int>(cfg, "modes");
  s.model.kernel = kernel == "pod" ? KernelKind::Pod : KernelKind::Fourier;
  s.model.pod_modes = kernel == "pod" ? modes : 0;
  const int mx = get<int>(cfg, "mx");
  const int my = get<int>(cfg, "my");
  s.model.modes = ModeSet{mx > 0 ? mx : modes, my > 0 ? my : modes};
  s.model.width = get<int>(cfg, "width");
  s.model.layers = get<int>(cfg, "layers");
  s.model.coordinates = get<bool>(cfg, "coordinates");
  s.normalize = get<bool>(cfg, "normalize");
  s.train.lr = get<double>(cfg, "lr");
  s.train.weight_decay = get<double>(cfg, "weight_decay");
  s.train.epochs = get<int>(cfg, "epochs");
  s.train.seed = get<std::uint64_t>(cfg, "seed");
  s.snapshot_fraction = get<double>(cfg, "snapshot_fraction");

  int n_test = get<int>(cfg, "n_test");
  int n_train = get<int>(cfg, "n_train");
  const int total = static_cast<int>(available);
  if (n_test < 0) n_test = total >= 1000 ? 100 : total / 10;
  if (n_train < 0) n_train = std::min(900, total - n_test);
  require(n_train >= 1 && n_train + n_test <= total, ErrorKind::Config,
          "split " + std::to_string(n_train) + " + " + std::to_string(n_test) + " exceeds the " + std::to_string(total) +
              " available samples");
  s.n_train = n_train;
  s.n_test = n_test;
  s.train.batch = std::min(get<int>(cfg, "batch"), n_train);
  cfg["n_train"] = n_train;
  cfg["n_test"] = n_test;
  cfg["batch"] = s.train.batch;
  return s;
}

void print_epoch(const EpochRecord& r) {
  std::printf("epoch %d  train_loss %.6e  test_error %.6e  (%.1fs)\n", r.epoch, r.train_loss, r.test_error,
              r.wall_seconds);
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// Handlers

Handler generate_handler(const std::string& family) {
  return [family](json& cfg, const fs::path& out) {
    GenerateSpec g;
    g.family = family;
    g.n = get<int>(cfg, "grid");
    g.samples = get<int>(cfg, "n");
    g.seed = get<std::uint64_t>(cfg, "seed");
    g.first_index = get<std::uint64_t>(cfg, "first_index");
    if (family != "darcy") {
      g.steps = get<int>(cfg, "steps");
      g.T = get<double>(cfg, "T");
      g.T = g.final_time();
      cfg["T"] = g.T;
    }
    if (family == "nls") g.epsilon_pool = get<int>(cfg, "epsilon_pool");
    if (family == "kp") g.kp_epsilon = get<double>(cfg, "kp_epsilon");
    const Dataset d = generate_dataset(g);
    const fs::path path = out / "dataset.pdt";
    save_dataset(path.string(), d);
    std::printf("wrote %zu %s samples on a %dx%d grid to %s\n", d.size(), family.c_str(), g.n, g.n,
                path.string().c_str());
  };
}

void run_pod_basis(json& cfg, const fs::path& out) {
  const Dataset d = load_dataset(resolve_file(require_path(cfg, "dataset"), "dataset.pdt"));
  const int modes = get<int>(cfg, "modes");
  const SnapshotMatrix X = dataset_snapshots(d, get<double>(cfg, "snapshot_fraction"));
  const PodBasis b = compute_basis(X, modes);
  save_basis((out / "basis.ckp").string(), b);

  std::ostringstream csv;
  csv << "modes,energy_ratio\n";
  for (std::size_t n = 1; n <= b.sigma.size(); ++n) csv << n << "," << fmt(energy_ratio(b, static_cast<int>(n))) << "\n";
  write_text(out / "energy.csv", csv.str());

  const double rho = energy_ratio(b, modes);
  const int enough = modes_for_energy(b, 0.99);
  std::printf("snapshots %d  nmesh %d\n", X.cols(), X.rows());
  std::printf("rho(%d) = %.10f\n", modes, rho);
  std::printf("smallest N with rho >= 0.99: %d\n", enough);
  if (b.degenerate_count() > 0) std::printf("degenerate modes completed: %d\n", b.degenerate_count());
  if (rho < 0.99) {
    std::fprintf(stderr, "warning: %d modes capture %.4f of the snapshot energy; %d modes reach 0.99\n", modes, rho,
                 enough);
  }
}

void run_train(json& cfg, const fs::path& out) {
  const std::string data_path = resolve_file(require_path(cfg, "dataset"), "dataset.pdt");
  const Dataset d = load_dataset(data_path);
  ExperimentSpec s = experiment_from(cfg, d.size());
  const std::string basis_path = get<std::string>(cfg, "basis");
  if (!basis_path.empty()) s.basis = std::make_shared<PodBasis>(load_basis(resolve_file(basis_path, "basis.ckp")));
  const ExperimentResult r = run_experiment(s, d, print_epoch);

  json extra = {{"dataset", data_path},
                {"n_train", s.n_train},
                {"n_test", s.n_test},
                {"lr", s.train.lr},
                {"weight_decay", s.train.weight_decay},
                {"weight_decay_mode", "coupled"},
                {"batch", s.train.batch},
                {"seed", s.train.seed}};
  save_checkpoint((out / "model.ckp").string(), *r.model, &r.adam, extra);
  write_history_csv((out / "history.csv").string(), r.history);
  const ParamBreakdown pb = param_breakdown(r.model->config());
  std::printf("parameters %zu (spectral %zu)\n", pb.total(), pb.spectral);
  if (s.model.kernel == KernelKind::Pod) {
    std::printf("rho(%d) = %.10f\n", s.model.pod_modes, energy_ratio(*r.basis, s.model.pod_modes));
  }
  if (s.n_test > 0) std::printf("test relative error %.6e over %d samples\n", r.test.mean, s.n_test);
}

struct Selection {
  Dataset data;
  std::size_t first = 0;
};

Selection select_samples(const json& cfg) {
  const Dataset d = load_dataset(resolve_file(require_path(cfg, "dataset"), "dataset.pdt"));
  const long first = get<long>(cfg, "first");
  long count = get<long>(cfg, "count");
  require(first >= 0 && static_cast<std::size_t>(first) < d.size(), ErrorKind::Config, "--first is out of range");
  if (count < 0) count = static_cast<long>(d.size()) - first;
  require(count >= 1 && static_cast<std::size_t>(first + count) <= d.size(), ErrorKind::Config,
          "--count selects samples past the end of the dataset");
  return {d.slice(first, first + count), static_cast<std::size_t>(first)};
}

Checkpoint load_model_for(const json& cfg, const Dataset& d) {
  Checkpoint ck = load_checkpoint(resolve_file(require_path(cfg, "checkpoint"), "model.ckp"));
  require(ck.model->grid() == d.grid, ErrorKind::ShapeMismatch, "dataset grid differs from the model grid");
  require(!ck.model->config().use_epsilon || d.has_epsilon(), ErrorKind::Config,
          "model expects epsilon values but the dataset has none");
  return ck;
}

void run_eval(json& cfg, const fs::path& out) {
  const Selection sel = select_samples(cfg);
  const Checkpoint ck = load_model_for(cfg, sel.data);
  const Evaluation ev = evaluate(*ck.model, sel.data);
  std::ostringstream csv;
  csv << "index,relative_error\n";
  for (std::size_t i = 0; i < ev.per_sample.size(); ++i) csv << sel.first + i << "," << fmt(ev.per_sample[i]) << "\n";
  write_text(out / "eval.csv", csv.str());
  std::printf("mean relative error %.6e over %zu samples\n", ev.mean, ev.per_sample.size());
}

void run_predict(json& cfg, const fs::path& out) {
  const Selection sel = select_samples(cfg);
  const Checkpoint ck = load_model_for(cfg, sel.data);
  Dataset pred = sel.data;
  for (std::size_t i = 0; i < pred.size(); ++i) pred.outputs[i] = ck.model->forward(pred.inputs[i], pred.epsilon(i));
  pred.manifest = json{{"predicted_by", get<std::string>(cfg, "checkpoint")}, {"first", sel.first}}.dump();
  save_dataset((out / "predictions.pdt").string(), pred);
  std::printf("wrote %zu predictions\n", pred.size());
}

void run_spectrum(json& cfg, const fs::path& out) {
  const Selection sel = select_samples(cfg);
  const Checkpoint ck = load_model_for(cfg, sel.data);
  const double split = get<double>(cfg, "split");
  SpectrumReport mean;
  std::ostringstream bands;
  bands << "index,low_band_mean,high_band_mean\n";
  double low = 0.0, high = 0.0;
  for (std::size_t i = 0; i < sel.data.size(); ++i) {
    const Field p = ck.model->forward(sel.data.inputs[i], sel.data.epsilon(i));
    const SpectrumReport r = spectrum_error(p, sel.data.outputs[i]);
    if (i == 0) {
      mean = r;
    } else {
      for (std::size_t k = 0; k < r.values.size(); ++k) mean.values[k] += r.values[k];
    }
    const BandSummary b = band_error_summary(r, split);
    low += b.low;
    high += b.high;
    bands << sel.first + i << "," << fmt(b.low) << "," << fmt(b.high) << "\n";
  }
  const double n = static_cast<double>(sel.data.size());
  for (double& v : mean.values) v /= n;
  write_spectrum_csv((out / "spectrum.csv").string(), mean);
  write_text(out / "bands.csv", bands.str());
  std::printf("modes kept %zu  low band mean %.6e  high band mean %.6e\n", mean.prefix, low / n, high / n);
}

struct NlsCase {
  NlsProblem problem;
  ComplexField u0;
};

NlsCase nls_case(json& cfg) {
  const Grid2D grid = family_grid("nls", get<int>(cfg, "grid"));
  const std::uint64_t seed = get<std::uint64_t>(cfg, "seed");
  const std::uint64_t index = get<std::uint64_t>(cfg, "index");
  const NlsInitLaw law;
  double eps = 0.0;
  if (cfg["epsilon"].is_null()) {
    eps = nls_sample_epsilon(seed, index, get<int>(cfg, "epsilon_pool"));
    cfg["epsilon"] = eps;
  } else {
    eps = get<double>(cfg, "epsilon");
  }
  NlsProblem p{grid, eps, nls_potential(grid, law), get<double>(cfg, "T"), get<int>(cfg, "steps")};
  p.validate();
  return {p, to_complex(sample_nls_u0(grid, law, seed, index))};
}

double mass(const ComplexField& u) {
  double s = 0.0;
  for (const auto& v : u.data) s += std::norm(v);
  return s * u.grid.cell_area();
}

void run_split_solve(json& cfg, const fs::path& out) {
  const NlsCase c = nls_case(cfg);
  const double m0 = mass(c.u0);
  double drift = 0.0;
  const ComplexField u = lie_trotter_nls(c.problem, c.u0, [&](int, const ComplexField& w) {
    drift = std::max(drift, std::abs(mass(w) - m0) / m0);
  });
  Dataset d;
  d.family = "nls";
  d.grid = c.problem.grid;
  d.inputs = {to_field(c.u0)};
  d.outputs = {to_field(u)};
  d.epsilons = {c.problem.epsilon};
  d.manifest = json{{"solver", "lie-trotter"}, {"steps", c.problem.steps}, {"T", c.problem.T}}.dump();
  save_dataset((out / "solution.pdt").string(), d);
  std::printf("epsilon %.6f  steps %d  max relative mass drift %.3e\n", c.problem.epsilon, c.problem.steps, drift);
}

double complex_rel_error(const ComplexField& a, const ComplexField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    num += std::norm(a.data[k] - b.data[k]);
    den += std::norm(b.data[k]);
  }
  return std::sqrt(num / den);
}

void run_pod_split_solve(json& cfg, const fs::path& out) {
  const NlsCase c = nls_case(cfg);
  const int type = get<int>(cfg, "basis_type");
  require(type >= 1 && type <= 3, ErrorKind::Config, "--basis-type must be 1, 2, or 3");
  const ComplexField reference = lie_trotter_nls(c.problem, c.u0);
  const SnapshotMatrix X = nls_snapshots(c.problem, c.u0, static_cast<SnapshotRecipe>(type));
  const int available = std::min(X.rows(), X.cols());
  const PodBasis basis = compute_basis(X, available);

  std::vector<int> modes;
  for (const auto& v : cfg["modes"]) modes.push_back(static_cast<int>(std::lround(v.get<double>())));
  if (modes.empty()) {
    for (int n = 1; n < available; n *= 2) modes.push_back(n);
    modes.push_back(available);
    json list = json::array();
    for (int n : modes) list.push_back(n);
    cfg["modes"] = list;
  }
  const PodSplittingSolver solver(c.problem, basis);
  std::ostringstream csv;
  csv << "modes,relative_error,energy_ratio\n";
  for (int n : modes) {
    require(n >= 1 && n <= available, ErrorKind::Config,
            "mode count " + std::to_string(n) + " outside [1, " + std::to_string(available) + "]");
    const double err = complex_rel_error(solver.solve(c.u0, n), reference);
    const double rho = energy_ratio(basis, n);
    csv << n << "," << fmt(err) << "," << fmt(rho) << "\n";
    std::printf("basis type %d  N %5d  relative error %.6e  rho %.8f\n", type, n, err, rho);
    std::fflush(stdout);
  }
  write_text(out / "error_vs_modes.csv", csv.str());
}

void run_ablate(json& cfg, const fs::path& out) {
  const AblationAxis axis = parse_ablation_axis(get<std::string>(cfg, "axis"));
  std::vector<double> values;
  for (const auto& v : cfg["values"]) values.push_back(v.get<double>());
  require(!values.empty(), ErrorKind::Config, "--values needs at least one entry");
  const int samples = get<int>(cfg, "samples");
  ExperimentSpec base = experiment_from(cfg, static_cast<std::size_t>(samples));
  base.data.family = get<std::string>(cfg, "family");
  base.data.n = get<int>(cfg, "grid");
  base.data.seed = get<std::uint64_t>(cfg, "seed");
  base.data.steps = get<int>(cfg, "steps");
  base.data.T = get<double>(cfg, "T");
  base.data.epsilon_pool = get<int>(cfg, "epsilon_pool");
  base.data.validate();
  const std::vector<AblationRow> rows = ablation_sweep(axis, values, base);
  write_ablation_csv((out / "ablation.csv").string(), axis, rows);
  for (const auto& r : rows) std::printf("%s %g  test_error %.6e\n", to_string(axis).c_str(), r.value, r.test_error);
}

std::vector<Command> commands() {
  std::vector<Option> gen_common = {
      {"n", 1000, "number of samples"},
      {"grid", 64, "grid points per side"},
      {"seed", 0, "generator seed"},
      {"first_index", 0, "stream index of the first sample"},
  };
  std::vector<Option> gen_nls = gen_common;
  gen_nls.push_back({"steps", 1000, "Lie-Trotter time steps"});
  gen_nls.push_back({"T", 0.5, "final time"});
  gen_nls.push_back({"epsilon_pool", 30, "distinct epsilon values per seed"});
  std::vector<Option> gen_kp = gen_common;
  gen_kp.push_back({"steps", 1000, "ETDRK4 time steps"});
  gen_kp.push_back({"T", 0.3, "final time"});
  gen_kp.push_back({"kp_epsilon", 0.02, "dispersion coefficient"});

  std::vector<Option> train_opts = model_options();
  train_opts.insert(train_opts.begin(), {{"dataset", "", "dataset file or directory"},
                                         {"basis", "", "precomputed basis (default: built from the training split)"}});

  const std::vector<Option> select = {
      {"checkpoint", "", "model checkpoint file or directory"},
      {"dataset", "", "dataset file or directory"},
      {"first", 0, "first sample"},
      {"count", -1, "number of samples (-1: to the end)"},
  };
  std::vector<Option> spectrum_opts = select;
  spectrum_opts.push_back({"split", 0.5, "fraction of the sorted prefix in the low band"});

  const std::vector<Option> nls_opts = {
      {"grid", 64, "grid points per side"},
      {"seed", 0, "initial-data seed"},
      {"index", 0, "sample index within the seed"},
      {"epsilon", nullptr, "nonlinearity exponent (default: drawn from the pool)"},
      {"epsilon_pool", 30, "pool size when epsilon is drawn"},
      {"steps", 1000, "time steps"},
      {"T", 0.5, "final time"},
  };
  std::vector<Option> pod_split_opts = nls_opts;
  pod_split_opts[0].def = 32;
  pod_split_opts.push_back({"basis_type", 2, "snapshot recipe 1, 2, or 3"});
  pod_split_opts.push_back({"modes", json::array(), "comma-separated mode counts (default: powers of two)"});

  std::vector<Option> ablate_opts = model_options();
  ablate_opts.insert(ablate_opts.begin(), {{"axis", "modes", "modes, snapshots, resolution, or timesteps"},
                                           {"values", json::array(), "comma-separated axis values"},
                                           {"family", "nls", "darcy, nls, or kp"},
                                           {"grid", 64, "grid points per side"},
                                           {"samples", 1000, "samples to generate (train + test)"},
                                           {"steps", 1000, "solver time steps"},
                                           {"T", 0.0, "final time (0: family default)"},
                                           {"epsilon_pool", 30, "nls epsilon pool size"}});

  return {
      {"gen-darcy", "generate Darcy permeability/pressure pairs", gen_common, generate_handler("darcy")},
      {"gen-nls", "generate NLS initial data/solution pairs with epsilon", gen_nls, generate_handler("nls")},
      {"gen-kp", "generate KP initial data/solution pairs", gen_kp, generate_handler("kp")},
      {"pod-basis",
       "compute a POD basis from a dataset",
       {{"dataset", "", "dataset file or directory"},
        {"modes", 144, "number of modes N"},
        {"snapshot_fraction", 1.0, "fraction of samples used as snapshots"}},
       run_pod_basis},
      {"train", "train a PODNO or FNO model", train_opts, run_train},
      {"eval", "evaluate a checkpoint on a dataset", select, run_eval},
      {"predict", "write model predictions for a dataset", select, run_predict},
      {"spectrum", "per-mode Fourier error spectrum of predictions", spectrum_opts, run_spectrum},
      {"split-solve", "solve one NLS sample with FFT Lie-Trotter splitting", nls_opts, run_split_solve},
      {"pod-split-solve", "POD-accelerated splitting error against the FFT reference", pod_split_opts,
       run_pod_split_solve},
      {"ablate", "retrain across values of one axis", ablate_opts, run_ablate},
  };
}

void report_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Spectral neural operator lab: data generation, POD bases, PODNO/FNO training, diagnostics"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  const std::vector<Command> cmds = commands();
  struct Bound {
    CLI::App* sub;
    std::string config;
    std::string out = "out";
    json overrides = json::object();
  };
  std::vector<Bound> bound(cmds.size());
  for (std::size_t c = 0; c < cmds.size(); ++c) {
    Bound& b = bound[c];
    b.sub = app.add_subcommand(cmds[c].name, cmds[c].description);
    b.sub->add_option("--config", b.config, "JSON config or run manifest to replay");
    b.sub->add_option("--out", b.out, "output directory")->capture_default_str();
    for (const auto& o : cmds[c].options) {
      const std::string key = o.key;
      const json def = o.def;
      json* overrides = &b.overrides;
      std::string help = o.help;
      if (!def.is_null() && !(def.is_string() && def.get<std::string>().empty())) help += " [" + def.dump() + "]";
      b.sub->add_option_function<std::string>(
          flag_name(key), [overrides, key, def](const std::string& v) { (*overrides)[key] = parse_flag(def, key, v); },
          help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return 2;
  } catch (const Error& e) {
    report_error(std::string(to_string(e.kind())), e.what());
    return 2;
  }

  for (std::size_t c = 0; c < cmds.size(); ++c) {
    if (!bound[c].sub->parsed()) continue;
    try {
      json cfg = resolve_config(cmds[c], bound[c].config, bound[c].overrides);
      const fs::path out(bound[c].out);
      fs::create_directories(out);
      cmds[c].run(cfg, out);
      const json manifest = {{"command", cmds[c].name},
                             {"config", cfg},
                             {"version", kVersion},
                             {"format_version", kFormatVersion},
                             {"schema_version", kSchemaVersion}};
      write_text(out / "run_manifest.json", manifest.dump(2) + "\n");
      return 0;
    } catch (const Error& e) {
      report_error(std::string(to_string(e.kind())), e.what());
      return 1;
    } catch (const fs::filesystem_error& e) {
      report_error("io", e.what());
      return 1;
    } catch (const std::exception& e) {
      report_error("internal", e.what());
      return 1;
    }
  }
  return 2;
}

}  // namespace podnolab
