#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "podnolab/grid.hpp"

namespace podnolab {

// Input/output pairs on one grid, with an optional global parameter per
// sample. The manifest is the generator's JSON description, kept verbatim.
struct Dataset {
  std::string family;  // "darcy", "nls", "kp", or free-form
  Grid2D grid;
  std::vector<Field> inputs;
  std::vector<Field> outputs;
  std::vector<double> epsilons;  // empty or one per sample
  std::string manifest = "{}";

  std::size_t size() const { return inputs.size(); }
  bool has_epsilon() const { return !epsilons.empty(); }
  double epsilon(std::size_t i) const { return epsilons.empty() ? 0.0 : epsilons[i]; }
  int in_channels() const { return inputs.empty() ? 0 : inputs.front().channels(); }
  int out_channels() const { return outputs.empty() ? 0 : outputs.front().channels(); }

  // Checks pairing, grids, channel counts, and finiteness.
  void validate() const;
  // Samples [begin, end).
  Dataset slice(std::size_t begin, std::size_t end) const;
};

}  // namespace podnolab
