#include "podnolab/dataset.hpp"

#include <string>

namespace podnolab {

void Dataset::validate() const {
  require(!inputs.empty(), ErrorKind::EmptyDataset, "dataset has no samples");
  require(inputs.size() == outputs.size(), ErrorKind::SizeMismatch, "dataset inputs and outputs differ in count");
  require(epsilons.empty() || epsilons.size() == inputs.size(), ErrorKind::SizeMismatch,
          "dataset epsilon list length differs from sample count");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    require(inputs[i].grid() == grid && outputs[i].grid() == grid, ErrorKind::ShapeMismatch,
            "sample " + std::to_string(i) + " is on a different grid");
    require(inputs[i].channels() == in_channels() && outputs[i].channels() == out_channels(), ErrorKind::ShapeMismatch,
            "sample " + std::to_string(i) + " has inconsistent channel counts");
    require(inputs[i].is_finite() && outputs[i].is_finite(), ErrorKind::NumericalBlowup,
            "sample " + std::to_string(i) + " has non-finite values");
  }
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  require(begin <= end && end <= size(), ErrorKind::InvalidArgument, "dataset slice out of range");
  Dataset out;
  out.family = family;
  out.grid = grid;
  out.manifest = manifest;
  out.inputs.assign(inputs.begin() + begin, inputs.begin() + end);
  out.outputs.assign(outputs.begin() + begin, outputs.begin() + end);
  if (!epsilons.empty()) out.epsilons.assign(epsilons.begin() + begin, epsilons.begin() + end);
  return out;
}

}  // namespace podnolab
