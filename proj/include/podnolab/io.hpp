#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "podnolab/dataset.hpp"
#include "podnolab/neuralop.hpp"
#include "podnolab/pod.hpp"
#include "podnolab/training.hpp"

namespace podnolab {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint32_t kSchemaVersion = 1;

// A container is a 4-byte magic, a u32 format version, a u32 section count,
// then sections of [4-byte tag | u64 length | payload | u32 CRC32(payload)].
// All integers and doubles are little-endian.
struct Section {
  std::string tag;  // exactly four characters
  std::vector<std::uint8_t> payload;
};

void write_container(const std::string& path, const std::string& magic, const std::vector<Section>& sections);
std::vector<Section> read_container(const std::string& path, const std::string& magic);

std::vector<std::uint8_t> pack_doubles(const double* data, std::size_t count);
std::vector<double> unpack_doubles(const Section& s);

nlohmann::json grid_to_json(const Grid2D& g);
Grid2D grid_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const GsoConfig& cfg);
GsoConfig config_from_json(const nlohmann::json& j);

// Dataset files use magic "PDT1".
void save_dataset(const std::string& path, const Dataset& data);
Dataset load_dataset(const std::string& path);

// Basis files and checkpoints use magic "CKP1"; a basis file is a
// checkpoint without parameters.
void save_basis(const std::string& path, const PodBasis& basis);
PodBasis load_basis(const std::string& path);

struct Checkpoint {
  std::unique_ptr<GsoModel> model;
  AdamState adam;
  nlohmann::json extra;  // free-form metadata stored with the model
};

void save_checkpoint(const std::string& path, const GsoModel& model, const AdamState* adam = nullptr,
                     const nlohmann::json& extra = nlohmann::json::object());
Checkpoint load_checkpoint(const std::string& path);

}  // namespace podnolab
