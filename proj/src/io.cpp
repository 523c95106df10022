#include "podnolab/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <zlib.h>

namespace podnolab {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + 4);
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + 8);
}

template <typename T>
T get(const std::vector<std::uint8_t>& buf, std::size_t pos) {
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  return v;
}

std::uint32_t crc(const std::vector<std::uint8_t>& payload) {
  return static_cast<std::uint32_t>(crc32_z(0L, payload.data(), payload.size()));
}

const Section& find(const std::vector<Section>& sections, const std::string& tag, const std::string& path) {
  for (const auto& s : sections) {
    if (s.tag == tag) return s;
  }
  throw Error(ErrorKind::SizeMismatch, path + ": missing section " + tag);
}

Section json_section(const std::string& tag, const nlohmann::json& j) {
  const std::string text = j.dump(2);
  return {tag, std::vector<std::uint8_t>(text.begin(), text.end())};
}

nlohmann::json parse_json_section(const Section& s, const std::string& path) {
  try {
    return nlohmann::json::parse(s.payload.begin(), s.payload.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, path + ": malformed manifest: " + e.what());
  }
}

void check_schema(const nlohmann::json& m, const std::string& path) {
  const int v = m.value("schema_version", -1);
  require(v == static_cast<int>(kSchemaVersion), ErrorKind::VersionMismatch,
          path + ": schema version " + std::to_string(v) + ", expected " + std::to_string(kSchemaVersion));
}

void expect_doubles(const Section& s, std::size_t count, const std::string& path) {
  require(s.payload.size() == count * sizeof(double), ErrorKind::SizeMismatch,
          path + ": section " + s.tag + " holds " + std::to_string(s.payload.size()) + " bytes, expected " +
              std::to_string(count * sizeof(double)));
}

}  // namespace

void write_container(const std::string& path, const std::string& magic, const std::vector<Section>& sections) {
  require(magic.size() == 4, ErrorKind::InvalidArgument, "container magic must be four bytes");
  std::vector<std::uint8_t> buf(magic.begin(), magic.end());
  put_u32(buf, kFormatVersion);
  put_u32(buf, static_cast<std::uint32_t>(sections.size()));
  for (const auto& s : sections) {
    require(s.tag.size() == 4, ErrorKind::InvalidArgument, "section tag must be four bytes");
    buf.insert(buf.end(), s.tag.begin(), s.tag.end());
    put_u64(buf, s.payload.size());
    buf.insert(buf.end(), s.payload.begin(), s.payload.end());
    put_u32(buf, crc(s.payload));
  }
  // Write beside the target and rename so readers never see a partial file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open " + tmp + " for writing");
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    require(static_cast<bool>(out), ErrorKind::Io, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorKind::Io, "cannot move " + tmp + " to " + path + ": " + ec.message());
}

std::vector<Section> read_container(const std::string& path, const std::string& magic) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path);
  const std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(buf.size() >= 12, ErrorKind::SizeMismatch, path + ": file too short for a container header");
  require(std::equal(magic.begin(), magic.end(), buf.begin()), ErrorKind::Io,
          path + ": not a " + magic + " container");
  const std::uint32_t version = get<std::uint32_t>(buf, 4);
  require(version == kFormatVersion, ErrorKind::VersionMismatch,
          path + ": format version " + std::to_string(version) + ", expected " + std::to_string(kFormatVersion));
  const std::uint32_t count = get<std::uint32_t>(buf, 8);
  std::vector<Section> sections;
  std::size_t pos = 12;
  for (std::uint32_t k = 0; k < count; ++k) {
    require(buf.size() - pos >= 12, ErrorKind::SizeMismatch, path + ": truncated section header");
    Section s;
    s.tag.assign(buf.begin() + pos, buf.begin() + pos + 4);
    const std::uint64_t len = get<std::uint64_t>(buf, pos + 4);
    pos += 12;
    require(buf.size() - pos >= 4 && len <= buf.size() - pos - 4, ErrorKind::SizeMismatch,
            path + ": section " + s.tag + " is truncated");
    s.payload.assign(buf.begin() + pos, buf.begin() + pos + len);
    pos += len;
    const std::uint32_t stored = get<std::uint32_t>(buf, pos);
    pos += 4;
    require(stored == crc(s.payload), ErrorKind::ChecksumFailure, path + ": checksum mismatch in section " + s.tag);
    sections.push_back(std::move(s));
  }
  require(pos == buf.size(), ErrorKind::SizeMismatch, path + ": trailing bytes after the last section");
  return sections;
}

std::vector<std::uint8_t> pack_doubles(const double* data, std::size_t count) {
  std::vector<std::uint8_t> out(count * sizeof(double));
  if (count > 0) std::memcpy(out.data(), data, out.size());
  return out;
}

std::vector<double> unpack_doubles(const Section& s) {
  require(s.payload.size() % sizeof(double) == 0, ErrorKind::SizeMismatch,
          "section " + s.tag + " length is not a multiple of 8");
  std::vector<double> out(s.payload.size() / sizeof(double));
  if (!out.empty()) std::memcpy(out.data(), s.payload.data(), s.payload.size());
  return out;
}

nlohmann::json grid_to_json(const Grid2D& g) {
  const Bounds& b = g.bounds();
  return {{"nx", g.nx()}, {"ny", g.ny()}, {"bounds", {b.x_min, b.x_max, b.y_min, b.y_max}}, {"periodic", g.periodic()}};
}

Grid2D grid_from_json(const nlohmann::json& j) {
  try {
    const auto& b = j.at("bounds");
    return make_grid(j.at("nx").get<int>(), j.at("ny").get<int>(),
                     {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()},
                     j.at("periodic").get<bool>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("bad grid descriptor: ") + e.what());
  }
}

nlohmann::json config_to_json(const GsoConfig& cfg) {
  nlohmann::json j;
  j["width"] = cfg.width;
  j["layers"] = cfg.layers;
  j["kernel"] = cfg.kernel == KernelKind::Fourier ? "fourier" : "pod";
  j["modes"] = {cfg.modes.mx, cfg.modes.my};
  j["pod_modes"] = cfg.pod_modes;
  j["in_channels"] = cfg.in_channels;
  j["out_channels"] = cfg.out_channels;
  j["coordinates"] = cfg.coordinates;
  j["use_epsilon"] = cfg.use_epsilon;
  j["activation"] = "gelu";
  j["input_shift"] = cfg.input_shift;
  j["input_scale"] = cfg.input_scale;
  j["output_shift"] = cfg.output_shift;
  j["output_scale"] = cfg.output_scale;
  return j;
}

GsoConfig config_from_json(const nlohmann::json& j) {
  try {
    GsoConfig cfg;
    cfg.width = j.at("width").get<int>();
    cfg.layers = j.at("layers").get<int>();
    const std::string kernel = j.at("kernel").get<std::string>();
    require(kernel == "fourier" || kernel == "pod", ErrorKind::Config, "unknown kernel '" + kernel + "'");
    cfg.kernel = kernel == "fourier" ? KernelKind::Fourier : KernelKind::Pod;
    cfg.modes = ModeSet{j.at("modes").at(0).get<int>(), j.at("modes").at(1).get<int>()};
    cfg.pod_modes = j.at("pod_modes").get<int>();
    cfg.in_channels = j.at("in_channels").get<int>();
    cfg.out_channels = j.at("out_channels").get<int>();
    cfg.coordinates = j.at("coordinates").get<bool>();
    cfg.use_epsilon = j.at("use_epsilon").get<bool>();
    cfg.input_shift = j.value("input_shift", std::vector<double>{});
    cfg.input_scale = j.value("input_scale", std::vector<double>{});
    cfg.output_shift = j.value("output_shift", std::vector<double>{});
    cfg.output_scale = j.value("output_scale", std::vector<double>{});
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("bad model config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Datasets

void save_dataset(const std::string& path, const Dataset& data) {
  data.validate();
  nlohmann::json m;
  m["schema_version"] = kSchemaVersion;
  m["family"] = data.family;
  m["grid"] = grid_to_json(data.grid);
  m["samples"] = data.size();
  m["in_channels"] = data.in_channels();
  m["out_channels"] = data.out_channels();
  m["has_epsilon"] = data.has_epsilon();
  m["layout"] = "[sample, channel, y, x]";
  m["generator"] = nlohmann::json::parse(data.manifest.empty() ? "{}" : data.manifest);

  auto pack_fields = [](const std::vector<Field>& fields) {
    std::vector<std::uint8_t> out;
    for (const auto& f : fields) {
      const auto bytes = pack_doubles(f.values().data(), f.values().size());
      out.insert(out.end(), bytes.begin(), bytes.end());
    }
    return out;
  };
  std::vector<Section> sections{json_section("MANI", m), {"INPT", pack_fields(data.inputs)},
                                {"OUTP", pack_fields(data.outputs)}};
  if (data.has_epsilon()) sections.push_back({"EPSV", pack_doubles(data.epsilons.data(), data.epsilons.size())});
  write_container(path, "PDT1", sections);
}

Dataset load_dataset(const std::string& path) {
  const auto sections = read_container(path, "PDT1");
  const nlohmann::json m = parse_json_section(find(sections, "MANI", path), path);
  check_schema(m, path);
  Dataset data;
  std::size_t samples = 0;
  int cin = 0, cout = 0;
  bool has_eps = false;
  try {
    data.family = m.at("family").get<std::string>();
    data.grid = grid_from_json(m.at("grid"));
    samples = m.at("samples").get<std::size_t>();
    cin = m.at("in_channels").get<int>();
    cout = m.at("out_channels").get<int>();
    has_eps = m.at("has_epsilon").get<bool>();
    data.manifest = m.value("generator", nlohmann::json::object()).dump();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, path + ": incomplete manifest: " + e.what());
  }
  require(samples > 0, ErrorKind::EmptyDataset, path + ": manifest declares zero samples");
  require(cin >= 1 && cout >= 1, ErrorKind::Io, path + ": channel counts must be positive");
  const std::size_t plane = data.grid.size();
  const Section& in = find(sections, "INPT", path);
  const Section& out = find(sections, "OUTP", path);
  expect_doubles(in, samples * cin * plane, path);
  expect_doubles(out, samples * cout * plane, path);
  const std::vector<double> a = unpack_doubles(in);
  const std::vector<double> u = unpack_doubles(out);
  for (std::size_t j = 0; j < samples; ++j) {
    data.inputs.emplace_back(data.grid, cin, std::vector<double>(a.begin() + j * cin * plane, a.begin() + (j + 1) * cin * plane));
    data.outputs.emplace_back(data.grid, cout,
                              std::vector<double>(u.begin() + j * cout * plane, u.begin() + (j + 1) * cout * plane));
  }
  if (has_eps) {
    const Section& e = find(sections, "EPSV", path);
    expect_doubles(e, samples, path);
    data.epsilons = unpack_doubles(e);
  }
  return data;
}

// ---------------------------------------------------------------------------
// Bases and checkpoints

namespace {

nlohmann::json basis_json(const PodBasis& b) {
  return {{"grid", grid_to_json(b.grid)},
          {"nmesh", b.nmesh()},
          {"modes", b.size()},
          {"sigma_count", b.sigma.size()},
          {"snapshot_count", b.snapshot_count},
          {"degenerate", b.degenerate}};
}

void append_basis_sections(std::vector<Section>& sections, const PodBasis& b) {
  sections.push_back({"BMOD", pack_doubles(b.modes.data(), static_cast<std::size_t>(b.modes.size()))});
  sections.push_back({"BSIG", pack_doubles(b.sigma.data(), b.sigma.size())});
}

PodBasis read_basis(const std::vector<Section>& sections, const nlohmann::json& j, const std::string& path) {
  PodBasis b;
  std::size_t nmesh = 0, modes = 0, sigma_count = 0;
  try {
    b.grid = grid_from_json(j.at("grid"));
    nmesh = j.at("nmesh").get<std::size_t>();
    modes = j.at("modes").get<std::size_t>();
    sigma_count = j.at("sigma_count").get<std::size_t>();
    b.snapshot_count = j.at("snapshot_count").get<int>();
    b.degenerate = j.at("degenerate").get<std::vector<bool>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, path + ": incomplete basis descriptor: " + e.what());
  }
  require(nmesh == b.grid.size() && b.degenerate.size() == modes, ErrorKind::SizeMismatch,
          path + ": basis descriptor is inconsistent");
  const Section& ms = find(sections, "BMOD", path);
  const Section& ss = find(sections, "BSIG", path);
  expect_doubles(ms, nmesh * modes, path);
  expect_doubles(ss, sigma_count, path);
  const std::vector<double> m = unpack_doubles(ms);
  b.modes = Eigen::Map<const Eigen::MatrixXd>(m.data(), static_cast<Eigen::Index>(nmesh), static_cast<Eigen::Index>(modes));
  b.sigma = unpack_doubles(ss);
  return b;
}

}  // namespace

void save_basis(const std::string& path, const PodBasis& basis) {
  nlohmann::json m;
  m["schema_version"] = kSchemaVersion;
  m["kind"] = "basis";
  m["basis"] = basis_json(basis);
  std::vector<Section> sections{json_section("MANI", m)};
  append_basis_sections(sections, basis);
  write_container(path, "CKP1", sections);
}

PodBasis load_basis(const std::string& path) {
  const auto sections = read_container(path, "CKP1");
  const nlohmann::json m = parse_json_section(find(sections, "MANI", path), path);
  check_schema(m, path);
  require(m.contains("basis"), ErrorKind::Io, path + ": file carries no POD basis");
  return read_basis(sections, m.at("basis"), path);
}

void save_checkpoint(const std::string& path, const GsoModel& model, const AdamState* adam, const nlohmann::json& extra) {
  nlohmann::json m;
  m["schema_version"] = kSchemaVersion;
  m["kind"] = "checkpoint";
  m["config"] = config_to_json(model.config());
  m["grid"] = grid_to_json(model.grid());
  nlohmann::json table = nlohmann::json::array();
  for (const auto& e : model.params().table()) {
    table.push_back({{"name", e.name}, {"shape", e.shape}, {"offset", e.offset * sizeof(double)}, {"bytes", e.size * sizeof(double)}});
  }
  m["params"] = table;
  m["extra"] = extra;
  const bool has_adam = adam != nullptr && adam->m.size() == model.params().size();
  if (has_adam) m["adam"] = {{"step", adam->step}, {"epoch", adam->epoch}};
  const bool has_basis = model.config().kernel == KernelKind::Pod && model.basis();
  if (has_basis) m["basis"] = basis_json(*model.basis());

  std::vector<Section> sections{json_section("MANI", m),
                                {"PARM", pack_doubles(model.params().values().data(), model.params().size())}};
  if (has_adam) {
    sections.push_back({"ADAM", pack_doubles(adam->m.data(), adam->m.size())});
    sections.push_back({"ADAV", pack_doubles(adam->v.data(), adam->v.size())});
  }
  if (has_basis) append_basis_sections(sections, *model.basis());
  write_container(path, "CKP1", sections);
}

Checkpoint load_checkpoint(const std::string& path) {
  const auto sections = read_container(path, "CKP1");
  const nlohmann::json m = parse_json_section(find(sections, "MANI", path), path);
  check_schema(m, path);
  require(m.value("kind", "") == "checkpoint", ErrorKind::Io, path + ": not a model checkpoint");
  const GsoConfig cfg = config_from_json(m.at("config"));
  const Grid2D grid = grid_from_json(m.at("grid"));
  std::shared_ptr<const PodBasis> basis;
  if (m.contains("basis")) basis = std::make_shared<PodBasis>(read_basis(sections, m.at("basis"), path));

  Checkpoint ck;
  ck.model = std::make_unique<GsoModel>(cfg, grid, basis);
  ck.extra = m.value("extra", nlohmann::json::object());
  const auto& expected = ck.model->params().table();
  const auto& table = m.at("params");
  require(table.size() == expected.size(), ErrorKind::SizeMismatch, path + ": parameter table length differs from config");
  std::size_t next = 0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const auto& t = table[k];
    require(t.at("name").get<std::string>() == expected[k].name &&
                t.at("shape").get<std::vector<int>>() == expected[k].shape,
            ErrorKind::SizeMismatch, path + ": parameter " + expected[k].name + " does not match the config");
    // Byte ranges must tile the parameter section with no gaps or overlaps.
    require(t.at("offset").get<std::size_t>() == next && t.at("bytes").get<std::size_t>() == expected[k].size * sizeof(double),
            ErrorKind::SizeMismatch, path + ": parameter table byte ranges are not contiguous");
    next += expected[k].size * sizeof(double);
  }
  const Section& parm = find(sections, "PARM", path);
  require(parm.payload.size() == next, ErrorKind::SizeMismatch, path + ": parameter section size differs from table");
  {
    const std::vector<double> parm_values = unpack_doubles(parm);
    ck.model->params().values().assign(parm_values.begin(), parm_values.end());
  }

  if (m.contains("adam")) {
    const Section& am = find(sections, "ADAM", path);
    const Section& av = find(sections, "ADAV", path);
    expect_doubles(am, ck.model->params().size(), path);
    expect_doubles(av, ck.model->params().size(), path);
    ck.adam.m = unpack_doubles(am);
    ck.adam.v = unpack_doubles(av);
    ck.adam.step = m["adam"].at("step").get<long>();
    ck.adam.epoch = m["adam"].at("epoch").get<int>();
  }
  return ck;
}

}  // namespace podnolab
