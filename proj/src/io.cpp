// ----------------------------------------------------------------------------
// Copyright 2026 The shapeprior Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#include "shapeprior/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "shapeprior/error.hpp"

namespace shapeprior {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVolumeMagic = "SEGV1";
constexpr const char* kCheckpointMagic = "SPCK1";
constexpr std::size_t kMaxVoxels = std::size_t{1} << 31;

// Reads one '\n'-terminated line of at most kMaxHeaderBytes.
std::string read_header_line(std::istream& is) {
  std::string line;
  char c = 0;
  while (is.get(c)) {
    if (c == '\n') return line;
    if (line.size() >= kMaxHeaderBytes) {
      throw FormatError(FormatIssue::missing_header, "no newline within the first " + std::to_string(kMaxHeaderBytes) +
                                                         " bytes");
    }
    line.push_back(c);
  }
  if (line.empty()) throw FormatError(FormatIssue::missing_header, "file is empty");
  throw FormatError(FormatIssue::missing_header, "header line is not newline-terminated");
}

Json parse_header(const std::string& line) {
  if (line.empty()) throw FormatError(FormatIssue::missing_header, "header line is empty");
  Json j = Json::parse(line, nullptr, false);
  if (j.is_discarded()) throw FormatError(FormatIssue::header_not_json, "cannot parse header");
  if (!j.is_object()) throw FormatError(FormatIssue::header_not_json, "header must be a JSON object");
  return j;
}

void check_magic(const Json& header, const char* expected) {
  const auto it = header.find("magic");
  if (it == header.end()) throw FormatError(FormatIssue::bad_magic, std::string("missing, expected ") + expected);
  if (!it->is_string() || it->get<std::string>() != expected) {
    throw FormatError(FormatIssue::bad_magic, "got " + it->dump() + ", expected \"" + expected + "\"");
  }
}

// Reads exactly n bytes; any shortfall or trailing data is a length mismatch.
std::vector<char> read_payload(std::istream& is, std::size_t n) {
  std::vector<char> buf(n);
  is.read(buf.data(), static_cast<std::streamsize>(n));
  const auto got = static_cast<std::size_t>(is.gcount());
  if (got != n) {
    throw FormatError(FormatIssue::payload_length_mismatch,
                      "expected " + std::to_string(n) + " bytes, found " + std::to_string(got));
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw FormatError(FormatIssue::payload_length_mismatch, "trailing bytes after " + std::to_string(n) + " payload bytes");
  }
  return buf;
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

double get_f64(const char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return std::bit_cast<double>(bits);
}

Json descriptor_json(const ArchitectureDescriptor& a) {
  return Json{{"n_class", a.n_class},
              {"latent_dim", a.latent_dim},
              {"n_layers", a.n_layers},
              {"skip_layer", a.skip_layer},
              {"hidden_width", a.hidden_width}};
}

ArchitectureDescriptor descriptor_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError(FormatIssue::descriptor_mismatch, "descriptor must be an object");
  ArchitectureDescriptor a;
  auto field = [&](const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) {
      throw FormatError(FormatIssue::descriptor_mismatch, std::string("descriptor field '") + key + "' missing or not an integer");
    }
    return it->get<int>();
  };
  a.n_class = field("n_class");
  a.latent_dim = field("latent_dim");
  a.n_layers = field("n_layers");
  a.skip_layer = field("skip_layer");
  a.hidden_width = field("hidden_width");
  try {
    validate(a);
  } catch (const Error& e) {
    throw FormatError(FormatIssue::descriptor_mismatch, e.what());
  }
  return a;
}

struct ArrayEntry {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t size() const {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
  }
};

// Array table implied by a descriptor and the latent ids, in payload order.
std::vector<ArrayEntry> expected_table(const ArchitectureDescriptor& a, const std::vector<std::string>& latent_ids) {
  const Mlp shape = init_model(a, 0).network;
  std::vector<ArrayEntry> table;
  for (std::size_t l = 0; l < shape.layers.size(); ++l) {
    const auto& layer = shape.layers[l];
    table.push_back({"layer" + std::to_string(l) + ".weights",
                     {static_cast<std::size_t>(layer.weights.rows()), static_cast<std::size_t>(layer.weights.cols())}});
    table.push_back({"layer" + std::to_string(l) + ".biases", {static_cast<std::size_t>(layer.biases.size())}});
  }
  for (std::size_t i = 0; i < latent_ids.size(); ++i) {
    table.push_back({"latent." + std::to_string(i), {static_cast<std::size_t>(a.latent_dim)}});
  }
  return table;
}

}  // namespace

// ---------------------------------------------------------------------------

void write_volume(std::ostream& os, const LabelVolume& v) {
  const auto& d = v.dims();
  const auto& s = v.spacing();
  Json header;
  header["magic"] = kVolumeMagic;
  header["dims"] = {d.nx, d.ny, d.nz};
  header["spacing_mm"] = {s.sx, s.sy, s.sz};
  header["n_class"] = v.n_class();
  os << header.dump() << '\n';
  const auto labels = v.labels();
  os.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
  if (!os) throw IoError("failed to write volume payload");
}

LabelVolume read_volume(std::istream& is) {
  const Json h = parse_header(read_header_line(is));
  check_magic(h, kVolumeMagic);

  const auto dims_it = h.find("dims");
  if (dims_it == h.end() || !dims_it->is_array() || dims_it->size() != 3) {
    throw FormatError(FormatIssue::bad_dims, "expected an array of 3 positive integers");
  }
  std::array<long long, 3> n{};
  for (int a = 0; a < 3; ++a) {
    const auto& e = (*dims_it)[static_cast<std::size_t>(a)];
    if (!e.is_number_integer() || e.get<long long>() < 1 || e.get<long long>() > (1LL << 20)) {
      throw FormatError(FormatIssue::bad_dims, "entry " + std::to_string(a) + " is " + e.dump());
    }
    n[static_cast<std::size_t>(a)] = e.get<long long>();
  }
  const Dims dims{static_cast<int>(n[0]), static_cast<int>(n[1]), static_cast<int>(n[2])};
  if (static_cast<long double>(n[0]) * n[1] * n[2] > static_cast<long double>(kMaxVoxels)) {
    throw FormatError(FormatIssue::bad_dims, "voxel count exceeds " + std::to_string(kMaxVoxels));
  }

  const auto sp_it = h.find("spacing_mm");
  if (sp_it == h.end() || !sp_it->is_array() || sp_it->size() != 3) {
    throw FormatError(FormatIssue::bad_spacing, "expected an array of 3 positive numbers");
  }
  std::array<double, 3> sp{};
  for (int a = 0; a < 3; ++a) {
    const auto& e = (*sp_it)[static_cast<std::size_t>(a)];
    if (!e.is_number() || !(e.get<double>() > 0.0) || !std::isfinite(e.get<double>())) {
      throw FormatError(FormatIssue::bad_spacing, "entry " + std::to_string(a) + " is " + e.dump());
    }
    sp[static_cast<std::size_t>(a)] = e.get<double>();
  }

  const auto nc_it = h.find("n_class");
  if (nc_it == h.end() || !nc_it->is_number_integer() || nc_it->get<long long>() < 1 || nc_it->get<long long>() > 256) {
    throw FormatError(FormatIssue::bad_n_class, "expected an integer in [1, 256], got " +
                                                    (nc_it == h.end() ? std::string("nothing") : nc_it->dump()));
  }
  const int n_class = nc_it->get<int>();

  const auto raw = read_payload(is, dims.voxel_count());
  std::vector<std::uint8_t> labels(raw.size());
  for (std::size_t v = 0; v < raw.size(); ++v) {
    labels[v] = static_cast<std::uint8_t>(raw[v]);
    if (labels[v] >= n_class) {
      throw FormatError(FormatIssue::label_out_of_range, "byte " + std::to_string(v) + " holds label " +
                                                             std::to_string(labels[v]) + " >= n_class " +
                                                             std::to_string(n_class));
    }
  }
  return LabelVolume(dims, Spacing{sp[0], sp[1], sp[2]}, n_class, std::move(labels));
}

void write_volume_file(const fs::path& path, const LabelVolume& volume) {
  std::ostringstream os(std::ios::binary);
  write_volume(os, volume);
  write_text_file(path, os.str());
}

LabelVolume read_volume_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open volume '" + path.string() + "'");
  try {
    return read_volume(in);
  } catch (const FormatError& e) {
    throw FormatError(e.issue(), e.detail() + " (" + path.string() + ")");
  }
}

// ---------------------------------------------------------------------------

void write_checkpoint(std::ostream& os, const Checkpoint& ck) {
  const auto& arch = ck.params.arch;
  validate_mlp(ck.params.network);
  std::vector<std::string> ids;
  for (const auto& code : ck.latents.codes()) {
    if (code.values.size() != arch.latent_dim) throw StructuralError("checkpoint: latent '" + code.shape_id + "' has wrong length");
    ids.push_back(code.shape_id);
  }
  const auto table = expected_table(arch, ids);

  std::string payload;
  for (const auto& layer : ck.params.network.layers) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) put_f64(payload, layer.weights(r, c));
    }
    for (Eigen::Index r = 0; r < layer.biases.size(); ++r) put_f64(payload, layer.biases(r));
  }
  for (const auto& code : ck.latents.codes()) {
    for (Eigen::Index r = 0; r < code.values.size(); ++r) put_f64(payload, code.values(r));
  }
  std::size_t expected = 0;
  for (const auto& e : table) expected += e.size();
  if (payload.size() != expected * 8) throw StructuralError("checkpoint: network does not match its descriptor");

  Json header;
  header["magic"] = kCheckpointMagic;
  header["descriptor"] = descriptor_json(arch);
  header["byte_order"] = "little";
  header["dtype"] = "float64";
  header["layout"] = "row_major";
  Json arrays = Json::array();
  for (const auto& e : table) arrays.push_back(Json{{"name", e.name}, {"shape", e.shape}});
  header["arrays"] = std::move(arrays);
  header["latents"] = ids;
  header["manifest"] = ck.manifest;
  header["payload_bytes"] = payload.size();
  os << header.dump() << '\n';
  os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!os) throw IoError("failed to write checkpoint payload");
}

Checkpoint read_checkpoint(std::istream& is) {
  const Json h = parse_header(read_header_line(is));
  check_magic(h, kCheckpointMagic);
  const auto desc_it = h.find("descriptor");
  if (desc_it == h.end()) throw FormatError(FormatIssue::descriptor_mismatch, "descriptor missing");
  const ArchitectureDescriptor arch = descriptor_from_json(*desc_it);

  auto require_string = [&](const char* key, const char* value) {
    const auto it = h.find(key);
    if (it == h.end() || !it->is_string() || it->get<std::string>() != value) {
      throw FormatError(FormatIssue::bad_array_table, std::string("'") + key + "' must be \"" + value + "\"");
    }
  };
  require_string("byte_order", "little");
  require_string("dtype", "float64");
  require_string("layout", "row_major");

  std::vector<std::string> ids;
  const auto lat_it = h.find("latents");
  if (lat_it == h.end() || !lat_it->is_array()) throw FormatError(FormatIssue::bad_array_table, "'latents' must be an array");
  for (const auto& e : *lat_it) {
    if (!e.is_string()) throw FormatError(FormatIssue::bad_array_table, "latent ids must be strings");
    ids.push_back(e.get<std::string>());
  }
  const auto table = expected_table(arch, ids);

  const auto arr_it = h.find("arrays");
  if (arr_it == h.end() || !arr_it->is_array()) throw FormatError(FormatIssue::bad_array_table, "'arrays' must be an array");
  if (arr_it->size() != table.size()) {
    throw FormatError(FormatIssue::bad_array_table, "declares " + std::to_string(arr_it->size()) + " arrays, descriptor implies " +
                                                        std::to_string(table.size()));
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& e = (*arr_it)[i];
    const bool ok = e.is_object() && e.contains("name") && e.contains("shape") && e["name"].is_string() &&
                    e["shape"].is_array();
    if (!ok) throw FormatError(FormatIssue::bad_array_table, "entry " + std::to_string(i) + " is malformed");
    std::vector<std::size_t> shape;
    for (const auto& s : e["shape"]) {
      if (!s.is_number_unsigned()) throw FormatError(FormatIssue::bad_array_table, "entry " + std::to_string(i) + " has a bad shape");
      shape.push_back(s.get<std::size_t>());
    }
    if (e["name"].get<std::string>() != table[i].name || shape != table[i].shape) {
      throw FormatError(FormatIssue::bad_array_table, "entry " + std::to_string(i) + " (" + e.dump() +
                                                          ") does not match the descriptor, expected " + table[i].name);
    }
    total += table[i].size();
  }
  const auto pb_it = h.find("payload_bytes");
  if (pb_it == h.end() || !pb_it->is_number_unsigned() || pb_it->get<std::size_t>() != total * 8) {
    throw FormatError(FormatIssue::bad_array_table, "payload_bytes must equal " + std::to_string(total * 8));
  }

  const auto raw = read_payload(is, total * 8);
  const char* p = raw.data();
  auto next = [&] {
    const double v = get_f64(p);
    p += 8;
    if (!std::isfinite(v)) throw FormatError(FormatIssue::bad_array_table, "non-finite value in payload");
    return v;
  };

  Checkpoint ck;
  ck.params = init_model(arch, 0);
  for (auto& layer : ck.params.network.layers) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = next();
    }
    for (Eigen::Index r = 0; r < layer.biases.size(); ++r) layer.biases(r) = next();
  }
  for (const auto& id : ids) {
    LatentCode code{id, Vector(arch.latent_dim)};
    for (Eigen::Index r = 0; r < code.values.size(); ++r) code.values(r) = next();
    try {
      ck.latents.add(std::move(code));
    } catch (const Error& e) {
      throw FormatError(FormatIssue::bad_array_table, e.what());
    }
  }
  const auto man_it = h.find("manifest");
  if (man_it != h.end()) ck.manifest = *man_it;
  return ck;
}

void write_checkpoint_file(const fs::path& path, const Checkpoint& checkpoint) {
  std::ostringstream os(std::ios::binary);
  write_checkpoint(os, checkpoint);
  write_text_file(path, os.str());
}

Checkpoint read_checkpoint_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in);
}

void check_compatible(const ArchitectureDescriptor& arch, const LabelVolume& volume) {
  if (arch.n_class != volume.n_class()) {
    throw StructuralError("model descriptor has n_class " + std::to_string(arch.n_class) + " but the volume has n_class " +
                          std::to_string(volume.n_class()));
  }
}

void write_probability_file(const fs::path& path, const Matrix& probs, Dims dims) {
  validate_dims(dims);
  if (static_cast<std::size_t>(probs.cols()) != dims.voxel_count() || probs.rows() < 1) {
    throw StructuralError("probability grid does not match dims");
  }
  Json header;
  header["magic"] = "SPPG1";
  header["dims"] = {dims.nx, dims.ny, dims.nz};
  header["n_class"] = probs.rows();
  header["dtype"] = "float64";
  header["byte_order"] = "little";
  header["layout"] = "class_fastest";
  std::string out = header.dump() + "\n";
  out.reserve(out.size() + static_cast<std::size_t>(probs.size()) * 8);
  for (Eigen::Index v = 0; v < probs.cols(); ++v) {
    for (Eigen::Index c = 0; c < probs.rows(); ++c) put_f64(out, probs(c, v));
  }
  write_text_file(path, out);
}

Matrix read_probability_file(const fs::path& path, Dims* dims_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open probability grid '" + path.string() + "'");
  const Json h = parse_header(read_header_line(in));
  check_magic(h, "SPPG1");
  const auto d = h.find("dims");
  const auto n = h.find("n_class");
  if (d == h.end() || !d->is_array() || d->size() != 3) throw FormatError(FormatIssue::bad_dims, "expected 3 dims");
  Dims dims;
  try {
    dims = Dims{(*d)[0].get<int>(), (*d)[1].get<int>(), (*d)[2].get<int>()};
    validate_dims(dims);
  } catch (const std::exception& e) {
    throw FormatError(FormatIssue::bad_dims, e.what());
  }
  if (n == h.end() || !n->is_number_integer() || n->get<int>() < 1 || n->get<int>() > 256) {
    throw FormatError(FormatIssue::bad_n_class, "expected an integer in [1, 256]");
  }
  const auto rows = n->get<Eigen::Index>();
  const auto raw = read_payload(in, static_cast<std::size_t>(rows) * dims.voxel_count() * 8);
  Matrix probs(rows, static_cast<Eigen::Index>(dims.voxel_count()));
  const char* p = raw.data();
  for (Eigen::Index v = 0; v < probs.cols(); ++v) {
    for (Eigen::Index c = 0; c < rows; ++c, p += 8) probs(c, v) = get_f64(p);
  }
  if (dims_out) *dims_out = dims;
  return probs;
}

// ---------------------------------------------------------------------------

Json plan_to_json(const SlicePlan& plan) {
  Json out = Json::array();
  for (const auto& s : plan.slices) {
    if (s.kind == SliceSpecifier::Kind::absolute) {
      out.push_back(Json{{"kind", "absolute"}, {"value", static_cast<long long>(s.value)}});
    } else {
      const Json value = s.value == std::floor(s.value) ? Json(static_cast<long long>(s.value)) : Json(s.value);
      out.push_back(Json{{"kind", "percent"}, {"value", value}});
    }
  }
  return out;
}

SlicePlan plan_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("plan: expected a JSON array of {kind, value} objects");
  SlicePlan plan;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string where = "plan entry " + std::to_string(i);
    if (!e.is_object() || e.size() != 2 || !e.contains("kind") || !e.contains("value")) {
      throw ConfigError(where + ": expected exactly the keys 'kind' and 'value'");
    }
    if (!e["kind"].is_string()) throw ConfigError(where + ": 'kind' must be a string");
    if (!e["value"].is_number()) throw ConfigError(where + ": 'value' must be a number");
    const std::string kind = e["kind"].get<std::string>();
    const double value = e["value"].get<double>();
    SliceSpecifier s;
    if (kind == "absolute") {
      if (value != std::floor(value) || value < 0.0 || value > 1e9) {
        throw ConfigError(where + ": absolute value must be a non-negative integer");
      }
      s = SliceSpecifier::absolute(static_cast<int>(value));
    } else if (kind == "percent") {
      if (!(value >= 0.0 && value <= 100.0)) throw ConfigError(where + ": percent must be in [0, 100]");
      s = SliceSpecifier::percent(value);
    } else {
      throw ConfigError(where + ": unknown kind '" + kind + "'");
    }
    if (!plan.append(s)) throw ConfigError(where + ": duplicate specifier");
  }
  return plan;
}

void write_plan_file(const fs::path& path, const SlicePlan& plan) { write_text_file(path, plan_to_json(plan).dump(2) + "\n"); }

SlicePlan read_plan_file(const fs::path& path) {
  SlicePlan plan = plan_from_json(read_json_file(path));
  return plan;
}

// ---------------------------------------------------------------------------

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

Json parse_json(const std::string& text, const std::string& what) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError(what + ": not valid JSON");
  return j;
}

Json read_json_file(const fs::path& path) { return parse_json(read_text_file(path), path.string()); }

std::vector<fs::path> list_volumes(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".segv") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace shapeprior
