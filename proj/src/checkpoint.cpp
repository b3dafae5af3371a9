#include "instobj/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "instobj/errors.hpp"
#include "instobj/hash.hpp"
#include "json.hpp"

namespace instobj {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

std::uint64_t to_little_endian(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::little) {
    return bits;
  } else {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out = (out << 8) | ((bits >> (8 * i)) & 0xffu);
    return out;
  }
}

std::vector<unsigned char> to_blob(const Mlp& mlp) {
  std::vector<unsigned char> blob;
  blob.reserve(mlp.parameter_count() * sizeof(double));
  auto put = [&blob](double v) {
    const auto bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    unsigned char bytes[8];
    std::memcpy(bytes, &bits, 8);
    blob.insert(blob.end(), bytes, bytes + 8);
  };
  for (const auto& l : mlp.layers) {
    for (double w : l.weight) put(w);
    for (double b : l.bias) put(b);
  }
  return blob;
}

double get_double(const unsigned char* p) {
  std::uint64_t bits;
  std::memcpy(&bits, p, 8);
  return std::bit_cast<double>(to_little_endian(bits));
}

std::filesystem::path blob_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".bin";
  return p;
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::uint64_t parameter_checksum(const Mlp& mlp) {
  const auto blob = to_blob(mlp);
  return fnv1a64(std::span<const unsigned char>(blob));
}

void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path) {
  const auto blob = to_blob(cp.mlp);
  json j;
  j["format"] = "instobj-checkpoint";
  j["version"] = kFormatVersion;
  j["layer_sizes"] = cp.mlp.sizes;
  j["parameter_count"] = cp.mlp.parameter_count();
  j["blob"] = blob_path(path).filename().string();
  j["checksum_fnv1a64"] = to_hex(fnv1a64(std::span<const unsigned char>(blob)));
  j["norm"] = {{"in_min", cp.stats.in_min},
               {"in_max", cp.stats.in_max},
               {"f_max", cp.stats.f_max},
               {"degenerate", cp.stats.degenerate}};
  j["provenance"] = {{"face", cp.provenance.face},
                     {"seed", cp.provenance.seed},
                     {"data_hash", cp.provenance.data_hash},
                     {"epochs", cp.provenance.epochs},
                     {"best_epoch", cp.provenance.best_epoch}};

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(blob_path(path), std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + blob_path(path).string());
    out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<std::vector<int>> expected_sizes) {
  json j;
  try {
    j = json::parse(read_all(path));
  } catch (const json::exception& e) {
    throw IntegrityError("corrupt checkpoint manifest " + path.string() + ": " + e.what());
  }

  Checkpoint cp;
  try {
    if (j.at("format") != "instobj-checkpoint" || j.at("version") != kFormatVersion) {
      throw IntegrityError("unsupported checkpoint format in " + path.string());
    }
    cp.mlp.sizes = j.at("layer_sizes").get<std::vector<int>>();
    const auto& n = j.at("norm");
    cp.stats.in_min = n.at("in_min").get<std::array<double, kSignalsPerFace>>();
    cp.stats.in_max = n.at("in_max").get<std::array<double, kSignalsPerFace>>();
    cp.stats.f_max = n.at("f_max").get<double>();
    cp.stats.degenerate = n.at("degenerate").get<std::array<bool, kSignalsPerFace>>();
    const auto& p = j.at("provenance");
    cp.provenance.face = p.at("face").get<int>();
    cp.provenance.seed = p.at("seed").get<std::uint64_t>();
    cp.provenance.data_hash = p.at("data_hash").get<std::string>();
    cp.provenance.epochs = p.at("epochs").get<int>();
    cp.provenance.best_epoch = p.at("best_epoch").get<int>();
  } catch (const json::exception& e) {
    throw IntegrityError("incomplete checkpoint manifest " + path.string() + ": " + e.what());
  }

  if (expected_sizes && *expected_sizes != cp.mlp.sizes) {
    throw ShapeError("checkpoint layer sizes do not match the requested network");
  }
  if (cp.mlp.sizes.size() < 2) throw ShapeError("checkpoint has fewer than two layer sizes");
  for (int s : cp.mlp.sizes) {
    if (s <= 0) throw ShapeError("checkpoint has a non-positive layer size");
  }

  const std::string blob = read_all(path.parent_path() / j.at("blob").get<std::string>());
  std::size_t expected = 0;
  for (std::size_t l = 0; l + 1 < cp.mlp.sizes.size(); ++l) {
    expected += static_cast<std::size_t>(cp.mlp.sizes[l] + 1) * cp.mlp.sizes[l + 1];
  }
  if (blob.size() != expected * sizeof(double)) {
    throw IntegrityError("parameter blob has " + std::to_string(blob.size()) +
                         " bytes, expected " + std::to_string(expected * sizeof(double)));
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  if (to_hex(fnv1a64(std::span<const unsigned char>(bytes, blob.size()))) !=
      j.at("checksum_fnv1a64").get<std::string>()) {
    throw IntegrityError("checksum mismatch in " + path.string());
  }

  const unsigned char* cursor = bytes;
  for (std::size_t l = 0; l + 1 < cp.mlp.sizes.size(); ++l) {
    DenseLayer layer;
    layer.in = cp.mlp.sizes[l];
    layer.out = cp.mlp.sizes[l + 1];
    layer.weight.resize(static_cast<std::size_t>(layer.in) * layer.out);
    layer.bias.resize(static_cast<std::size_t>(layer.out));
    for (double& w : layer.weight) {
      w = get_double(cursor);
      cursor += 8;
    }
    for (double& b : layer.bias) {
      b = get_double(cursor);
      cursor += 8;
    }
    cp.mlp.layers.push_back(std::move(layer));
  }
  return cp;
}

std::vector<Heatmap> predict(const Checkpoint& cp, std::span<const HallFrame> frames) {
  const std::size_t n_in = static_cast<std::size_t>(cp.mlp.sizes.front());
  if (n_in != kSignalsPerFace) throw ShapeError("model input width is not one Hall frame");
  Matrix x(frames.size(), n_in);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto v = normalize(frames[i], cp.stats);
    std::copy(v.begin(), v.end(), x.row(i).begin());
  }
  const Matrix y = forward(cp.mlp, x, true);
  const int cells = cp.mlp.sizes.back();
  int grid = 1;
  while (grid * grid < cells) ++grid;
  if (grid * grid != cells) throw ShapeError("model output width is not a square grid");
  std::vector<Heatmap> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    out.push_back(denormalize_heatmap(y.row(i), cp.stats, cp.provenance.face, grid, true));
  }
  return out;
}

}  // namespace instobj
