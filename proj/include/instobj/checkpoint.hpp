#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "instobj/heatmap.hpp"
#include "instobj/mlp.hpp"

namespace instobj {

struct Provenance {
  int face = 0;
  std::uint64_t seed = 0;
  std::string data_hash;  // hex FNV-1a of the training dataset CSV
  int epochs = 0;
  int best_epoch = 0;
};

/// A trained face model with everything needed for inference.
struct Checkpoint {
  Mlp mlp;
  NormStats stats;
  Provenance provenance;
};

/// Writes `<path>` (JSON manifest) and `<path>.bin` (little-endian float64
/// parameters, layer by layer: weights row-major, then biases).
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

/// Throws IntegrityError on a missing, truncated or checksum-mismatched file
/// and ShapeError when `expected_sizes` is given and differs from the stored sizes.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<std::vector<int>> expected_sizes = std::nullopt);

/// FNV-1a over the parameter blob; equal checksums mean equal parameters.
std::uint64_t parameter_checksum(const Mlp& mlp);

/// Normalized frames -> heatmaps in N (clamped inference path).
std::vector<Heatmap> predict(const Checkpoint& checkpoint, std::span<const HallFrame> frames);

}  // namespace instobj
