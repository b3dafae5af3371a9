#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "instobj/datagen.hpp"
#include "instobj/geometry.hpp"
#include "instobj/magnetics.hpp"

namespace instobj {

/// M x M force map, row-major with index (y-1)*M + (x-1).
struct Heatmap {
  int size = 10;
  int face = 1;
  std::vector<double> values;

  Heatmap() : values(100, 0.0) {}
  Heatmap(int grid, int face_index)
      : size(grid), face(face_index), values(static_cast<std::size_t>(grid * grid), 0.0) {}

  double& at(const GridCoord& c) { return values[index(c)]; }
  double at(const GridCoord& c) const { return values[index(c)]; }
  double at(int x, int y) const { return values[index({x, y})]; }
  std::size_t index(const GridCoord& c) const {
    return static_cast<std::size_t>((c.y - 1) * size + (c.x - 1));
  }
  double max_value() const;
};

/// Force at each contact pixel, zero elsewhere. Throws UsageError on duplicate
/// coordinates, more than three contacts, or off-grid pixels.
Heatmap encode(std::span<const LabelledContact> contacts, int face, int grid = 10);

struct NormStats {
  std::array<double, kSignalsPerFace> in_min{};
  std::array<double, kSignalsPerFace> in_max{};
  double f_max = 1.0;
  /// Channels whose training range was zero and got widened.
  std::array<bool, kSignalsPerFace> degenerate{};
};

/// Half-width used to widen constant channels (uT).
inline constexpr double kDegenerateHalfRangeUt = 1.0;

/// Input ranges and force scale from the training split. Throws UsageError if empty.
NormStats fit_norm_stats(const Dataset& training);

std::array<double, kSignalsPerFace> normalize(const HallFrame& frame, const NormStats& stats,
                                              bool clamp = false);
HallFrame denormalize(std::span<const double> normalized, const NormStats& stats, int face);

/// Heatmap (N) -> [0, 1] values by the global force scale.
std::vector<double> normalize(const Heatmap& map, const NormStats& stats, bool clamp = false);
/// Normalized network output -> heatmap in N; `clamp` limits values to [0, 1] first.
Heatmap denormalize_heatmap(std::span<const double> normalized, const NormStats& stats,
                            int face, int grid = 10, bool clamp = true);

/// 0.9 x the smallest positive contact force of the dataset.
/// Throws UsageError when the dataset has no contact records.
double non_contact_threshold(const Dataset& dataset);

/// True iff every pixel is strictly below the threshold.
bool classify_non_contact(const Heatmap& map, double threshold);

/// ASCII PGM (P2). Values are mapped linearly from [0, force_scale] to [0, 255].
void write_pgm(const Heatmap& map, double force_scale, const std::filesystem::path& path);
std::string format_pgm(std::span<const double> values, int grid, double scale,
                       const std::string& comment);

}  // namespace instobj
