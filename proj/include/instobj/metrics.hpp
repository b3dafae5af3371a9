#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "instobj/deformation.hpp"
#include "instobj/heatmap.hpp"

namespace instobj {

/// Overlaps with fewer pixels are not scored.
inline constexpr int kMinOverlapPixels = 4;

/// Two ZNCC values closer than this are treated as a tie.
inline constexpr double kZnccTieTolerance = 1e-12;

/// ZNCC between gt(x, y) and pred(x + dx, y + dy) over their overlap.
/// Empty when the overlap is too small or either side has zero variance there.
std::optional<double> zncc_at(const Heatmap& pred, const Heatmap& gt, int dx, int dy);

struct MatchResult {
  double a_sim = 0.0;
  int dx = 0;
  int dy = 0;
  double e_x = 0.0;
  double e_y = 0.0;
  double e_eucl = 0.0;
};

/// Best displacement over [-(M-1), M-1]^2. Ties go to the smaller Euclidean
/// displacement, then to the lexicographically smaller (dx, dy). When no
/// displacement is scorable (constant prediction) A_sim is 0 and the errors
/// are the maximum displacement.
MatchResult match(const Heatmap& pred, const Heatmap& gt);

/// Per-pixel (min, max) force over a face, row-major like Heatmap.
struct ForceRangeMap {
  int grid = 10;
  std::vector<std::pair<double, double>> ranges;

  const std::pair<double, double>& at(const GridCoord& c) const;
};

ForceRangeMap build_range_map(int face, const DeformationParams& params,
                              const DepthRange& sweep = {});

struct ForceError {
  double percent = 0.0;
  double newtons = 0.0;
};

/// Mean absolute force error over the ground-truth contact pixels, in N and in
/// percent of each pixel's force range. Throws UsageError if gt has no
/// positive pixel and ConfigError if a range is missing or empty.
ForceError force_error(const Heatmap& pred, const Heatmap& gt, const ForceRangeMap& ranges);

/// Fraction of predictions classified as non-contact. Throws UsageError if empty.
double non_contact_accuracy(std::span<const Heatmap> preds, double threshold);

/// Spearman rank correlation (average ranks for ties). Throws UsageError on
/// mismatched or too-short inputs; returns 0 when either side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace instobj
