#include "instobj/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include "instobj/errors.hpp"

namespace instobj {

double Heatmap::max_value() const { return *std::max_element(values.begin(), values.end()); }

Heatmap encode(std::span<const LabelledContact> contacts, int face, int grid) {
  if (contacts.size() > static_cast<std::size_t>(kMaxContactsPerFace)) {
    throw UsageError("at most three contacts per heatmap");
  }
  Heatmap map(grid, face);
  std::set<GridCoord> seen;
  for (const auto& c : contacts) {
    if (!is_valid(c.coord, grid)) throw UsageError("contact outside the heatmap grid");
    if (!seen.insert(c.coord).second) throw UsageError("duplicate contact coordinate");
    map.at(c.coord) = c.force;
  }
  return map;
}

NormStats fit_norm_stats(const Dataset& training) {
  if (training.empty()) throw UsageError("cannot fit normalization on an empty dataset");
  NormStats s;
  s.in_min.fill(std::numeric_limits<double>::infinity());
  s.in_max.fill(-std::numeric_limits<double>::infinity());
  double f_max = 0.0;
  for (const auto& r : training.records) {
    for (std::size_t k = 0; k < kSignalsPerFace; ++k) {
      s.in_min[k] = std::min(s.in_min[k], r.hall.values[k]);
      s.in_max[k] = std::max(s.in_max[k], r.hall.values[k]);
    }
    for (const auto& c : r.contacts) f_max = std::max(f_max, c.force);
  }
  for (std::size_t k = 0; k < kSignalsPerFace; ++k) {
    if (!(s.in_max[k] > s.in_min[k])) {
      s.degenerate[k] = true;
      s.in_min[k] -= kDegenerateHalfRangeUt;
      s.in_max[k] += kDegenerateHalfRangeUt;
    }
  }
  s.f_max = f_max > 0.0 ? f_max : 1.0;
  return s;
}

std::array<double, kSignalsPerFace> normalize(const HallFrame& frame, const NormStats& stats,
                                              bool clamp) {
  std::array<double, kSignalsPerFace> out{};
  for (std::size_t k = 0; k < kSignalsPerFace; ++k) {
    double v = (frame.values[k] - stats.in_min[k]) / (stats.in_max[k] - stats.in_min[k]);
    if (clamp) v = std::clamp(v, 0.0, 1.0);
    out[k] = v;
  }
  return out;
}

HallFrame denormalize(std::span<const double> normalized, const NormStats& stats, int face) {
  if (normalized.size() != kSignalsPerFace) throw UsageError("expected nine normalized signals");
  HallFrame f;
  f.face_index = face;
  for (std::size_t k = 0; k < kSignalsPerFace; ++k) {
    f.values[k] = stats.in_min[k] + normalized[k] * (stats.in_max[k] - stats.in_min[k]);
  }
  return f;
}

std::vector<double> normalize(const Heatmap& map, const NormStats& stats, bool clamp) {
  std::vector<double> out(map.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = map.values[i] / stats.f_max;
    if (clamp) v = std::clamp(v, 0.0, 1.0);
    out[i] = v;
  }
  return out;
}

Heatmap denormalize_heatmap(std::span<const double> normalized, const NormStats& stats, int face,
                            int grid, bool clamp) {
  if (normalized.size() != static_cast<std::size_t>(grid * grid)) {
    throw UsageError("normalized heatmap has the wrong size");
  }
  Heatmap map(grid, face);
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const double v = clamp ? std::clamp(normalized[i], 0.0, 1.0) : normalized[i];
    map.values[i] = v * stats.f_max;
  }
  return map;
}

double non_contact_threshold(const Dataset& dataset) {
  double min_force = std::numeric_limits<double>::infinity();
  for (const auto& r : dataset.records) {
    for (const auto& c : r.contacts) {
      if (c.force > 0.0) min_force = std::min(min_force, c.force);
    }
  }
  if (!std::isfinite(min_force)) throw UsageError("dataset has no contact records");
  return 0.9 * min_force;
}

bool classify_non_contact(const Heatmap& map, double threshold) {
  return std::all_of(map.values.begin(), map.values.end(),
                     [&](double v) { return v < threshold; });
}

std::string format_pgm(std::span<const double> values, int grid, double scale,
                       const std::string& comment) {
  std::string out = "P2\n# " + comment + "\n" + std::to_string(grid) + " " +
                    std::to_string(grid) + "\n255\n";
  for (int y = 1; y <= grid; ++y) {
    for (int x = 1; x <= grid; ++x) {
      const double v = values[static_cast<std::size_t>((y - 1) * grid + (x - 1))];
      const double t = scale > 0.0 ? std::clamp(v / scale, 0.0, 1.0) : 0.0;
      out += std::to_string(static_cast<int>(std::lround(255.0 * (std::isfinite(t) ? t : 0.0))));
      out += x == grid ? '\n' : ' ';
    }
  }
  return out;
}

void write_pgm(const Heatmap& map, double force_scale, const std::filesystem::path& path) {
  char comment[96];
  std::snprintf(comment, sizeof comment, "face=%d force_scale=%.6f", map.face, force_scale);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string());
  out << format_pgm(map.values, map.size, force_scale, comment);
}

}  // namespace instobj
