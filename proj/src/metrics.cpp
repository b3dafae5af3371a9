#include "instobj/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "instobj/errors.hpp"

namespace instobj {

std::optional<double> zncc_at(const Heatmap& pred, const Heatmap& gt, int dx, int dy) {
  if (pred.size != gt.size) throw UsageError("heatmaps of different sizes");
  const int m = gt.size;
  const int x0 = std::max(1, 1 - dx), x1 = std::min(m, m - dx);
  const int y0 = std::max(1, 1 - dy), y1 = std::min(m, m - dy);
  const int n = std::max(0, x1 - x0 + 1) * std::max(0, y1 - y0 + 1);
  if (n < kMinOverlapPixels) return std::nullopt;

  double mean_g = 0.0, mean_p = 0.0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      mean_g += gt.at(x, y);
      mean_p += pred.at(x + dx, y + dy);
    }
  }
  mean_g /= n;
  mean_p /= n;
  double sgg = 0.0, spp = 0.0, sgp = 0.0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double g = gt.at(x, y) - mean_g;
      const double p = pred.at(x + dx, y + dy) - mean_p;
      sgg += g * g;
      spp += p * p;
      sgp += g * p;
    }
  }
  if (!(sgg > 0.0) || !(spp > 0.0)) return std::nullopt;
  return std::clamp(sgp / std::sqrt(sgg * spp), -1.0, 1.0);
}

MatchResult match(const Heatmap& pred, const Heatmap& gt) {
  const int r = gt.size - 1;
  bool found = false;
  MatchResult best;
  int best_d2 = 0;
  for (int dx = -r; dx <= r; ++dx) {
    for (int dy = -r; dy <= r; ++dy) {
      const auto z = zncc_at(pred, gt, dx, dy);
      if (!z) continue;
      const int d2 = dx * dx + dy * dy;
      bool take = !found || *z > best.a_sim + kZnccTieTolerance;
      if (!take && std::abs(*z - best.a_sim) <= kZnccTieTolerance) {
        take = d2 < best_d2 || (d2 == best_d2 && std::pair(dx, dy) < std::pair(best.dx, best.dy));
      }
      if (take) {
        found = true;
        best.a_sim = *z;
        best.dx = dx;
        best.dy = dy;
        best_d2 = d2;
      }
    }
  }
  if (!found) {
    best = {0.0, r, r, 0.0, 0.0, 0.0};
  }
  best.e_x = std::abs(best.dx);
  best.e_y = std::abs(best.dy);
  best.e_eucl = std::sqrt(best.e_x * best.e_x + best.e_y * best.e_y);
  return best;
}

const std::pair<double, double>& ForceRangeMap::at(const GridCoord& c) const {
  if (!is_valid(c, grid) || ranges.size() != static_cast<std::size_t>(grid * grid)) {
    throw ConfigError("no force range for pixel (" + std::to_string(c.x) + "," +
                      std::to_string(c.y) + ")");
  }
  return ranges[static_cast<std::size_t>((c.y - 1) * grid + (c.x - 1))];
}

ForceRangeMap build_range_map(int face, const DeformationParams& params,
                              const DepthRange& sweep) {
  ForceRangeMap map;
  map.grid = params.grid;
  for (int y = 1; y <= params.grid; ++y) {
    for (int x = 1; x <= params.grid; ++x) {
      map.ranges.push_back(location_force_range(face, {x, y}, params, sweep));
    }
  }
  return map;
}

ForceError force_error(const Heatmap& pred, const Heatmap& gt, const ForceRangeMap& ranges) {
  ForceError sum;
  int count = 0;
  for (int y = 1; y <= gt.size; ++y) {
    for (int x = 1; x <= gt.size; ++x) {
      const double g = gt.at(x, y);
      if (!(g > 0.0)) continue;
      const auto& [lo, hi] = ranges.at({x, y});
      const double span = hi - lo;
      if (!(span > 0.0)) throw ConfigError("empty force range at a contact pixel");
      const double err = std::abs(pred.at(x, y) - g);
      sum.newtons += err;
      sum.percent += err / span * 100.0;
      ++count;
    }
  }
  if (count == 0) throw UsageError("force error needs a contact ground truth");
  return {sum.percent / count, sum.newtons / count};
}

double non_contact_accuracy(std::span<const Heatmap> preds, double threshold) {
  if (preds.empty()) throw UsageError("no non-contact predictions to score");
  const auto hits = std::count_if(preds.begin(), preds.end(), [&](const Heatmap& h) {
    return classify_non_contact(h, threshold);
  });
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw UsageError("rank correlation needs two equal-length series of at least 2 values");
  }
  const auto ra = ranks(a), rb = ranks(b);
  const double mean = (static_cast<double>(a.size()) + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace instobj
