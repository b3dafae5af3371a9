#pragma once

#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "instobj/geometry.hpp"

namespace instobj {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Metrics of one evaluated sample. Contact-only fields are NaN for
/// non-contact samples; `predicted_non_contact` is meaningful for both.
struct SampleRecord {
  int face = 1;
  std::string case_id;
  int sample = 0;
  int contact_count = 0;
  GridCoord location{0, 0};  // first probe contact; (0, 0) for non-contact
  int factor = 0;            // ablation exponent k of 2^k
  int force_bin = -1;        // index into the study's force bins, -1 if unused
  double a_sim = kNaN;
  double e_x = kNaN;
  double e_y = kNaN;
  double e_eucl = kNaN;
  double ef_pct = kNaN;
  double ef_n = kNaN;
  bool predicted_non_contact = false;
};

struct MetricSummary {
  std::size_t n = 0;
  double mean = kNaN;
  double p10 = kNaN;
  double p50 = kNaN;
  double p90 = kNaN;
};

struct GroupSummary {
  std::string key;
  std::size_t count = 0;
  std::size_t contact = 0;
  std::size_t non_contact = 0;
  MetricSummary a_sim, e_x, e_y, e_eucl, ef_pct, ef_n;
  double a_non = kNaN;  // NaN when the group has no non-contact samples
};

enum class GroupKey { All, Face, Location, Probe, Factor, ForceBin };

/// "all", "face", "location", "probe", "factor" or "force_bin"; UsageError otherwise.
GroupKey parse_group_key(std::string_view name);
std::string_view to_string(GroupKey key);

/// Mean and 10/50/90th percentiles (linear interpolation) per group, groups
/// in ascending key order. Throws UsageError for an empty input.
std::vector<GroupSummary> aggregate(std::span<const SampleRecord> records, GroupKey key);

struct MetricsReport {
  GroupSummary overall;
  std::vector<SampleRecord> samples;
  int grid = 10;
  /// Location-wise means over single-contact samples, row-major, NaN where empty.
  std::vector<double> grid_a_sim, grid_e_eucl, grid_ef_pct;
};

MetricsReport make_report(std::vector<SampleRecord> samples, int grid = 10);

/// Per-sample CSV with a header row; NaN cells are written empty.
std::string format_samples_csv(std::span<const SampleRecord> records);

}  // namespace instobj
