#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "instobj/deformation.hpp"
#include "instobj/geometry.hpp"
#include "instobj/magnetics.hpp"

namespace instobj {

/// Resolution at which forces (N) and signals (uT) are stored and written.
inline constexpr double kStoredResolution = 1e-6;

/// Rounds to the stored resolution; values on this grid survive a CSV round trip.
double round_to_stored(double value);

struct PixelOffset {
  int dx = 0;
  int dy = 0;
};

struct Probe {
  int contact_count = 1;
  std::vector<PixelOffset> offsets;
};

Probe single_probe();
Probe dual_probe();
Probe triple_probe();
/// 1, 2 or 3 -> the corresponding rig probe.
Probe probe_for(int contact_count);

/// Anchor coordinates for the multi-contact probes. Single contacts always
/// cover the whole grid.
struct CoverageSpec {
  std::vector<GridCoord> dual_anchors;
  std::vector<GridCoord> triple_anchors;
  int non_contact_cases = 3;
};

/// 26 dual and 14 triple anchors (all on-grid for the default probes).
CoverageSpec default_coverage();

struct CaseDescriptor {
  std::string case_id;
  int face = 1;
  int contact_count = 0;  // 0 for non-contact
  std::vector<GridCoord> coords;
};

/// Cases for one probe on one face, in a fixed order. Cases with any contact
/// off-grid are dropped. Throws ConfigError if a multi-contact probe has no anchors.
std::vector<CaseDescriptor> enumerate_cases(int face, const Probe& probe,
                                            const CoverageSpec& coverage, int grid = 10);

std::vector<CaseDescriptor> non_contact_cases(int face, const CoverageSpec& coverage);

struct SweepProtocol {
  int samples_per_case = 1000;
  DepthRange depths;
  int cycles = 5;
};

/// Triangle wave in [0, 1]: 0 at phase 0, 1 at half a cycle.
double triangle_wave(double cycles_elapsed);

struct LabelledContact {
  GridCoord coord;
  double force = 0.0;  // N

  friend bool operator==(const LabelledContact&, const LabelledContact&) = default;
};

struct DatasetRecord {
  int face = 1;
  HallFrame hall;
  std::vector<LabelledContact> contacts;
  std::string case_id;
  int sample_index = 0;

  bool is_contact() const { return !contacts.empty(); }
  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

struct Dataset {
  std::vector<DatasetRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct GenerationOptions {
  SweepProtocol protocol;
  CoverageSpec coverage = default_coverage();
  SensorModel sensor;
  /// Round ground-truth forces to a 0.24 N step (+-0.12 N), as the rig's ADC did.
  bool quantize_force = true;
  double force_quantum = 0.24;
  int jobs = 1;
};

/// Indentations held constant on other faces while a case is swept.
struct BackgroundLoad {
  std::vector<DepthContact> contacts;
};

/// Samples of one case. For contact cases every probe tip receives the same
/// indentation from the triangle sweep; each tip is labelled with the total
/// simulated force divided by the tip count. Background contacts deform their
/// own faces and reach the case's sensors only through the shared field.
std::vector<DatasetRecord> generate_case(const CaseDescriptor& c, const SweepProtocol& protocol,
                                         const ObjectConfig& config,
                                         const DeformationParams& params,
                                         const GenerationOptions& options, std::uint64_t seed,
                                         const BackgroundLoad& background = {});

/// Samples per case after scaling: max(1, round(samples_per_case * scale)).
int scaled_samples(int samples_per_case, double scale);

/// Full campaign for one face, sorted by (case_id, sample).
Dataset generate_face_dataset(int face, double scale, const ObjectConfig& config,
                              const DeformationParams& params, std::uint64_t seed,
                              const GenerationOptions& options = {});

using SignalOffset = std::array<double, kSignalsPerFace>;

/// Adds `offset` to every frame (result kept on the stored-resolution grid).
Dataset inject_core_shift(Dataset dataset, const SignalOffset& offset);

/// frame - reference_rest + calib_rest. Throws UsageError on a face mismatch.
HallFrame offset_compensate(const HallFrame& frame, const HallFrame& reference_rest,
                            const HallFrame& calib_rest);

/// Per-channel (max - min) over all frames of the dataset.
SignalOffset channel_ranges(const Dataset& dataset);

// --- CSV I/O -------------------------------------------------------------

inline constexpr const char* kDatasetHeader =
    "face,case_id,sample,cx1,cy1,f1,cx2,cy2,f2,cx3,cy3,f3,s1,s2,s3,s4,s5,s6,s7,s8,s9";

std::string format_dataset(const Dataset& dataset);
Dataset parse_dataset(std::string_view text);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
/// Throws ParseError (with line number) on malformed input.
Dataset read_dataset(const std::filesystem::path& path);

/// FNV-1a of the CSV serialization.
std::uint64_t dataset_hash(const Dataset& dataset);

}  // namespace instobj
