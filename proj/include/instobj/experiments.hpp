#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "instobj/aggregate.hpp"
#include "instobj/checkpoint.hpp"
#include "instobj/datagen.hpp"
#include "instobj/deformation.hpp"
#include "instobj/geometry.hpp"
#include "instobj/hull_volume.hpp"
#include "instobj/metrics.hpp"
#include "instobj/mlp.hpp"

namespace instobj {

struct ModelPreset {
  std::string name;
  std::vector<int> sizes;
  TrainConfig train;
};

/// Full-size network, batch 2000, 200 epochs.
ModelPreset paper_preset();
/// [9, 64, 64, 100] surrogate with a smaller batch for short runs.
ModelPreset small_preset();

struct SplitSpec {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

struct SplitIndices {
  std::vector<std::size_t> train, validation, test;
  std::vector<std::string> warnings;
};

/// Per-case random partition; cases with fewer than 5 samples are pooled and
/// split together (with a warning). Throws UsageError for an empty dataset or
/// fractions that do not sum to 1.
SplitIndices split_dataset(const Dataset& dataset, const SplitSpec& spec, std::uint64_t seed);

Dataset subset(const Dataset& dataset, std::span<const std::size_t> indices);

/// Everything a single-face pipeline needs besides the face index.
struct PipelineConfig {
  ObjectConfig object = default_config();
  DeformationParams deformation = default_deformation_params();
  GenerationOptions generation;
  ModelPreset model = paper_preset();
  SplitSpec split;
  double scale = 0.05;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Stage seeds derived from the master seed, e.g. stage_seed(s, "train", 1).
std::uint64_t stage_seed(std::uint64_t master, const std::string& stage, int face);

Dataset generate_for(int face, const PipelineConfig& cfg);

struct TrainedModel {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

/// Fits normalization on `train`, initializes and trains the network.
TrainedModel train_face_model(int face, const Dataset& train, const Dataset& validation,
                              const ModelPreset& preset, std::uint64_t master_seed);

/// Scores every record: A_sim, E_loc and E_f on contact records and the
/// non-contact classification on the rest.
MetricsReport evaluate(const Checkpoint& checkpoint, const Dataset& data, double threshold,
                       const ForceRangeMap& ranges);

struct FaceRun {
  int face = 1;
  Dataset dataset;
  SplitIndices split;
  TrainedModel model;
  double threshold = 0.0;
  MetricsReport report;  // on the test split
};

/// Generate, split, fit, train and evaluate one face.
FaceRun run_face(int face, const PipelineConfig& cfg);

std::vector<FaceRun> run_table1(std::span<const int> faces, const PipelineConfig& cfg);

/// Odd-coordinate 5 x 5 lattice used for calibration in the unseen study.
std::vector<GridCoord> seen_locations();

struct UnseenResult {
  int face = 1;
  TrainedModel model;
  std::size_t train_size = 0;
  MetricsReport seen;    // test split of the seen-location data
  MetricsReport unseen;  // every single-contact record at the other 75 locations
};

UnseenResult run_unseen(int face, const PipelineConfig& cfg);

/// Training indices kept at factor 2^k: per contact-count group, the first
/// ceil(n / 2^k) of a seeded shuffle, returned in their original order.
/// k = 0 returns `train` unchanged.
std::vector<std::size_t> downsample(const Dataset& dataset, std::span<const std::size_t> train,
                                    int k, std::uint64_t seed);

struct AblationPoint {
  int k = 0;
  std::size_t train_size = 0;
  std::uint64_t checksum = 0;  // parameter checksum of the trained model
  MetricsReport report;
};

std::vector<AblationPoint> run_ablation(int face, std::span<const int> ks,
                                        const PipelineConfig& cfg);

enum class CrossfaceMode { Full, Isolated, ShiftedRaw, ShiftedCompensated };
std::string_view to_string(CrossfaceMode mode);

struct CrossfaceOptions {
  int face_a = 3;
  int face_b = 5;
  /// Opposite-face force as a fraction of its maximum sweep force.
  std::vector<double> bins{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int samples_per_case = 20;
  /// Core-shift offset per channel as a fraction of the channel's training range.
  double shift_fraction = 0.1;
  int reference_frames = 50;
};

/// Grasp layouts on each face: five single, three dual and two triple cases.
std::vector<CaseDescriptor> grasp_cases(int face);

struct CrossfaceCell {
  int face = 0;  // evaluated face
  CrossfaceMode mode = CrossfaceMode::Full;
  int bin = -1;  // -1: opposite face at rest
  double load = 0.0;
  MetricsReport report;
};

struct CrossfaceResult {
  std::vector<FaceRun> calibration;  // one per face, single-face data
  std::vector<CrossfaceCell> cells;
};

CrossfaceResult run_crossface(const PipelineConfig& cfg, const CrossfaceOptions& options = {});

struct SensitivityOptions {
  HullVolumeOptions hull{20000, 0, 1e-12};
};

struct SensitivityResult {
  int face = 1;
  int grid = 10;
  std::vector<double> delta;         // per location, row-major
  std::vector<double> volume_rel_se;  // relative standard error of each hull volume
  std::vector<double> ef_pct, a_sim, e_eucl;  // per-location test metrics
  double rho_ef = 0.0, rho_a_sim = 0.0, rho_e_eucl = 0.0;
};

/// delta per location from the face's single-contact sweeps, correlated with
/// the location-wise test metrics of `run`.
SensitivityResult run_sensitivity(const FaceRun& run, const PipelineConfig& cfg,
                                  const SensitivityOptions& options = {});

}  // namespace instobj
