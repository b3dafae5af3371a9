#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "instobj/experiments.hpp"

namespace instobj {

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Run directories hold config.json, summary.json, per-sample CSVs,
/// checkpoints and P2 figures. Nothing time-dependent is written, so reruns
/// with the same inputs produce identical bytes.
void write_table1_run(const std::filesystem::path& dir, std::span<const FaceRun> runs,
                      const PipelineConfig& cfg);
void write_unseen_run(const std::filesystem::path& dir, const UnseenResult& result,
                      const PipelineConfig& cfg);
void write_ablation_run(const std::filesystem::path& dir, int face,
                        std::span<const AblationPoint> points, const PipelineConfig& cfg);
void write_crossface_run(const std::filesystem::path& dir, const CrossfaceResult& result,
                         const CrossfaceOptions& options, const PipelineConfig& cfg);
void write_sensitivity_run(const std::filesystem::path& dir, const SensitivityResult& result,
                           const FaceRun& run, const PipelineConfig& cfg);

/// Single-model evaluation output (eval subcommand).
void write_eval_run(const std::filesystem::path& dir, const MetricsReport& report, int face,
                    const std::string& data_hash, const PipelineConfig& cfg);

/// Rows shaped like the per-face results table: A_sim, E_loc (1e-4 px,
/// Euclidean with X and Y), E_f (% and N) and A_non.
struct TableRow {
  std::string label;
  GroupSummary summary;
};
std::string format_metrics_table(std::span<const TableRow> rows);

/// Reads `run_dir/summary.json` and writes table.txt plus location-wise P2
/// grids into `out_dir`. Throws UsageError if the summary is missing or malformed.
void render_report(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir);

}  // namespace instobj
