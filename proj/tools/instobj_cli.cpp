#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "instobj/checkpoint.hpp"
#include "instobj/config_io.hpp"
#include "instobj/datagen.hpp"
#include "instobj/errors.hpp"
#include "instobj/experiments.hpp"
#include "instobj/hash.hpp"
#include "instobj/heatmap.hpp"
#include "instobj/metrics.hpp"
#include "instobj/study_io.hpp"

namespace fs = std::filesystem;
using namespace instobj;

namespace {

struct Common {
  std::string config;
  std::string output;
  std::uint64_t seed = 0;
  int jobs = 1;
  double scale = 0.05;
  bool small = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* scale_opt = nullptr;
};

// Thrown for problems that belong to argument handling rather than a run.
struct BadUsage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<int> parse_range(const std::string& text) {
  std::vector<int> out;
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw BadUsage("bad factor list '" + text + "'");
    return v;
  };
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const int lo = to_int(item.substr(0, dots));
      const int hi = to_int(item.substr(dots + 2));
      if (hi < lo) throw BadUsage("empty factor range '" + item + "'");
      for (int k = lo; k <= hi; ++k) out.push_back(k);
    } else {
      out.push_back(to_int(item));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  for (int k : out) {
    if (k < 0 || k > 20) throw BadUsage("factor exponent out of range: " + std::to_string(k));
  }
  return out;
}

fs::path output_dir(const std::string& requested, const std::string& fallback) {
  fs::path p = requested.empty() ? fs::path("out") / fallback : fs::path(requested);
  if (p.is_relative()) {
    if (const char* root = std::getenv("INSTOBJ_OUTPUT_ROOT"); root && *root) p = fs::path(root) / p;
  }
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw BadUsage("cannot create output directory " + p.string());
  return p;
}

void add_common(CLI::App* cmd, Common& c, bool with_scale) {
  cmd->add_option("-c,--config", c.config, "Pipeline configuration (JSON)");
  cmd->add_option("-o,--output", c.output, "Output directory (relative paths honour INSTOBJ_OUTPUT_ROOT)");
  c.seed_opt = cmd->add_option("--seed", c.seed, "Master seed");
  c.jobs_opt = cmd->add_option("-j,--jobs", c.jobs, "Worker threads for generation and evaluation")
                   ->check(CLI::PositiveNumber);
  cmd->add_flag("--small", c.small, "Use the [9,64,64,100] surrogate network");
  if (with_scale) {
    c.scale_opt = cmd->add_option("--scale", c.scale, "Fraction of the per-case sample count")
                      ->check(CLI::Range(1e-9, 1.0));
  }
}

PipelineConfig resolve(const Common& c) {
  PipelineConfig base;
  if (c.small) base.model = small_preset();
  PipelineConfig cfg = c.config.empty() ? base : load_pipeline_config(c.config, base);
  if (c.small && cfg.model.name != "small") cfg.model = small_preset();
  if (c.seed_opt && c.seed_opt->count()) cfg.seed = c.seed;
  if (c.jobs_opt && c.jobs_opt->count()) cfg.jobs = c.jobs;
  if (c.scale_opt && c.scale_opt->count()) cfg.scale = c.scale;
  cfg.generation.jobs = cfg.jobs;
  return cfg;
}

void check_face(int face) {
  if (face < 1 || face > kActiveFaces) throw BadUsage("face must be in 1..5, got " + std::to_string(face));
}

int face_of(const Dataset& ds) {
  if (ds.empty()) throw UsageError("dataset is empty");
  const int face = ds.records.front().face;
  for (const auto& r : ds.records) {
    if (r.face != face) throw UsageError("dataset mixes faces " + std::to_string(face) + " and " +
                                         std::to_string(r.face));
  }
  return face;
}

std::string train_log_csv(const std::vector<EpochLog>& log) {
  std::string out = "epoch,train_loss,val_loss\n";
  char buf[96];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g\n", e.epoch, e.train_loss, e.val_loss);
    out += buf;
  }
  return out;
}

void print_table(const std::vector<TableRow>& rows) {
  std::cout << format_metrics_table(rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic twin of a magnet-based tactile object: data, training and studies",
               "instobj"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", "instobj 1.0");

  Common c;
  int face = 1;
  std::vector<int> faces{1, 2, 3, 4, 5};
  std::string data_path, checkpoint_path, run_dir, factors = "0..10";
  int hull_samples = 20000;
  int samples_per_case = 20;

  auto* gen = app.add_subcommand("gen", "Generate the sweep dataset of one or more faces");
  add_common(gen, c, true);
  gen->add_option("--face,--faces", faces, "Faces to generate (1..5)")->expected(1, kActiveFaces);

  auto* train = app.add_subcommand("train", "Split a dataset and train its face model");
  add_common(train, c, false);
  train->add_option("--data", data_path, "Dataset CSV written by gen")->required()->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a dataset");
  add_common(eval, c, false);
  eval->add_option("--data", data_path, "Dataset CSV to score")->required()->check(CLI::ExistingFile);
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint manifest")->required()->check(CLI::ExistingFile);

  auto* table1 = app.add_subcommand("table1", "Per-face generate, train and test on every face");
  add_common(table1, c, true);
  table1->add_option("--face,--faces", faces, "Faces to run (1..5)")->expected(1, kActiveFaces);

  auto* unseen = app.add_subcommand("unseen", "Train on the odd lattice, test on the other locations");
  add_common(unseen, c, true);
  unseen->add_option("--face", face, "Face (1..5)");

  auto* ablate = app.add_subcommand("ablate", "Retrain on training sets reduced by 2^k");
  add_common(ablate, c, true);
  ablate->add_option("--face", face, "Face (1..5)");
  ablate->add_option("--factors", factors, "Exponents k, e.g. 0..10 or 0,5,10");

  auto* cross = app.add_subcommand("crossface", "Contact face under load on the opposite face");
  add_common(cross, c, true);
  cross->add_option("--samples-per-case", samples_per_case, "Samples per grasp case and bin")
      ->check(CLI::PositiveNumber);

  auto* sens = app.add_subcommand("sensitivity", "Per-location signal hull volume vs test error");
  add_common(sens, c, true);
  sens->add_option("--face", face, "Face (1..5)");
  sens->add_option("--hull-samples", hull_samples, "Directions per hull volume estimate")
      ->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "Render a run directory as a table and P2 figures");
  report->add_option("--run", run_dir, "Run directory containing summary.json")->required()->check(CLI::ExistingDirectory);
  report->add_option("-o,--output", c.output, "Output directory (default: <run>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::string stage = "arguments";
  try {
    if (!report->parsed()) {
      for (int f : faces) check_face(f);
      check_face(face);
    }
    std::vector<int> ks;
    if (ablate->parsed()) ks = parse_range(factors);

    stage = "config";
    const PipelineConfig cfg = report->parsed() ? PipelineConfig{} : resolve(c);

    if (gen->parsed()) {
      const auto dir = output_dir(c.output, "gen");
      write_text(dir / "config.json", pipeline_config_to_json(cfg));
      for (int f : faces) {
        stage = "generation (face " + std::to_string(f) + ")";
        const auto ds = generate_for(f, cfg);
        stage = "writing dataset";
        write_dataset(ds, dir / ("face" + std::to_string(f) + ".csv"));
        std::cout << "face " << f << ": " << ds.size() << " records, hash "
                  << to_hex(dataset_hash(ds)) << "\n";
      }
    } else if (train->parsed()) {
      const auto dir = output_dir(c.output, "train");
      stage = "reading dataset";
      const auto ds = read_dataset(data_path);
      const int f = face_of(ds);
      stage = "split";
      const auto sp = split_dataset(ds, cfg.split, stage_seed(cfg.seed, "split", f));
      for (const auto& w : sp.warnings) std::cerr << "warning: " << w << "\n";
      stage = "training (face " + std::to_string(f) + ")";
      const auto model = train_face_model(f, subset(ds, sp.train), subset(ds, sp.validation),
                                          cfg.model, cfg.seed);
      stage = "writing checkpoint";
      save_checkpoint(model.checkpoint, dir / "checkpoint.json");
      write_text(dir / "train_log.csv", train_log_csv(model.log));
      write_dataset(subset(ds, sp.test), dir / "test.csv");
      write_text(dir / "config.json", pipeline_config_to_json(cfg));
      std::cout << "face " << f << ": " << sp.train.size() << " train, " << sp.validation.size()
                << " validation, " << sp.test.size() << " test; best epoch "
                << model.checkpoint.provenance.best_epoch << ", checksum "
                << to_hex(parameter_checksum(model.checkpoint.mlp)) << "\n";
    } else if (eval->parsed()) {
      const auto dir = output_dir(c.output, "eval");
      stage = "reading dataset";
      const auto ds = read_dataset(data_path);
      const int f = face_of(ds);
      stage = "loading checkpoint";
      const auto cp = load_checkpoint(checkpoint_path);
      stage = "evaluation";
      if (cp.provenance.face != f) {
        throw UsageError("checkpoint is for face " + std::to_string(cp.provenance.face) +
                         " but the dataset is face " + std::to_string(f));
      }
      const bool any_contact =
          std::any_of(ds.records.begin(), ds.records.end(), [](const auto& r) { return r.is_contact(); });
      const double threshold = any_contact ? non_contact_threshold(ds)
                                           : 0.9 * cfg.generation.force_quantum;
      const auto ranges = build_range_map(f, cfg.deformation, cfg.generation.protocol.depths);
      const auto rep = evaluate(cp, ds, threshold, ranges);
      stage = "writing results";
      write_eval_run(dir, rep, f, to_hex(dataset_hash(ds)), cfg);
      print_table({{"face" + std::to_string(f), rep.overall}});
    } else if (table1->parsed()) {
      const auto dir = output_dir(c.output, "table1");
      stage = "table1 study";
      const auto runs = run_table1(faces, cfg);
      stage = "writing results";
      write_table1_run(dir, runs, cfg);
      std::vector<TableRow> rows;
      for (const auto& r : runs) rows.push_back({"face" + std::to_string(r.face), r.report.overall});
      print_table(rows);
    } else if (unseen->parsed()) {
      const auto dir = output_dir(c.output, "unseen");
      stage = "unseen study";
      const auto res = run_unseen(face, cfg);
      stage = "writing results";
      write_unseen_run(dir, res, cfg);
      print_table({{"seen", res.seen.overall}, {"unseen", res.unseen.overall}});
    } else if (ablate->parsed()) {
      const auto dir = output_dir(c.output, "ablate");
      stage = "ablation study";
      const auto points = run_ablation(face, ks, cfg);
      stage = "writing results";
      write_ablation_run(dir, face, points, cfg);
      std::vector<TableRow> rows;
      for (const auto& p : points) rows.push_back({"k=" + std::to_string(p.k), p.report.overall});
      print_table(rows);
    } else if (cross->parsed()) {
      const auto dir = output_dir(c.output, "crossface");
      CrossfaceOptions opts;
      opts.samples_per_case = samples_per_case;
      stage = "crossface study";
      const auto res = run_crossface(cfg, opts);
      stage = "writing results";
      write_crossface_run(dir, res, opts, cfg);
      std::vector<TableRow> rows;
      for (const auto& cell : res.cells) {
        rows.push_back({"face" + std::to_string(cell.face) + " " + std::string(to_string(cell.mode)) +
                            (cell.bin < 0 ? " rest" : " " + std::to_string(cell.load).substr(0, 4)),
                        cell.report.overall});
      }
      print_table(rows);
    } else if (sens->parsed()) {
      const auto dir = output_dir(c.output, "sensitivity");
      stage = "sensitivity study (training)";
      const auto run = run_face(face, cfg);
      SensitivityOptions opts;
      opts.hull.samples = hull_samples;
      stage = "sensitivity study (hull volumes)";
      const auto res = run_sensitivity(run, cfg, opts);
      stage = "writing results";
      write_sensitivity_run(dir, res, run, cfg);
      std::cout << "spearman(delta, E_f %) = " << res.rho_ef
                << "  spearman(delta, A_sim) = " << res.rho_a_sim
                << "  spearman(delta, E_loc) = " << res.rho_e_eucl << "\n";
    } else if (report->parsed()) {
      const fs::path out = c.output.empty() ? fs::path(run_dir) / "report" : output_dir(c.output, "report");
      stage = "report";
      render_report(run_dir, out);
      std::cout << "wrote " << (out / "table.txt").string() << "\n";
    }
  } catch (const BadUsage& e) {
    std::cerr << "instobj: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "instobj: " << stage << " failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
