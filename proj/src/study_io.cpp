#include "instobj/study_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "instobj/config_io.hpp"
#include "instobj/errors.hpp"
#include "instobj/hash.hpp"
#include "json.hpp"

namespace instobj {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double from_num(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json grid_json(const std::vector<double>& g) {
  json a = json::array();
  for (double v : g) a.push_back(num(v));
  return a;
}

std::vector<double> grid_from(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(from_num(v));
  return out;
}

json metric_json(const MetricSummary& m) {
  return {{"n", m.n}, {"mean", num(m.mean)}, {"p10", num(m.p10)}, {"p50", num(m.p50)},
          {"p90", num(m.p90)}};
}

MetricSummary metric_from(const json& j) {
  MetricSummary m;
  m.n = j.at("n").get<std::size_t>();
  m.mean = from_num(j.at("mean"));
  m.p10 = from_num(j.at("p10"));
  m.p50 = from_num(j.at("p50"));
  m.p90 = from_num(j.at("p90"));
  return m;
}

json summary_json(const GroupSummary& g) {
  return {{"count", g.count},
          {"contact", g.contact},
          {"non_contact", g.non_contact},
          {"a_sim", metric_json(g.a_sim)},
          {"e_x", metric_json(g.e_x)},
          {"e_y", metric_json(g.e_y)},
          {"e_eucl", metric_json(g.e_eucl)},
          {"ef_pct", metric_json(g.ef_pct)},
          {"ef_n", metric_json(g.ef_n)},
          {"a_non", num(g.a_non)}};
}

GroupSummary summary_from(const json& j) {
  GroupSummary g;
  g.count = j.at("count").get<std::size_t>();
  g.contact = j.at("contact").get<std::size_t>();
  g.non_contact = j.at("non_contact").get<std::size_t>();
  g.a_sim = metric_from(j.at("a_sim"));
  g.e_x = metric_from(j.at("e_x"));
  g.e_y = metric_from(j.at("e_y"));
  g.e_eucl = metric_from(j.at("e_eucl"));
  g.ef_pct = metric_from(j.at("ef_pct"));
  g.ef_n = metric_from(j.at("ef_n"));
  g.a_non = from_num(j.at("a_non"));
  return g;
}

json report_json(const MetricsReport& r) {
  json j = summary_json(r.overall);
  j["grid"] = r.grid;
  j["grids"] = {{"a_sim", grid_json(r.grid_a_sim)},
                {"e_eucl", grid_json(r.grid_e_eucl)},
                {"ef_pct", grid_json(r.grid_ef_pct)}};
  return j;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string log_csv(const std::vector<EpochLog>& log) {
  std::string out = "epoch,train_loss,val_loss\n";
  char buf[96];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g\n", e.epoch, e.train_loss, e.val_loss);
    out += buf;
  }
  return out;
}

void write_grid_pgm(const fs::path& path, const std::vector<double>& values, int grid,
                    const std::string& what) {
  double top = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) top = std::max(top, v);
  }
  char comment[128];
  std::snprintf(comment, sizeof comment, "%s max=%.6g", what.c_str(), top);
  write_text(path, format_pgm(values, grid, top, comment));
}

// One ground-truth / prediction pair per probe type from the test split.
void write_examples(const fs::path& dir, const FaceRun& run) {
  for (int count = 1; count <= 3; ++count) {
    for (auto i : run.split.test) {
      const auto& r = run.dataset.records[i];
      if (static_cast<int>(r.contacts.size()) != count) continue;
      const auto& cp = run.model.checkpoint;
      const HallFrame frame = r.hall;
      const auto pred = predict(cp, std::span<const HallFrame>(&frame, 1)).front();
      const std::string stem = "face" + std::to_string(run.face) + "_p" + std::to_string(count);
      fs::create_directories(dir);
      write_pgm(encode(r.contacts, r.face, pred.size), cp.stats.f_max, dir / (stem + "_gt.pgm"));
      write_pgm(pred, cp.stats.f_max, dir / (stem + "_pred.pgm"));
      break;
    }
  }
}

void write_report_grids(const fs::path& dir, const std::string& stem, const MetricsReport& r) {
  write_grid_pgm(dir / (stem + "_a_sim.pgm"), r.grid_a_sim, r.grid, "a_sim");
  write_grid_pgm(dir / (stem + "_e_eucl.pgm"), r.grid_e_eucl, r.grid, "e_eucl_px");
  write_grid_pgm(dir / (stem + "_ef_pct.pgm"), r.grid_ef_pct, r.grid, "ef_pct");
}

json face_run_entry(const fs::path& dir, const FaceRun& run) {
  const std::string name = "face" + std::to_string(run.face);
  const fs::path fdir = dir / name;
  save_checkpoint(run.model.checkpoint, fdir / "checkpoint.json");
  write_text(fdir / "samples.csv", format_samples_csv(run.report.samples));
  write_text(fdir / "train_log.csv", log_csv(run.model.log));
  write_examples(fdir / "figures", run);
  write_report_grids(fdir / "figures", name, run.report);
  return {{"label", name},
          {"face", run.face},
          {"data_hash", to_hex(dataset_hash(run.dataset))},
          {"records", run.dataset.size()},
          {"train_size", run.split.train.size()},
          {"validation_size", run.split.validation.size()},
          {"test_size", run.split.test.size()},
          {"split_warnings", run.split.warnings},
          {"threshold_n", run.threshold},
          {"best_epoch", run.model.checkpoint.provenance.best_epoch},
          {"checksum", to_hex(parameter_checksum(run.model.checkpoint.mlp))},
          {"metrics", report_json(run.report)}};
}

json header(const std::string& study, const PipelineConfig& cfg) {
  return {{"study", study},
          {"preset", cfg.model.name},
          {"scale", cfg.scale},
          {"seed", cfg.seed},
          {"entries", json::array()}};
}

std::string fmt(const char* f, double v) {
  if (!std::isfinite(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string format_metrics_table(std::span<const TableRow> rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %-10s %-30s %-22s %-6s\n", "", "Avg. A_sim",
                "Avg. E_loc [1e-4 px] (X, Y)", "Avg. E_f [%] (N)", "A_non");
  out += line;
  for (const auto& r : rows) {
    const auto& s = r.summary;
    const std::string eloc = fmt("%.3g", s.e_eucl.mean * 1e4) + " (" +
                             fmt("%.3g", s.e_x.mean * 1e4) + ", " + fmt("%.3g", s.e_y.mean * 1e4) +
                             ")";
    const std::string ef = fmt("%.3g", s.ef_pct.mean) + " (" + fmt("%.3g", s.ef_n.mean) + "N)";
    std::snprintf(line, sizeof line, "%-24s %-10s %-30s %-22s %-6s\n", r.label.c_str(),
                  fmt("%.4f", s.a_sim.mean).c_str(), eloc.c_str(), ef.c_str(),
                  fmt("%.3f", s.a_non).c_str());
    out += line;
  }
  return out;
}

void write_table1_run(const fs::path& dir, std::span<const FaceRun> runs,
                      const PipelineConfig& cfg) {
  write_text(dir / "config.json", pipeline_config_to_json(cfg));
  json summary = header("table1", cfg);
  std::vector<TableRow> rows;
  for (const auto& run : runs) {
    summary["entries"].push_back(face_run_entry(dir, run));
    rows.push_back({"face" + std::to_string(run.face), run.report.overall});
  }
  write_json(dir / "summary.json", summary);
  write_text(dir / "table.txt", format_metrics_table(rows));
}

void write_unseen_run(const fs::path& dir, const UnseenResult& res, const PipelineConfig& cfg) {
  write_text(dir / "config.json", pipeline_config_to_json(cfg));
  save_checkpoint(res.model.checkpoint, dir / "checkpoint.json");
  write_text(dir / "train_log.csv", log_csv(res.model.log));
  write_text(dir / "samples_seen.csv", format_samples_csv(res.seen.samples));
  write_text(dir / "samples_unseen.csv", format_samples_csv(res.unseen.samples));
  write_report_grids(dir / "figures", "seen", res.seen);
  write_report_grids(dir / "figures", "unseen", res.unseen);

  int within = 0, total = 0;
  for (double v : res.unseen.grid_e_eucl) {
    if (std::isnan(v)) continue;
    ++total;
    if (v <= std::sqrt(2.0) + 1e-9) ++within;
  }
  json summary = header("unseen", cfg);
  summary["face"] = res.face;
  summary["train_size"] = res.train_size;
  summary["unseen_locations"] = total;
  summary["unseen_locations_within_diagonal"] = within;
  summary["entries"].push_back({{"label", "seen"}, {"metrics", report_json(res.seen)}});
  summary["entries"].push_back({{"label", "unseen"}, {"metrics", report_json(res.unseen)}});
  write_json(dir / "summary.json", summary);
  const TableRow rows[] = {{"seen", res.seen.overall}, {"unseen", res.unseen.overall}};
  write_text(dir / "table.txt", format_metrics_table(rows));
}

void write_ablation_run(const fs::path& dir, int face, std::span<const AblationPoint> points,
                        const PipelineConfig& cfg) {
  write_text(dir / "config.json", pipeline_config_to_json(cfg));
  json summary = header("ablation", cfg);
  summary["face"] = face;
  std::vector<TableRow> rows;
  std::vector<SampleRecord> all;
  for (const auto& p : points) {
    char label[32];
    std::snprintf(label, sizeof label, "k%02d", p.k);
    summary["entries"].push_back({{"label", label},
                                  {"k", p.k},
                                  {"train_size", p.train_size},
                                  {"checksum", to_hex(p.checksum)},
                                  {"metrics", report_json(p.report)}});
    rows.push_back({label, p.report.overall});
    all.insert(all.end(), p.report.samples.begin(), p.report.samples.end());
  }
  write_json(dir / "summary.json", summary);
  write_text(dir / "samples.csv", format_samples_csv(all));
  write_text(dir / "table.txt", format_metrics_table(rows));
}

void write_crossface_run(const fs::path& dir, const CrossfaceResult& res,
                         const CrossfaceOptions& options, const PipelineConfig& cfg) {
  write_text(dir / "config.json", pipeline_config_to_json(cfg));
  json summary = header("crossface", cfg);
  summary["bins"] = options.bins;
  summary["shift_fraction"] = options.shift_fraction;
  summary["calibration"] = json::array();
  for (const auto& run : res.calibration) {
    summary["calibration"].push_back(face_run_entry(dir / "calibration", run));
  }
  std::vector<TableRow> rows;
  std::vector<SampleRecord> all;
  for (const auto& c : res.cells) {
    char label[64];
    if (c.bin < 0) {
      std::snprintf(label, sizeof label, "face%d/%s/rest", c.face,
                    std::string(to_string(c.mode)).c_str());
    } else {
      std::snprintf(label, sizeof label, "face%d/%s/load%.1f", c.face,
                    std::string(to_string(c.mode)).c_str(), c.load);
    }
    // Localisation errors below 2.8 px count as correct.
    std::size_t flagged = 0, contacts = 0;
    for (const auto& s : c.report.samples) {
      if (s.contact_count == 0) continue;
      ++contacts;
      if (s.e_eucl < 2.8) ++flagged;
    }
    summary["entries"].push_back(
        {{"label", label},
         {"face", c.face},
         {"mode", to_string(c.mode)},
         {"bin", c.bin},
         {"load", c.load},
         {"e_loc_below_2_8", contacts ? num(static_cast<double>(flagged) / contacts) : json(nullptr)},
         {"metrics", report_json(c.report)}});
    rows.push_back({label, c.report.overall});
    all.insert(all.end(), c.report.samples.begin(), c.report.samples.end());
  }
  write_json(dir / "summary.json", summary);
  write_text(dir / "samples.csv", format_samples_csv(all));
  write_text(dir / "table.txt", format_metrics_table(rows));
}

void write_sensitivity_run(const fs::path& dir, const SensitivityResult& res, const FaceRun& run,
                           const PipelineConfig& cfg) {
  write_text(dir / "config.json", pipeline_config_to_json(cfg));
  json summary = header("sensitivity", cfg);
  summary["face"] = res.face;
  summary["grid"] = res.grid;
  summary["delta"] = grid_json(res.delta);
  summary["volume_rel_se"] = grid_json(res.volume_rel_se);
  summary["spearman"] = {{"ef_pct", num(res.rho_ef)},
                         {"a_sim", num(res.rho_a_sim)},
                         {"e_eucl", num(res.rho_e_eucl)}};
  summary["entries"].push_back(face_run_entry(dir, run));
  write_json(dir / "summary.json", summary);
  write_grid_pgm(dir / "figures" / "delta.pgm", res.delta, res.grid, "delta");
  const TableRow rows[] = {{"face" + std::to_string(run.face), run.report.overall}};
  write_text(dir / "table.txt", format_metrics_table(rows));
}

void write_eval_run(const fs::path& dir, const MetricsReport& report, int face,
                    const std::string& data_hash, const PipelineConfig& cfg) {
  json summary = header("eval", cfg);
  summary["face"] = face;
  summary["data_hash"] = data_hash;
  summary["entries"].push_back(
      {{"label", "face" + std::to_string(face)}, {"metrics", report_json(report)}});
  write_json(dir / "summary.json", summary);
  write_text(dir / "samples.csv", format_samples_csv(report.samples));
  const TableRow rows[] = {{"face" + std::to_string(face), report.overall}};
  write_text(dir / "table.txt", format_metrics_table(rows));
}

void render_report(const fs::path& run_dir, const fs::path& out_dir) {
  std::ifstream in(run_dir / "summary.json");
  if (!in) throw UsageError("no summary.json in " + run_dir.string());
  json j;
  try {
    j = json::parse(std::string(std::istreambuf_iterator<char>(in), {}));
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed summary.json: ") + e.what());
  }
  std::vector<TableRow> rows;
  try {
    auto add = [&](const json& e) {
      if (!e.contains("metrics")) return;
      const auto& m = e.at("metrics");
      std::string label = e.at("label").get<std::string>();
      rows.push_back({label, summary_from(m)});
      std::string stem = label;
      std::replace(stem.begin(), stem.end(), '/', '_');
      const int grid = m.at("grid").get<int>();
      for (const char* what : {"a_sim", "e_eucl", "ef_pct"}) {
        write_grid_pgm(out_dir / (stem + "_" + what + ".pgm"),
                       grid_from(m.at("grids").at(what)), grid, what);
      }
    };
    if (j.contains("calibration")) {
      for (const auto& e : j.at("calibration")) add(e);
    }
    for (const auto& e : j.at("entries")) add(e);
    if (j.contains("delta")) {
      write_grid_pgm(out_dir / "delta.pgm", grid_from(j.at("delta")), j.at("grid").get<int>(),
                     "delta");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("unexpected summary.json layout: ") + e.what());
  }
  std::string text = "study: " + j.value("study", std::string("?")) + "\n";
  text += format_metrics_table(rows);
  write_text(out_dir / "table.txt", text);
}

}  // namespace instobj
