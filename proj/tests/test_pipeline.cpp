#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "instobj/config_io.hpp"
#include "instobj/errors.hpp"
#include "instobj/experiments.hpp"
#include "instobj/hash.hpp"
#include "instobj/study_io.hpp"

using namespace instobj;
namespace fs = std::filesystem;

namespace {

// Records carrying only case ids and contact counts, shaped like a full campaign.
Dataset skeleton_campaign(int face, double scale) {
  Dataset ds;
  const auto cov = default_coverage();
  std::vector<CaseDescriptor> cases;
  for (int k = 1; k <= 3; ++k) {
    auto c = enumerate_cases(face, probe_for(k), cov);
    cases.insert(cases.end(), c.begin(), c.end());
  }
  for (auto& c : non_contact_cases(face, cov)) cases.push_back(c);
  const int n = scaled_samples(1000, scale);
  for (const auto& c : cases) {
    for (int s = 0; s < n; ++s) {
      DatasetRecord r;
      r.face = face;
      r.case_id = c.case_id;
      r.sample_index = s;
      r.hall.face_index = face;
      for (const auto& p : c.coords) r.contacts.push_back({p, 1.0});
      ds.records.push_back(std::move(r));
    }
  }
  return ds;
}

PipelineConfig tiny_config() {
  PipelineConfig cfg;
  cfg.model = small_preset();
  cfg.model.sizes = {9, 16, 100};
  cfg.model.train.max_epochs = 3;
  cfg.model.train.batch_size = 32;
  cfg.scale = 0.01;
  cfg.seed = 5;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Ablation, PaperCountAtFactor32) {
  const auto ds = skeleton_campaign(1, 1.0);
  EXPECT_EQ(ds.size(), 143000u);
  const auto sp = split_dataset(ds, {}, stage_seed(0, "split", 1));
  EXPECT_EQ(sp.train.size(), 85800u);
  const auto kept = downsample(ds, sp.train, 5, stage_seed(0, "downsample", 1));
  EXPECT_EQ(kept.size(), 2683u);
  std::map<std::size_t, std::size_t> per_count;
  for (auto i : kept) per_count[ds.records[i].contacts.size()]++;
  EXPECT_EQ(per_count[1], 1875u);
  EXPECT_EQ(per_count[2], 488u);
  EXPECT_EQ(per_count[3], 263u);
  EXPECT_EQ(per_count[0], 57u);
}

TEST(Ablation, DownsampleProperties) {
  const auto ds = skeleton_campaign(2, 0.02);
  const auto sp = split_dataset(ds, {}, 3);
  EXPECT_EQ(downsample(ds, sp.train, 0, 1), sp.train);
  std::size_t prev = sp.train.size();
  for (int k = 1; k <= 10; ++k) {
    const auto kept = downsample(ds, sp.train, k, 1);
    EXPECT_LE(kept.size(), prev);
    EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end()));
    EXPECT_TRUE(std::includes(sp.train.begin(), sp.train.end(), kept.begin(), kept.end()));
    EXPECT_EQ(kept, downsample(ds, sp.train, k, 1));
    prev = kept.size();
  }
  // ceil(1200/1024) singles plus one from each smaller group.
  EXPECT_EQ(downsample(ds, sp.train, 10, 1).size(), 5u);
  EXPECT_THROW(downsample(ds, sp.train, -1, 1), UsageError);
}

TEST(Seeds, StageSeedsAreDistinctAndStable) {
  EXPECT_EQ(stage_seed(7, "train", 1), derive_seed(7, "train/face1"));
  EXPECT_NE(stage_seed(7, "train", 1), stage_seed(7, "train", 2));
  EXPECT_NE(stage_seed(7, "train", 1), stage_seed(7, "init", 1));
  EXPECT_NE(stage_seed(7, "train", 1), stage_seed(8, "train", 1));
}

TEST(Config, JsonRoundTrip) {
  PipelineConfig cfg = tiny_config();
  cfg.deformation.kernel_sigma = 5.5;
  cfg.generation.sensor.noise_sd_ut = 1.25;
  cfg.object.faces[2].sensors[1].position.z() = -1.0;
  const auto text = pipeline_config_to_json(cfg);
  const auto back = pipeline_config_from_json(text);
  EXPECT_EQ(pipeline_config_to_json(back), text);
  EXPECT_EQ(back.model.sizes, cfg.model.sizes);
  EXPECT_EQ(back.deformation.kernel_sigma, 5.5);
  EXPECT_EQ(back.object.faces[2].sensors[1].position.z(), -1.0);
}

TEST(Config, PartialOverridesAndErrors) {
  const auto cfg = pipeline_config_from_json(R"({"seed": 3, "model": {"preset": "small"}})");
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.model.sizes, small_layer_sizes());
  EXPECT_EQ(cfg.scale, PipelineConfig{}.scale);
  EXPECT_THROW(pipeline_config_from_json(R"({"sede": 3})"), ConfigError);
  EXPECT_THROW(pipeline_config_from_json(R"({"seed": "x"})"), ConfigError);
  EXPECT_THROW(pipeline_config_from_json(R"({"scale": 2})"), ConfigError);
  EXPECT_THROW(pipeline_config_from_json("{"), ConfigError);
  EXPECT_THROW(pipeline_config_from_json(R"({"deformation": {"kernel_sigma": -1}})"), ConfigError);
  EXPECT_THROW(pipeline_config_from_json(R"({"model": {"preset": "huge"}})"), ConfigError);
}

TEST(Pipeline, RunFaceDeterministicAndEvaluateChecksFace) {
  const auto cfg = tiny_config();
  const auto a = run_face(2, cfg);
  const auto b = run_face(2, cfg);
  EXPECT_EQ(a.model.checkpoint.mlp, b.model.checkpoint.mlp);
  EXPECT_EQ(format_samples_csv(a.report.samples), format_samples_csv(b.report.samples));
  EXPECT_EQ(a.model.log.size(), 4u);
  EXPECT_EQ(a.report.samples.size(), a.split.test.size());
  EXPECT_TRUE(std::isfinite(a.report.overall.a_sim.mean));
  EXPECT_TRUE(std::isfinite(a.report.overall.ef_pct.mean));
  EXPECT_TRUE(std::isfinite(a.report.overall.a_non));

  const auto other = generate_for(3, cfg);
  const auto ranges = build_range_map(3, cfg.deformation);
  try {
    evaluate(a.model.checkpoint, other, a.threshold, ranges);
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find('2'), std::string::npos);
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
  }
}

TEST(Pipeline, AblationCheckpointAtZeroMatchesRunFace) {
  const auto cfg = tiny_config();
  const int ks[] = {0, 3};
  const auto pts = run_ablation(1, ks, cfg);
  const auto run = run_face(1, cfg);
  EXPECT_EQ(pts[0].checksum, parameter_checksum(run.model.checkpoint.mlp));
  EXPECT_EQ(pts[0].train_size, run.split.train.size());
  EXPECT_LT(pts[1].train_size, pts[0].train_size);
}

TEST(Pipeline, UnseenUsesOddLattice) {
  const auto seen = seen_locations();
  EXPECT_EQ(seen.size(), 25u);
  for (const auto& c : seen) {
    EXPECT_EQ(c.x % 2, 1);
    EXPECT_EQ(c.y % 2, 1);
  }
  const auto res = run_unseen(1, tiny_config());
  for (const auto& s : res.unseen.samples) {
    EXPECT_EQ(s.contact_count, 1);
    EXPECT_FALSE(s.location.x % 2 == 1 && s.location.y % 2 == 1);
  }
  for (const auto& s : res.seen.samples) {
    if (s.contact_count == 1) EXPECT_TRUE(s.location.x % 2 == 1 && s.location.y % 2 == 1);
  }
}

TEST(Pipeline, GraspCasesLayout) {
  const auto cases = grasp_cases(3);
  std::map<int, int> counts;
  for (const auto& c : cases) counts[c.contact_count]++;
  EXPECT_EQ(counts[1], 5);
  EXPECT_EQ(counts[2], 3);
  EXPECT_EQ(counts[3], 2);
}

TEST(StudyIo, WritesAreReproducibleAndReportRenders) {
  const auto cfg = tiny_config();
  const std::vector<FaceRun> runs{run_face(1, cfg)};
  const fs::path root = fs::temp_directory_path() / "instobj_study_io";
  fs::remove_all(root);
  write_table1_run(root / "a", runs, cfg);
  write_table1_run(root / "b", runs, cfg);
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "a");
    EXPECT_EQ(slurp(e.path()), slurp(root / "b" / rel)) << rel;
  }
  EXPECT_TRUE(fs::exists(root / "a" / "face1" / "checkpoint.json"));
  EXPECT_TRUE(fs::exists(root / "a" / "face1" / "figures" / "face1_p1_gt.pgm"));
  render_report(root / "a", root / "report");
  const auto table = slurp(root / "report" / "table.txt");
  EXPECT_NE(table.find("Avg. A_sim"), std::string::npos);
  EXPECT_NE(table.find("face1"), std::string::npos);
  EXPECT_TRUE(fs::exists(root / "report" / "face1_a_sim.pgm"));
  EXPECT_THROW(render_report(root / "missing", root / "x"), UsageError);
  fs::remove_all(root);
}
