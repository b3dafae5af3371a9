// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "instobj/checkpoint.hpp"
#include "instobj/datagen.hpp"
#include "instobj/experiments.hpp"
#include "instobj/hull_volume.hpp"
#include "instobj/magnetics.hpp"
#include "instobj/metrics.hpp"
#include "instobj/study_io.hpp"

namespace fs = std::filesystem;
using namespace instobj;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back((ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Independent dipole oracle: positions in mm, result in tesla.
Vec3 oracle_field(const Vec3& at_mm, const Vec3& m, const Vec3& point_mm) {
  const Vec3 r = (point_mm - at_mm) * 1e-3;
  const double d = r.norm();
  const Vec3 u = r / d;
  return 1e-7 * (3.0 * m.dot(u) * u - m) / (d * d * d);
}

// ---- 1 -------------------------------------------------------------------

Outcome physics_oracles() {
  Outcome out;
  DipoleState axial{Vec3::Zero(), Vec3(0, 0, 0.01), 1};
  const double bz = dipole_field(axial, Vec3(0, 0, 20)).z();
  out.require(std::abs(bz - 2.5e-4) / 2.5e-4 <= 1e-12, "axial field " + fmt("%.15g T", bz));

  std::mt19937_64 rng(20240);
  std::uniform_real_distribution<double> box(-20, 20), unit(-1, 1), mag(1e-3, 0.05), dist(2, 40);
  auto random_dir = [&] {
    Vec3 v;
    do v = Vec3(unit(rng), unit(rng), unit(rng)); while (v.norm() < 0.1);
    return v.normalized();
  };
  double worst_oracle = 0, worst_cube = 0;
  for (int i = 0; i < 1000; ++i) {
    const DipoleState d{Vec3(box(rng), box(rng), box(rng)), mag(rng) * random_dir(), 1};
    const Vec3 off = dist(rng) * random_dir();
    const Vec3 b1 = dipole_field(d, d.position + off);
    const Vec3 b2 = dipole_field(d, d.position + 2.0 * off);
    worst_oracle = std::max(worst_oracle,
                            (b1 - oracle_field(d.position, d.moment, d.position + off)).norm() / b1.norm());
    worst_cube = std::max(worst_cube, (b1 / 8.0 - b2).norm() / b2.norm());
  }
  out.require(worst_oracle <= 1e-12, "1000 configs vs oracle, worst rel " + fmt("%.2e", worst_oracle));
  out.require(worst_cube <= 1e-12, "1000 configs inverse cube, worst rel " + fmt("%.2e", worst_cube));

  const auto cfg = default_config();
  std::uniform_real_distribution<double> scale(0.5, 1.5), jitter(-0.5, 0.5);
  double worst_sum = 0;
  for (int i = 0; i < 1000; ++i) {
    auto dips = rest_dipoles(cfg);
    for (auto& d : dips) {
      d.moment *= scale(rng);
      d.position += Vec3(jitter(rng), jitter(rng), jitter(rng));
    }
    const int face = 1 + static_cast<int>(rng() % kActiveFaces);
    const auto frame = read_sensors_exact(cfg, dips, face);
    const auto& fc = cfg.face(face);
    for (std::size_t s = 0; s < fc.sensors.size(); ++s) {
      const Vec3 p = fc.frame.to_object(fc.sensors[s].position);
      Vec3 total = Vec3::Zero();
      double magnitude = 0;
      for (const auto& d : dips) {
        const Vec3 b = oracle_field(d.position, d.moment, p);
        total += b;
        magnitude += b.norm();
      }
      const Vec3 expect = fc.sensors[s].orientation * total * 1e6;
      for (int k = 0; k < 3; ++k) {
        const double err = std::abs(frame.values[3 * s + k] - expect[k]) / (magnitude * 1e6);
        worst_sum = std::max(worst_sum, err);
      }
    }
  }
  out.require(worst_sum <= 1e-12,
              "1000 configs superposition at sensors, worst rel " + fmt("%.2e", worst_sum));
  return out;
}

// ---- 2 -------------------------------------------------------------------

double& param(Mlp& m, std::size_t layer, bool bias, std::size_t i) {
  return bias ? m.layers[layer].bias[i] : m.layers[layer].weight[i];
}

Outcome gradient_check() {
  Outcome out;
  Mlp mlp = init_mlp(small_layer_sizes(), 11);
  for (auto& l : mlp.layers) std::fill(l.bias.begin(), l.bias.end(), 0.05);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix x(16, 9), y(16, 100);
  for (auto& v : x.data) v = u(rng);
  for (auto& v : y.data) v = u(rng);
  Gradients g = zero_gradients(mlp);
  loss_and_gradients(mlp, x, y, g);

  const double eps = 1e-5;
  int checked = 0;
  double worst = 0;
  for (int trial = 0; trial < 1000 && checked < 200; ++trial) {
    const std::size_t layer = rng() % mlp.layers.size();
    const bool bias = rng() % 4 == 0;
    const std::size_t n = bias ? mlp.layers[layer].bias.size() : mlp.layers[layer].weight.size();
    const std::size_t i = rng() % n;
    const double analytic = bias ? g.bias[layer][i] : g.weight[layer][i];
    Mlp plus = mlp, minus = mlp;
    param(plus, layer, bias, i) += eps;
    param(minus, layer, bias, i) -= eps;
    const double numeric =
        (mse_loss(forward(plus, x), y) - mse_loss(forward(minus, x), y)) / (2 * eps);
    if (std::abs(analytic) < 1e-9 && std::abs(numeric) < 1e-9) continue;  // inactive unit
    worst = std::max(worst, std::abs(analytic - numeric) / (std::abs(analytic) + std::abs(numeric)));
    ++checked;
  }
  out.require(checked >= 100, std::to_string(checked) + " coordinates of [9,64,64,100]");
  out.require(worst < 1e-4, "worst relative error " + fmt("%.2e", worst));
  return out;
}

// ---- 3 -------------------------------------------------------------------

Heatmap random_map(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 5);
  Heatmap h;
  for (auto& v : h.values) v = u(rng);
  return h;
}

Eigen::MatrixXd box_vertices(const std::vector<double>& sides) {
  const int d = static_cast<int>(sides.size());
  Eigen::MatrixXd p(1 << d, d);
  for (int i = 0; i < (1 << d); ++i) {
    for (int k = 0; k < d; ++k) p(i, k) = (i >> k & 1) ? sides[static_cast<std::size_t>(k)] : 0.0;
  }
  return p;
}

Outcome metric_fixtures() {
  Outcome out;
  std::mt19937_64 rng(31);
  const Heatmap h = random_map(rng);
  const auto self = match(h, h);
  out.require(std::abs(self.a_sim - 1.0) <= 1e-12 && self.dx == 0 && self.dy == 0,
              "self-match A_sim " + fmt("%.15g", self.a_sim) + " at zero displacement");

  Heatmap shifted;
  for (int y = 1; y <= 10; ++y) {
    for (int x = 2; x <= 10; ++x) shifted.at({x, y}) = h.at(x - 1, y);
  }
  const auto sm = match(shifted, h);
  out.require(sm.dx == 1 && sm.dy == 0 && sm.e_eucl == 1.0, "one-pixel shift found at (" +
                                                                std::to_string(sm.dx) + ", " +
                                                                std::to_string(sm.dy) + ")");

  const Heatmap pred = random_map(rng);
  Heatmap affine = pred;
  for (auto& v : affine.values) v = 2.5 * v + 0.75;
  const auto m0 = match(pred, h), m1 = match(affine, h);
  out.require(std::abs(m0.a_sim - m1.a_sim) <= 1e-12 && m0.dx == m1.dx && m0.dy == m1.dy,
              "affine invariance, |dA| " + fmt("%.1e", std::abs(m0.a_sim - m1.a_sim)));

  const auto ranges = build_range_map(1, default_deformation_params());
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Heatmap gt;
    std::vector<GridCoord> pts;
    for (int c = 0; c < 3; ++c) {
      const GridCoord p{1 + static_cast<int>(rng() % 10), 1 + static_cast<int>(rng() % 10)};
      gt.at(p) = 1.0 + static_cast<double>(rng() % 20);
      pts.push_back(p);
    }
    const Heatmap pr = random_map(rng);
    double n = 0, pct = 0;
    int cnt = 0;
    for (int i = 0; i < 100; ++i) {
      const GridCoord p{1 + i % 10, 1 + i / 10};
      if (!(gt.at(p) > 0)) continue;
      const auto [lo, hi] = ranges.at(p);
      n += std::abs(pr.at(p) - gt.at(p));
      pct += std::abs(pr.at(p) - gt.at(p)) / (hi - lo) * 100;
      ++cnt;
    }
    const auto fe = force_error(pr, gt, ranges);
    worst = std::max({worst, std::abs(fe.newtons - n / cnt) / (n / cnt),
                      std::abs(fe.percent - pct / cnt) / (pct / cnt)});
  }
  out.require(worst <= 1e-12, "E_f percent and newtons vs oracle, worst rel " + fmt("%.1e", worst));

  Eigen::MatrixXd simplex = Eigen::MatrixXd::Zero(10, 9);
  for (int i = 0; i < 9; ++i) simplex(i + 1, i) = 1.0;
  HullVolumeOptions opt;
  opt.samples = 200000;
  opt.seed = 3;
  const auto sv = hull_volume(simplex, opt);
  const double truth = 1.0 / 362880.0;
  out.require(std::abs(sv.volume - truth) / truth <= 0.05,
              "9-simplex volume rel err " + fmt("%.4f", std::abs(sv.volume - truth) / truth));
  opt.samples = 50000;
  for (const auto& sides : {std::vector<double>{1, 2, 3},
                            std::vector<double>{0.5, 1, 1.5, 2, 2.5, 3, 1, 1, 2}}) {
    double vol = 1;
    for (double s : sides) vol *= s;
    const double err = std::abs(hull_volume(box_vertices(sides), opt).volume - vol) / vol;
    out.require(err <= 0.05, std::to_string(sides.size()) + "-D box rel err " + fmt("%.4f", err));
  }
  return out;
}

// ---- 4 -------------------------------------------------------------------

std::string summary_line(const std::string& label, const GroupSummary& s) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s A_sim %.4f  E_loc %.4f px  E_f %.2f%%  A_non %.3f",
                label.c_str(), s.a_sim.mean, s.e_eucl.mean, s.ef_pct.mean, s.a_non);
  return buf;
}

Outcome table1(const std::vector<FaceRun>& runs, bool paper) {
  Outcome out;
  const double a_min = paper ? 0.99 : 0.95;
  const double ef_max = paper ? 5.0 : 10.0;
  for (const auto& r : runs) {
    const auto& s = r.report.overall;
    const bool ok = s.a_sim.mean >= a_min && s.e_eucl.mean <= 0.05 && s.ef_pct.mean <= ef_max &&
                    s.a_non == 1.0;
    out.require(ok, summary_line("face" + std::to_string(r.face), s));
  }
  out.notes.push_back("     thresholds A_sim >= " + fmt("%.2f", a_min) + ", E_loc <= 0.05 px, E_f <= " +
                      fmt("%.0f%%", ef_max) + ", A_non = 1");
  return out;
}

// ---- 5 -------------------------------------------------------------------

Outcome unseen(const UnseenResult& u) {
  Outcome out;
  const auto& seen = u.seen.overall;
  const auto& other = u.unseen.overall;
  out.require(other.ef_pct.mean >= 3.0 * seen.ef_pct.mean,
              "unseen E_f " + fmt("%.2f%%", other.ef_pct.mean) + " vs seen " +
                  fmt("%.2f%%", seen.ef_pct.mean) + " (ratio " +
                  fmt("%.2f", other.ef_pct.mean / seen.ef_pct.mean) + ", need >= 3)");
  out.require(seen.e_eucl.mean <= 0.05, "seen E_loc " + fmt("%.4f px", seen.e_eucl.mean));
  int n = 0, close = 0;
  for (double e : u.unseen.grid_e_eucl) {
    if (std::isnan(e)) continue;
    ++n;
    close += e <= std::sqrt(2.0);
  }
  const double frac = n ? static_cast<double>(close) / n : 0.0;
  out.require(frac >= 0.6, std::to_string(close) + "/" + std::to_string(n) +
                               " unseen locations within 1.414 px");
  return out;
}

// ---- 6 -------------------------------------------------------------------

Outcome ablation(const std::vector<AblationPoint>& pts, std::uint64_t seed) {
  Outcome out;
  const auto& a = pts.front().report.overall;
  const auto& b = pts.back().report.overall;
  out.require(b.a_sim.mean < a.a_sim.mean, "A_sim " + fmt("%.4f", a.a_sim.mean) + " -> " +
                                               fmt("%.4f", b.a_sim.mean));
  out.require(b.e_eucl.mean > a.e_eucl.mean, "E_loc " + fmt("%.4f", a.e_eucl.mean) + " -> " +
                                                 fmt("%.4f", b.e_eucl.mean));
  out.require(b.ef_pct.mean > a.ef_pct.mean, "E_f " + fmt("%.2f", a.ef_pct.mean) + " -> " +
                                                 fmt("%.2f", b.ef_pct.mean));
  out.require(b.a_non < a.a_non, "A_non " + fmt("%.3f", a.a_non) + " -> " + fmt("%.3f", b.a_non));

  PipelineConfig full;
  full.scale = 1.0;
  full.seed = seed;
  const Dataset ds = generate_for(1, full);
  const auto sp = split_dataset(ds, full.split, stage_seed(seed, "split", 1));
  const auto kept = downsample(ds, sp.train, 5, stage_seed(seed, "downsample", 1));
  out.require(ds.size() == 143000 && sp.train.size() == 85800 && kept.size() == 2683,
              "scale 1.0: " + std::to_string(ds.size()) + " records, " +
                  std::to_string(sp.train.size()) + " train, " + std::to_string(kept.size()) +
                  " kept at 2^5");
  return out;
}

// ---- 7 -------------------------------------------------------------------

bool within(double a, double b, double rel) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::abs(a - b) <= rel * std::max(std::abs(b), 1e-12);
}

Outcome crossface(const CrossfaceResult& res) {
  Outcome out;
  std::map<int, std::vector<const CrossfaceCell*>> full, isolated;
  std::map<int, const CrossfaceCell*> rest;
  for (const auto& c : res.cells) {
    if (c.mode == CrossfaceMode::Full && c.bin < 0) rest[c.face] = &c;
    if (c.mode == CrossfaceMode::Full && c.bin >= 0) full[c.face].push_back(&c);
    if (c.mode == CrossfaceMode::Isolated) isolated[c.face].push_back(&c);
  }
  for (const auto& [face, cells] : full) {
    int inversions = 0;
    double worst_drop = 0;
    std::string seq;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const double e = cells[i]->report.overall.ef_pct.mean;
      seq += (i ? " " : "") + fmt("%.3f", e);
      if (i == 0) continue;
      const double prev = cells[i - 1]->report.overall.ef_pct.mean;
      if (e < prev) {
        ++inversions;
        worst_drop = std::max(worst_drop, (prev - e) / prev);
      }
    }
    out.require(inversions == 0 || (inversions == 1 && worst_drop <= 0.05),
                "face" + std::to_string(face) + " full-physics E_f over bins: " + seq);
  }
  for (const auto& [face, cells] : isolated) {
    const auto& ref = rest.at(face)->report.overall;
    bool ok = true;
    for (const auto* c : cells) {
      const auto& s = c->report.overall;
      ok = ok && within(s.a_sim.mean, ref.a_sim.mean, 0.01) &&
           within(s.e_eucl.mean, ref.e_eucl.mean, 0.01) &&
           within(s.ef_pct.mean, ref.ef_pct.mean, 0.01) && within(s.a_non, ref.a_non, 0.01);
    }
    out.require(ok, "face" + std::to_string(face) + " isolated reads match the unloaded level (" +
                        std::to_string(cells.size()) + " bins)");
  }
  return out;
}

// ---- 8 -------------------------------------------------------------------

Outcome sensitivity(const SensitivityResult& s) {
  Outcome out;
  out.require(s.rho_ef <= -0.3, "Spearman(delta, E_f) " + fmt("%.3f", s.rho_ef) +
                                    " (A_sim " + fmt("%.3f", s.rho_a_sim) + ", E_loc " +
                                    fmt("%.3f", s.rho_e_eucl) + ")");
  return out;
}

// ---- 9 -------------------------------------------------------------------

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

Outcome determinism(const FaceRun& run, const fs::path& work, std::uint64_t seed) {
  Outcome out;
  const Dataset back = parse_dataset(format_dataset(run.dataset));
  out.require(back.records == run.dataset.records,
              "dataset write/read bit-exact (" + std::to_string(back.size()) + " records)");

  const fs::path ck = work / "roundtrip" / "model.json";
  fs::create_directories(ck.parent_path());
  save_checkpoint(run.model.checkpoint, ck);
  const Checkpoint loaded = load_checkpoint(ck);
  std::vector<HallFrame> frames;
  for (const auto& r : run.dataset.records) frames.push_back(r.hall);
  const auto p0 = predict(run.model.checkpoint, frames);
  const auto p1 = predict(loaded, frames);
  bool same = loaded.mlp == run.model.checkpoint.mlp;
  for (std::size_t i = 0; i < p0.size(); ++i) same = same && p0[i].values == p1[i].values;
  out.require(same, "checkpoint save/load/forward bit-exact");

  PipelineConfig cfg;
  cfg.model = small_preset();
  cfg.model.train.max_epochs = 5;
  cfg.scale = 0.02;
  cfg.seed = seed + 1;
  auto study = [&](const fs::path& dir) {
    const std::vector<int> faces{2};
    const auto runs = run_table1(faces, cfg);
    write_table1_run(dir / "table1", runs, cfg);
    write_unseen_run(dir / "unseen", run_unseen(2, cfg), cfg);
    const std::vector<int> ks{0, 3};
    write_ablation_run(dir / "ablation", 2, run_ablation(2, ks, cfg), cfg);
    CrossfaceOptions xo;
    xo.bins = {0.5, 1.0};
    xo.samples_per_case = 5;
    write_crossface_run(dir / "crossface", run_crossface(cfg, xo), xo, cfg);
    SensitivityOptions so;
    so.hull.samples = 500;
    write_sensitivity_run(dir / "sensitivity", run_sensitivity(runs.front(), cfg, so),
                          runs.front(), cfg);
  };
  study(work / "rerun_a");
  study(work / "rerun_b");
  const auto a = tree(work / "rerun_a"), b = tree(work / "rerun_b");
  out.require(!a.empty() && a == b, "five studies rerun byte-identical (" +
                                        std::to_string(a.size()) + " files)");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-9"};
  bool paper = false;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string work = (fs::temp_directory_path() / "instobj-acceptance").string();
  app.add_flag("--paper", paper, "Full-size network for the learned criteria (slow)");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--work", work, "Scratch directory (removed afterwards)");
  CLI11_PARSE(app, argc, argv);

  PipelineConfig cfg;
  cfg.model = paper ? paper_preset() : small_preset();
  cfg.seed = seed;
  cfg.jobs = jobs;
  fs::remove_all(work);
  fs::create_directories(work);

  int failed = 0;
  auto run = [&](int id, const std::string& name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  %d  %s  (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs);
    for (const auto& n : o.notes) std::printf("        %s\n", n.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };

  std::vector<FaceRun> runs;
  run(1, "physics oracles", physics_oracles);
  run(2, "gradient check", gradient_check);
  run(3, "metric and hull fixtures", metric_fixtures);
  run(4, std::string("per-face table at scale 0.05, ") + (paper ? "paper" : "small") + " network",
      [&] {
        const std::vector<int> faces{1, 2, 3, 4, 5};
        runs = run_table1(faces, cfg);
        return table1(runs, paper);
      });
  run(5, "seen/unseen locations", [&] { return unseen(run_unseen(1, cfg)); });
  run(6, "ablation trend and 2^5 count", [&] {
    std::vector<int> ks(11);
    std::iota(ks.begin(), ks.end(), 0);
    return ablation(run_ablation(1, ks, cfg), seed);
  });
  run(7, "cross-face grasp study", [&] { return crossface(run_crossface(cfg)); });
  run(8, "sensitivity correlation", [&] {
    if (runs.empty()) throw std::runtime_error("needs the face-1 run from criterion 4");
    return sensitivity(run_sensitivity(runs.front(), cfg));
  });
  run(9, "determinism and round trips", [&] {
    if (runs.empty()) throw std::runtime_error("needs the face-1 run from criterion 4");
    return determinism(runs.front(), work, seed);
  });

  fs::remove_all(work);
  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed ? 1 : 0;
}
