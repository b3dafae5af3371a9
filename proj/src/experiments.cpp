#include "instobj/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "instobj/errors.hpp"
#include "instobj/hash.hpp"
#include "instobj/heatmap.hpp"
#include "parallel.hpp"

namespace instobj {

namespace {

using detail::parallel_for;

constexpr std::size_t kMinStratifiedCase = 5;

std::string two(int v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

void assign_split(std::vector<std::size_t> idx, std::uint64_t seed, const SplitSpec& spec,
                  SplitIndices& out) {
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n = static_cast<double>(idx.size());
  const auto n_train = static_cast<std::size_t>(std::lround(spec.train * n));
  const auto n_val =
      std::min(idx.size() - n_train, static_cast<std::size_t>(std::lround(spec.validation * n)));
  out.train.insert(out.train.end(), idx.begin(), idx.begin() + n_train);
  out.validation.insert(out.validation.end(), idx.begin() + n_train,
                        idx.begin() + n_train + n_val);
  out.test.insert(out.test.end(), idx.begin() + n_train + n_val, idx.end());
}

Matrix frames_to_matrix(const Dataset& ds, const NormStats& stats) {
  Matrix x(ds.size(), kSignalsPerFace);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto v = normalize(ds.records[i].hall, stats);
    std::copy(v.begin(), v.end(), x.row(i).begin());
  }
  return x;
}

Matrix targets_to_matrix(const Dataset& ds, const NormStats& stats, int grid) {
  Matrix y(ds.size(), static_cast<std::size_t>(grid * grid));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& r = ds.records[i];
    const auto v = normalize(encode(r.contacts, r.face, grid), stats);
    std::copy(v.begin(), v.end(), y.row(i).begin());
  }
  return y;
}

int grid_of(const Checkpoint& cp) {
  const int cells = cp.mlp.sizes.back();
  const int g = static_cast<int>(std::lround(std::sqrt(cells)));
  if (g * g != cells) throw ShapeError("model output width is not a square grid");
  return g;
}

}  // namespace

ModelPreset paper_preset() {
  ModelPreset p;
  p.name = "paper";
  p.sizes = paper_layer_sizes();
  p.train.learning_rate = 1e-3;
  p.train.batch_size = 2000;
  p.train.max_epochs = 200;
  return p;
}

ModelPreset small_preset() {
  ModelPreset p;
  p.name = "small";
  p.sizes = small_layer_sizes();
  p.train.learning_rate = 1e-3;
  p.train.batch_size = 64;
  p.train.max_epochs = 150;
  return p;
}

SplitIndices split_dataset(const Dataset& dataset, const SplitSpec& spec, std::uint64_t seed) {
  if (dataset.empty()) throw UsageError("cannot split an empty dataset");
  if (spec.train <= 0.0 || spec.validation < 0.0 || spec.test < 0.0 ||
      std::abs(spec.train + spec.validation + spec.test - 1.0) > 1e-9) {
    throw UsageError("split fractions must be non-negative and sum to 1");
  }
  std::map<std::string, std::vector<std::size_t>> by_case;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_case[dataset.records[i].case_id].push_back(i);
  }
  SplitIndices out;
  std::vector<std::size_t> pooled;
  for (auto& [id, idx] : by_case) {
    if (idx.size() < kMinStratifiedCase) {
      pooled.insert(pooled.end(), idx.begin(), idx.end());
      continue;
    }
    assign_split(std::move(idx), derive_seed(seed, "case/" + id), spec, out);
  }
  if (!pooled.empty()) {
    out.warnings.push_back(std::to_string(pooled.size()) +
                           " samples from cases with fewer than 5 samples split globally");
    assign_split(std::move(pooled), derive_seed(seed, "pooled"), spec, out);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  if (out.train.empty() || out.validation.empty() || out.test.empty()) {
    out.warnings.push_back("a split is empty");
  }
  return out;
}

Dataset subset(const Dataset& dataset, std::span<const std::size_t> indices) {
  Dataset out;
  out.records.reserve(indices.size());
  for (auto i : indices) out.records.push_back(dataset.records.at(i));
  return out;
}

std::uint64_t stage_seed(std::uint64_t master, const std::string& stage, int face) {
  return derive_seed(master, stage + "/face" + std::to_string(face));
}

Dataset generate_for(int face, const PipelineConfig& cfg) {
  GenerationOptions opts = cfg.generation;
  opts.jobs = cfg.jobs;
  return generate_face_dataset(face, cfg.scale, cfg.object, cfg.deformation,
                               stage_seed(cfg.seed, "data", face), opts);
}

TrainedModel train_face_model(int face, const Dataset& train, const Dataset& validation,
                              const ModelPreset& preset, std::uint64_t master_seed) {
  if (preset.sizes.empty() || preset.sizes.front() != kSignalsPerFace) {
    throw ShapeError("model input width must equal the Hall frame width");
  }
  const int cells = preset.sizes.back();
  const int grid = static_cast<int>(std::lround(std::sqrt(cells)));
  if (grid * grid != cells) throw ShapeError("model output width is not a square grid");

  const NormStats stats = fit_norm_stats(train);
  const Matrix x_train = frames_to_matrix(train, stats);
  const Matrix y_train = targets_to_matrix(train, stats, grid);
  const Matrix x_val = frames_to_matrix(validation, stats);
  const Matrix y_val = targets_to_matrix(validation, stats, grid);

  TrainConfig tc = preset.train;
  tc.seed = stage_seed(master_seed, "train", face);
  tc.batch_size = std::min<int>(tc.batch_size, static_cast<int>(train.size()));
  Mlp init = init_mlp(preset.sizes, stage_seed(master_seed, "init", face));
  TrainResult tr = instobj::train(std::move(init), x_train, y_train, x_val, y_val, tc);

  TrainedModel out;
  out.checkpoint.mlp = std::move(tr.best);
  out.checkpoint.stats = stats;
  out.checkpoint.provenance = {face, master_seed, to_hex(dataset_hash(train)), tc.max_epochs,
                               tr.best_epoch};
  out.log = std::move(tr.log);
  return out;
}

MetricsReport evaluate(const Checkpoint& cp, const Dataset& data, double threshold,
                       const ForceRangeMap& ranges) {
  const int grid = grid_of(cp);
  std::vector<HallFrame> frames;
  frames.reserve(data.size());
  for (const auto& r : data.records) {
    if (r.face != cp.provenance.face) {
      throw UsageError("record of face " + std::to_string(r.face) + " scored with the face " +
                       std::to_string(cp.provenance.face) + " model");
    }
    frames.push_back(r.hall);
  }
  const auto preds = predict(cp, frames);

  std::vector<SampleRecord> samples(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data.records[i];
    SampleRecord& s = samples[i];
    s.face = r.face;
    s.case_id = r.case_id;
    s.sample = r.sample_index;
    s.contact_count = static_cast<int>(r.contacts.size());
    s.predicted_non_contact = classify_non_contact(preds[i], threshold);
    if (!r.is_contact()) continue;
    s.location = r.contacts.front().coord;
    const Heatmap gt = encode(r.contacts, r.face, grid);
    const auto m = match(preds[i], gt);
    s.a_sim = m.a_sim;
    s.e_x = m.e_x;
    s.e_y = m.e_y;
    s.e_eucl = m.e_eucl;
    const auto fe = force_error(preds[i], gt, ranges);
    s.ef_pct = fe.percent;
    s.ef_n = fe.newtons;
  }
  return make_report(std::move(samples), grid);
}

FaceRun run_face(int face, const PipelineConfig& cfg) {
  FaceRun run;
  run.face = face;
  run.dataset = generate_for(face, cfg);
  run.split = split_dataset(run.dataset, cfg.split, stage_seed(cfg.seed, "split", face));
  run.model = train_face_model(face, subset(run.dataset, run.split.train),
                               subset(run.dataset, run.split.validation), cfg.model, cfg.seed);
  run.threshold = non_contact_threshold(run.dataset);
  const auto ranges = build_range_map(face, cfg.deformation, cfg.generation.protocol.depths);
  run.report = evaluate(run.model.checkpoint, subset(run.dataset, run.split.test), run.threshold,
                        ranges);
  return run;
}

std::vector<FaceRun> run_table1(std::span<const int> faces, const PipelineConfig& cfg) {
  std::vector<FaceRun> out;
  for (int f : faces) out.push_back(run_face(f, cfg));
  return out;
}

std::vector<GridCoord> seen_locations() {
  std::vector<GridCoord> out;
  for (int y : {1, 3, 5, 7, 9}) {
    for (int x : {1, 3, 5, 7, 9}) out.push_back({x, y});
  }
  return out;
}

UnseenResult run_unseen(int face, const PipelineConfig& cfg) {
  const Dataset dataset = generate_for(face, cfg);
  const auto seen = seen_locations();
  auto is_seen = [&](const GridCoord& c) {
    return std::find(seen.begin(), seen.end(), c) != seen.end();
  };
  const int nc_cases = cfg.generation.coverage.non_contact_cases;
  const int nc_kept = std::max(1, (nc_cases + 2) / 3);
  std::vector<std::size_t> pool_idx, unseen_idx;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& r = dataset.records[i];
    if (r.contacts.size() == 1) {
      (is_seen(r.contacts.front().coord) ? pool_idx : unseen_idx).push_back(i);
    } else if (r.contacts.empty()) {
      for (int k = 0; k < nc_kept; ++k) {
        if (r.case_id == "nc" + std::to_string(k)) pool_idx.push_back(i);
      }
    }
  }
  const Dataset pool = subset(dataset, pool_idx);
  const auto sp = split_dataset(pool, cfg.split, stage_seed(cfg.seed, "split-unseen", face));

  UnseenResult res;
  res.face = face;
  res.train_size = sp.train.size();
  res.model = train_face_model(face, subset(pool, sp.train), subset(pool, sp.validation),
                               cfg.model, cfg.seed);
  const double threshold = non_contact_threshold(dataset);
  const auto ranges = build_range_map(face, cfg.deformation, cfg.generation.protocol.depths);
  res.seen = evaluate(res.model.checkpoint, subset(pool, sp.test), threshold, ranges);
  res.unseen = evaluate(res.model.checkpoint, subset(dataset, unseen_idx), threshold, ranges);
  return res;
}

std::vector<std::size_t> downsample(const Dataset& dataset, std::span<const std::size_t> train,
                                    int k, std::uint64_t seed) {
  if (k < 0 || k > 30) throw UsageError("downsampling exponent out of range");
  if (k == 0) return {train.begin(), train.end()};
  std::map<int, std::vector<std::size_t>> groups;
  for (auto i : train) groups[static_cast<int>(dataset.records.at(i).contacts.size())].push_back(i);
  const std::size_t factor = std::size_t{1} << k;
  std::vector<std::size_t> out;
  for (auto& [count, idx] : groups) {
    std::mt19937_64 rng(derive_seed(seed, "k" + std::to_string(k) + "/p" + std::to_string(count)));
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t keep = (idx.size() + factor - 1) / factor;
    out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<AblationPoint> run_ablation(int face, std::span<const int> ks,
                                        const PipelineConfig& cfg) {
  const Dataset dataset = generate_for(face, cfg);
  const auto sp = split_dataset(dataset, cfg.split, stage_seed(cfg.seed, "split", face));
  const Dataset validation = subset(dataset, sp.validation);
  const Dataset test = subset(dataset, sp.test);
  const double threshold = non_contact_threshold(dataset);
  const auto ranges = build_range_map(face, cfg.deformation, cfg.generation.protocol.depths);

  std::vector<AblationPoint> out;
  for (int k : ks) {
    const auto idx = downsample(dataset, sp.train, k, stage_seed(cfg.seed, "downsample", face));
    AblationPoint p;
    p.k = k;
    p.train_size = idx.size();
    const auto model = train_face_model(face, subset(dataset, idx), validation, cfg.model, cfg.seed);
    p.checksum = parameter_checksum(model.checkpoint.mlp);
    auto rep = evaluate(model.checkpoint, test, threshold, ranges);
    for (auto& s : rep.samples) s.factor = k;
    p.report = make_report(std::move(rep.samples), rep.grid);
    out.push_back(std::move(p));
  }
  return out;
}

std::string_view to_string(CrossfaceMode mode) {
  switch (mode) {
    case CrossfaceMode::Full: return "full";
    case CrossfaceMode::Isolated: return "isolated";
    case CrossfaceMode::ShiftedRaw: return "shifted";
    case CrossfaceMode::ShiftedCompensated: return "compensated";
  }
  return {};
}

std::vector<CaseDescriptor> grasp_cases(int face) {
  struct Layout {
    int count;
    GridCoord anchor;
  };
  const Layout layouts[] = {{1, {5, 5}}, {1, {3, 3}}, {1, {8, 3}}, {1, {3, 8}}, {1, {8, 8}},
                            {2, {2, 4}}, {2, {5, 2}}, {2, {8, 6}}, {3, {2, 2}}, {3, {6, 6}}};
  std::vector<CaseDescriptor> out;
  for (const auto& l : layouts) {
    CaseDescriptor c;
    c.face = face;
    c.contact_count = l.count;
    c.case_id = "g" + std::to_string(l.count) + "_x" + two(l.anchor.x) + "_y" + two(l.anchor.y);
    for (const auto& o : probe_for(l.count).offsets) {
      c.coords.push_back({l.anchor.x + o.dx, l.anchor.y + o.dy});
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

// Indentation whose force is `fraction` of the force at `max_depth`, at any
// stiffness (the multiplier cancels).
double depth_for_fraction(double fraction, double max_depth, const DeformationParams& params) {
  const auto unit = uniform_deformation_params(1.0, params.grid);
  DeformationParams p = unit;
  p.k1 = params.k1;
  p.k3 = params.k3;
  p.max_depth = params.max_depth;
  const GridCoord c{1, 1};
  return depth_for_force(fraction * force_from_depth(max_depth, 1, c, p), 1, c, p);
}

HallFrame mean_frame(const std::vector<DatasetRecord>& recs, int face) {
  HallFrame out;
  out.face_index = face;
  for (const auto& r : recs) {
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += r.hall.values[k];
  }
  for (double& v : out.values) v = round_to_stored(v / static_cast<double>(recs.size()));
  return out;
}

}  // namespace

CrossfaceResult run_crossface(const PipelineConfig& cfg, const CrossfaceOptions& options) {
  if (options.face_a == options.face_b) throw UsageError("cross-face study needs two faces");
  CrossfaceResult res;
  res.calibration.push_back(run_face(options.face_a, cfg));
  res.calibration.push_back(run_face(options.face_b, cfg));

  SweepProtocol protocol = cfg.generation.protocol;
  protocol.samples_per_case = options.samples_per_case;
  protocol.cycles = 1;
  const double d_max = protocol.depths.max_depth;

  for (int side = 0; side < 2; ++side) {
    const FaceRun& run = res.calibration[static_cast<std::size_t>(side)];
    const int a = run.face;
    const int b = side == 0 ? options.face_b : options.face_a;
    const auto ranges = build_range_map(a, cfg.deformation, protocol.depths);
    const Dataset train = subset(run.dataset, run.split.train);

    // Contact cases on A, and non-contact A while each B layout is loaded.
    const auto cases_a = grasp_cases(a);
    const auto cases_b = grasp_cases(b);
    std::vector<CaseDescriptor> cases = cases_a;
    for (std::size_t i = 0; i < cases_b.size(); ++i) {
      cases.push_back({"nc_b" + two(static_cast<int>(i)), a, 0, {}});
    }
    auto load_for = [&](std::size_t case_index, double depth) {
      BackgroundLoad load;
      const auto& lb = cases_b[case_index % cases_b.size()];
      for (const auto& c : lb.coords) load.contacts.push_back({b, c, depth});
      return load;
    };

    // Core shift: alternating-sign offset scaled by the training channel ranges.
    const auto ranges_ch = channel_ranges(train);
    SignalOffset shift{};
    for (std::size_t k = 0; k < shift.size(); ++k) {
      shift[k] = round_to_stored((k % 2 == 0 ? 1.0 : -1.0) * options.shift_fraction * ranges_ch[k]);
    }
    std::vector<DatasetRecord> calib_nc;
    for (const auto& r : train.records) {
      if (!r.is_contact()) calib_nc.push_back(r);
    }
    if (calib_nc.empty()) throw UsageError("no non-contact calibration records");
    const HallFrame calib_rest = mean_frame(calib_nc, a);
    SweepProtocol ref_protocol = protocol;
    ref_protocol.samples_per_case = options.reference_frames;
    auto ref_recs = generate_case({"reference", a, 0, {}}, ref_protocol, cfg.object,
                                  cfg.deformation, cfg.generation,
                                  derive_seed(cfg.seed, "crossface/face" + std::to_string(a) +
                                                            "/reference"));
    HallFrame reference_rest = mean_frame(ref_recs, a);
    for (std::size_t k = 0; k < shift.size(); ++k) {
      reference_rest.values[k] = round_to_stored(reference_rest.values[k] + shift[k]);
    }

    auto sweep = [&](int bin, bool isolated) {
      const double depth =
          bin < 0 ? 0.0 : depth_for_fraction(options.bins[static_cast<std::size_t>(bin)], d_max,
                                             cfg.deformation);
      std::vector<std::vector<DatasetRecord>> per_case(cases.size());
      parallel_for(cases.size(), cfg.jobs, [&](std::size_t i) {
        const auto load = (bin < 0 || isolated) ? BackgroundLoad{} : load_for(i, depth);
        per_case[i] = generate_case(cases[i], protocol, cfg.object, cfg.deformation,
                                    cfg.generation,
                                    derive_seed(cfg.seed, "crossface/face" + std::to_string(a) +
                                                              "/" + cases[i].case_id),
                                    load);
      });
      Dataset ds;
      for (auto& v : per_case) std::move(v.begin(), v.end(), std::back_inserter(ds.records));
      return ds;
    };
    auto score = [&](const Dataset& ds, CrossfaceMode mode, int bin) {
      CrossfaceCell cell;
      cell.face = a;
      cell.mode = mode;
      cell.bin = bin;
      cell.load = bin < 0 ? 0.0 : options.bins[static_cast<std::size_t>(bin)];
      auto rep = evaluate(run.model.checkpoint, ds, run.threshold, ranges);
      for (auto& s : rep.samples) s.force_bin = bin;
      cell.report = make_report(std::move(rep.samples), rep.grid);
      res.cells.push_back(std::move(cell));
    };

    score(sweep(-1, false), CrossfaceMode::Full, -1);
    for (int bin = 0; bin < static_cast<int>(options.bins.size()); ++bin) {
      const Dataset full = sweep(bin, false);
      score(full, CrossfaceMode::Full, bin);
      score(sweep(bin, true), CrossfaceMode::Isolated, bin);
      const Dataset shifted = inject_core_shift(full, shift);
      score(shifted, CrossfaceMode::ShiftedRaw, bin);
      Dataset compensated = shifted;
      for (auto& r : compensated.records) {
        r.hall = offset_compensate(r.hall, reference_rest, calib_rest);
      }
      score(compensated, CrossfaceMode::ShiftedCompensated, bin);
    }
  }
  return res;
}

SensitivityResult run_sensitivity(const FaceRun& run, const PipelineConfig& cfg,
                                  const SensitivityOptions& options) {
  const int grid = cfg.object.pixel_grid;
  SensitivityResult res;
  res.face = run.face;
  res.grid = grid;
  const auto cells = static_cast<std::size_t>(grid * grid);
  res.delta.assign(cells, kNaN);
  res.volume_rel_se.assign(cells, kNaN);

  std::map<std::string, std::vector<std::size_t>> by_case;
  for (std::size_t i = 0; i < run.dataset.size(); ++i) {
    const auto& r = run.dataset.records[i];
    if (r.contacts.size() == 1) by_case[r.case_id].push_back(i);
  }
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> jobs;
  for (auto& [id, idx] : by_case) {
    const auto& c = run.dataset.records[idx.front()].contacts.front().coord;
    jobs.emplace_back(static_cast<std::size_t>((c.y - 1) * grid + (c.x - 1)), std::move(idx));
  }
  parallel_for(jobs.size(), cfg.jobs, [&](std::size_t j) {
    const auto& [cell, idx] = jobs[j];
    if (idx.size() < 10) return;
    Eigen::MatrixXd s(static_cast<Eigen::Index>(idx.size()), kSignalsPerFace);
    std::vector<double> f(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto& r = run.dataset.records[idx[i]];
      for (int k = 0; k < kSignalsPerFace; ++k) {
        s(static_cast<Eigen::Index>(i), k) = r.hall.values[static_cast<std::size_t>(k)];
      }
      f[i] = r.contacts.front().force;
    }
    HullVolumeOptions ho = options.hull;
    ho.seed = derive_seed(cfg.seed, "hull/face" + std::to_string(run.face) + "/cell" +
                                        std::to_string(cell));
    try {
      const auto est = force_sensitivity(s, f, ho);
      res.delta[cell] = est.delta;
      res.volume_rel_se[cell] = est.volume > 0.0 ? est.volume_std_error / est.volume : 0.0;
    } catch (const UsageError&) {
      // zero force range: no sensitivity defined at this location
    }
  });

  res.ef_pct = run.report.grid_ef_pct;
  res.a_sim = run.report.grid_a_sim;
  res.e_eucl = run.report.grid_e_eucl;
  auto corr = [&](const std::vector<double>& metric) {
    std::vector<double> a, b;
    for (std::size_t i = 0; i < cells; ++i) {
      if (std::isnan(res.delta[i]) || std::isnan(metric[i])) continue;
      a.push_back(res.delta[i]);
      b.push_back(metric[i]);
    }
    return a.size() >= 2 ? spearman(a, b) : kNaN;
  };
  res.rho_ef = corr(res.ef_pct);
  res.rho_a_sim = corr(res.a_sim);
  res.rho_e_eucl = corr(res.e_eucl);
  return res;
}

}  // namespace instobj
