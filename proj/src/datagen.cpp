#include "instobj/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "instobj/errors.hpp"
#include "instobj/hash.hpp"
#include "parallel.hpp"

namespace instobj {

namespace {

std::string two_digits(int v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

std::string case_id_for(int contact_count, const GridCoord& anchor) {
  return "p" + std::to_string(contact_count) + "_x" + two_digits(anchor.x) + "_y" +
         two_digits(anchor.y);
}

}  // namespace

double round_to_stored(double value) {
  return std::round(value * 1e6) / 1e6;
}

Probe single_probe() { return {1, {{0, 0}}}; }
Probe dual_probe() { return {2, {{0, 0}, {0, 2}}}; }
Probe triple_probe() { return {3, {{0, 0}, {2, 0}, {0, 2}}}; }

Probe probe_for(int contact_count) {
  switch (contact_count) {
    case 1: return single_probe();
    case 2: return dual_probe();
    case 3: return triple_probe();
    default: throw UsageError("probes have 1, 2 or 3 contacts");
  }
}

CoverageSpec default_coverage() {
  CoverageSpec c;
  for (int x : {1, 3, 5, 7, 9}) {
    for (int y : {1, 3, 5, 7, 8}) c.dual_anchors.push_back({x, y});
  }
  c.dual_anchors.push_back({10, 4});

  for (int x : {1, 4, 7}) {
    for (int y : {1, 4, 7}) c.triple_anchors.push_back({x, y});
  }
  for (GridCoord a : {GridCoord{2, 2}, GridCoord{5, 5}, GridCoord{8, 8}, GridCoord{2, 8},
                      GridCoord{8, 2}}) {
    c.triple_anchors.push_back(a);
  }
  return c;
}

std::vector<CaseDescriptor> enumerate_cases(int face, const Probe& probe,
                                            const CoverageSpec& coverage, int grid) {
  if (probe.offsets.size() != static_cast<std::size_t>(probe.contact_count)) {
    throw ConfigError("probe offsets do not match its contact count");
  }
  std::vector<GridCoord> anchors;
  if (probe.contact_count == 1) {
    for (int x = 1; x <= grid; ++x) {
      for (int y = 1; y <= grid; ++y) anchors.push_back({x, y});
    }
  } else {
    anchors = probe.contact_count == 2 ? coverage.dual_anchors : coverage.triple_anchors;
    if (anchors.empty()) {
      throw ConfigError("no coverage anchors for the " + std::to_string(probe.contact_count) +
                        "-contact probe");
    }
  }

  std::vector<CaseDescriptor> out;
  for (const auto& a : anchors) {
    CaseDescriptor c;
    c.face = face;
    c.contact_count = probe.contact_count;
    c.case_id = case_id_for(probe.contact_count, a);
    bool on_grid = true;
    for (const auto& o : probe.offsets) {
      const GridCoord p{a.x + o.dx, a.y + o.dy};
      on_grid = on_grid && is_valid(p, grid);
      c.coords.push_back(p);
    }
    if (on_grid) out.push_back(std::move(c));
  }
  return out;
}

std::vector<CaseDescriptor> non_contact_cases(int face, const CoverageSpec& coverage) {
  std::vector<CaseDescriptor> out;
  for (int i = 0; i < coverage.non_contact_cases; ++i) {
    out.push_back({"nc" + std::to_string(i), face, 0, {}});
  }
  return out;
}

double triangle_wave(double cycles_elapsed) {
  const double frac = cycles_elapsed - std::floor(cycles_elapsed);
  return 1.0 - std::abs(1.0 - 2.0 * frac);
}

int scaled_samples(int samples_per_case, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) throw UsageError("scale factor must lie in (0, 1]");
  return std::max(1, static_cast<int>(std::lround(samples_per_case * scale)));
}

std::vector<DatasetRecord> generate_case(const CaseDescriptor& c, const SweepProtocol& protocol,
                                         const ObjectConfig& config,
                                         const DeformationParams& params,
                                         const GenerationOptions& options, std::uint64_t seed,
                                         const BackgroundLoad& background) {
  for (const auto& b : background.contacts) {
    if (b.face == c.face) throw UsageError("background load on the swept face");
  }
  if (protocol.samples_per_case < 1) throw UsageError("samples_per_case must be positive");
  const int n = protocol.samples_per_case;
  std::mt19937_64 stream(seed);
  const auto rest = rest_dipoles(config);

  std::vector<DatasetRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    DatasetRecord rec;
    rec.face = c.face;
    rec.case_id = c.case_id;
    rec.sample_index = i;
    const std::uint64_t noise_seed = stream();

    std::vector<DepthContact> tips = background.contacts;
    if (c.contact_count > 0) {
      const double w = triangle_wave(static_cast<double>(protocol.cycles) * i / n);
      const double depth =
          protocol.depths.min_depth + (protocol.depths.max_depth - protocol.depths.min_depth) * w;
      double total = 0.0;
      for (const auto& coord : c.coords) {
        tips.push_back({c.face, coord, depth});
        total += force_from_depth(depth, c.face, coord, params);
      }
      double label = total / static_cast<double>(c.coords.size());
      if (options.quantize_force) {
        label = std::round(label / options.force_quantum) * options.force_quantum;
      }
      label = round_to_stored(label);
      for (const auto& coord : c.coords) rec.contacts.push_back({coord, label});
    }
    const auto dipoles =
        tips.empty() ? rest
                     : displaced_dipoles(config, inward_displacements(tips, config, params, true));

    rec.hall = read_sensors(config, dipoles, c.face, options.sensor, noise_seed);
    for (double& v : rec.hall.values) v = round_to_stored(v);
    out.push_back(std::move(rec));
  }
  return out;
}

Dataset generate_face_dataset(int face, double scale, const ObjectConfig& config,
                              const DeformationParams& params, std::uint64_t seed,
                              const GenerationOptions& options) {
  (void)config.face(face);
  check(params, config);

  std::vector<CaseDescriptor> cases;
  for (int k = 1; k <= 3; ++k) {
    auto more = enumerate_cases(face, probe_for(k), options.coverage, config.pixel_grid);
    cases.insert(cases.end(), more.begin(), more.end());
  }
  for (auto& c : non_contact_cases(face, options.coverage)) cases.push_back(std::move(c));

  SweepProtocol protocol = options.protocol;
  protocol.samples_per_case = scaled_samples(options.protocol.samples_per_case, scale);

  std::vector<std::vector<DatasetRecord>> per_case(cases.size());
  detail::parallel_for(cases.size(), options.jobs, [&](std::size_t i) {
    const std::uint64_t case_seed =
        derive_seed(seed, "face" + std::to_string(face) + "/" + cases[i].case_id);
    per_case[i] = generate_case(cases[i], protocol, config, params, options, case_seed);
  });

  Dataset ds;
  for (auto& v : per_case) {
    std::move(v.begin(), v.end(), std::back_inserter(ds.records));
  }
  std::sort(ds.records.begin(), ds.records.end(),
            [](const DatasetRecord& a, const DatasetRecord& b) {
              if (a.case_id != b.case_id) return a.case_id < b.case_id;
              return a.sample_index < b.sample_index;
            });
  return ds;
}

Dataset inject_core_shift(Dataset dataset, const SignalOffset& offset) {
  for (auto& r : dataset.records) {
    for (std::size_t k = 0; k < offset.size(); ++k) {
      r.hall.values[k] = round_to_stored(r.hall.values[k] + offset[k]);
    }
  }
  return dataset;
}

HallFrame offset_compensate(const HallFrame& frame, const HallFrame& reference_rest,
                            const HallFrame& calib_rest) {
  if (frame.face_index != reference_rest.face_index ||
      frame.face_index != calib_rest.face_index) {
    throw UsageError("offset compensation across different faces");
  }
  HallFrame out = frame;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    out.values[k] = (frame.values[k] - reference_rest.values[k]) + calib_rest.values[k];
  }
  return out;
}

SignalOffset channel_ranges(const Dataset& dataset) {
  SignalOffset lo, hi;
  lo.fill(INFINITY);
  hi.fill(-INFINITY);
  for (const auto& r : dataset.records) {
    for (std::size_t k = 0; k < lo.size(); ++k) {
      lo[k] = std::min(lo[k], r.hall.values[k]);
      hi[k] = std::max(hi[k], r.hall.values[k]);
    }
  }
  SignalOffset out{};
  if (dataset.empty()) return out;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = hi[k] - lo[k];
  return out;
}

}  // namespace instobj
