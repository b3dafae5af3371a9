#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <set>

#include "instobj/datagen.hpp"
#include "instobj/deformation.hpp"
#include "instobj/errors.hpp"
#include "instobj/experiments.hpp"

using namespace instobj;

namespace {

Dataset small_face(int face, double scale, std::uint64_t seed) {
  return generate_face_dataset(face, scale, default_config(), default_deformation_params(), seed);
}

}  // namespace

TEST(Datagen, CoverageCounts) {
  const auto cov = default_coverage();
  EXPECT_EQ(enumerate_cases(1, single_probe(), cov).size(), 100u);
  EXPECT_EQ(enumerate_cases(1, dual_probe(), cov).size(), 26u);
  EXPECT_EQ(enumerate_cases(1, triple_probe(), cov).size(), 14u);
  EXPECT_EQ(non_contact_cases(1, cov).size(), 3u);
  CoverageSpec empty;
  EXPECT_THROW(enumerate_cases(1, dual_probe(), empty), ConfigError);
}

TEST(Datagen, ProbeContactsDistinctAndOnGrid) {
  const auto cov = default_coverage();
  for (int k = 1; k <= 3; ++k) {
    for (const auto& c : enumerate_cases(2, probe_for(k), cov)) {
      std::set<GridCoord> s(c.coords.begin(), c.coords.end());
      EXPECT_EQ(s.size(), static_cast<std::size_t>(k));
      for (const auto& p : c.coords) EXPECT_TRUE(is_valid(p, 10));
    }
  }
}

TEST(Datagen, TriangleWave) {
  EXPECT_EQ(triangle_wave(0.0), 0.0);
  EXPECT_EQ(triangle_wave(0.5), 1.0);
  EXPECT_EQ(triangle_wave(1.0), 0.0);
  EXPECT_DOUBLE_EQ(triangle_wave(2.25), 0.5);
}

TEST(Datagen, ScaledSamples) {
  EXPECT_EQ(scaled_samples(1000, 0.05), 50);
  EXPECT_EQ(scaled_samples(1000, 1.0), 1000);
  EXPECT_EQ(scaled_samples(1000, 1e-6), 1);
  EXPECT_THROW(scaled_samples(1000, 0.0), UsageError);
  EXPECT_THROW(scaled_samples(1000, 1.5), UsageError);
}

TEST(Datagen, FirstSampleAtMinimumDepth) {
  const auto cov = default_coverage();
  const auto cases = enumerate_cases(1, single_probe(), cov);
  SweepProtocol proto;
  proto.samples_per_case = 20;
  GenerationOptions opt;
  opt.quantize_force = false;
  const auto p = default_deformation_params();
  const auto recs = generate_case(cases[0], proto, default_config(), p, opt, 1);
  ASSERT_EQ(recs.size(), 20u);
  const auto range = location_force_range(1, cases[0].coords[0], p, proto.depths);
  EXPECT_NEAR(recs[0].contacts[0].force, range.first, 1e-6);
}

TEST(Datagen, ForcesWithinLocationRangeAndEqualSplit) {
  const auto ds = small_face(1, 0.02, 3);
  const auto p = default_deformation_params();
  for (const auto& r : ds.records) {
    if (!r.is_contact()) {
      EXPECT_EQ(r.case_id.rfind("nc", 0), 0u);
      continue;
    }
    const double f0 = r.contacts.front().force;
    for (const auto& c : r.contacts) {
      EXPECT_EQ(c.force, f0);  // total / J on every tip
      EXPECT_GE(c.force, 0.0);
    }
    if (r.contacts.size() == 1) {
      const auto range = location_force_range(1, r.contacts[0].coord, p);
      EXPECT_GE(f0, range.first - 0.12 - 1e-9);
      EXPECT_LE(f0, range.second + 0.12 + 1e-9);
    }
  }
}

TEST(Datagen, DeterministicAndSeedSensitive) {
  const auto a = small_face(2, 0.01, 9);
  const auto b = small_face(2, 0.01, 9);
  const auto c = small_face(2, 0.01, 10);
  EXPECT_EQ(a, b);
  EXPECT_NE(dataset_hash(a), dataset_hash(c));
  GenerationOptions par;
  par.jobs = 4;
  EXPECT_EQ(a, generate_face_dataset(2, 0.01, default_config(), default_deformation_params(), 9, par));
}

TEST(Datagen, CsvRoundTripBitExact) {
  const auto ds = small_face(3, 0.02, 5);
  const auto path = std::filesystem::temp_directory_path() / "instobj_roundtrip.csv";
  write_dataset(ds, path);
  const auto back = read_dataset(path);
  EXPECT_EQ(back, ds);
  EXPECT_EQ(format_dataset(back), format_dataset(ds));
  std::filesystem::remove(path);
}

TEST(Datagen, ParseErrorsCarryLineNumbers) {
  const std::string good = std::string(kDatasetHeader) + "\n";
  EXPECT_TRUE(parse_dataset(good).empty());
  try {
    parse_dataset(good + "1,p1_x01_y01,0,1,1,oops,,,,,,,1,2,3,4,5,6,7,8,9\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_dataset("bad header\n"), ParseError);
}

TEST(Datagen, CoreShiftAndCompensation) {
  const auto ds = small_face(1, 0.01, 2);
  SignalOffset off{};
  for (int k = 0; k < 9; ++k) off[k] = 100.0 * (k + 1);
  const auto shifted = inject_core_shift(ds, off);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (int k = 0; k < 9; ++k) {
      EXPECT_NEAR(shifted.records[i].hall.values[k] - ds.records[i].hall.values[k], off[k], 1e-6);
    }
  }
  const HallFrame& f = shifted.records[0].hall;
  HallFrame ref = f, cal = ds.records[0].hall;
  const auto comp = offset_compensate(f, ref, cal);
  EXPECT_EQ(comp.values, cal.values);
  HallFrame other = cal;
  other.face_index = 2;
  EXPECT_THROW(offset_compensate(f, ref, other), UsageError);
}

TEST(Datagen, BackgroundOnSweptFaceRejected) {
  const auto cases = enumerate_cases(3, single_probe(), default_coverage());
  BackgroundLoad bg{{{3, {2, 2}, 1.0}}};
  EXPECT_THROW(generate_case(cases[0], {}, default_config(), default_deformation_params(), {}, 0, bg),
               UsageError);
}

TEST(Split, PerCaseFractionsAndDisjoint) {
  const auto ds = small_face(1, 0.02, 1);  // 20 samples per case
  const auto sp = split_dataset(ds, {}, 11);
  std::map<std::string, std::array<int, 3>> per_case;
  for (auto i : sp.train) per_case[ds.records[i].case_id][0]++;
  for (auto i : sp.validation) per_case[ds.records[i].case_id][1]++;
  for (auto i : sp.test) per_case[ds.records[i].case_id][2]++;
  for (const auto& [id, n] : per_case) {
    EXPECT_EQ(n[0], 12) << id;
    EXPECT_EQ(n[1], 4) << id;
    EXPECT_EQ(n[2], 4) << id;
  }
  std::set<std::size_t> all(sp.train.begin(), sp.train.end());
  all.insert(sp.validation.begin(), sp.validation.end());
  all.insert(sp.test.begin(), sp.test.end());
  EXPECT_EQ(all.size(), ds.size());
  EXPECT_TRUE(sp.warnings.empty());
  EXPECT_EQ(split_dataset(ds, {}, 11).test, sp.test);
  EXPECT_NE(split_dataset(ds, {}, 12).test, sp.test);
}

TEST(Split, SmallCasesArePooledWithWarning) {
  const auto ds = small_face(1, 0.003, 1);  // 3 samples per case
  const auto sp = split_dataset(ds, {}, 1);
  EXPECT_FALSE(sp.warnings.empty());
  EXPECT_EQ(sp.train.size() + sp.validation.size() + sp.test.size(), ds.size());
  EXPECT_THROW(split_dataset(Dataset{}, {}, 1), UsageError);
  EXPECT_THROW(split_dataset(ds, {0.5, 0.2, 0.2}, 1), UsageError);
}
