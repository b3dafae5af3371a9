#include <gtest/gtest.h>

#include <cmath>

#include "instobj/aggregate.hpp"
#include "instobj/errors.hpp"

using namespace instobj;

namespace {

SampleRecord contact(int face, int x, int y, double a_sim, double e, double ef, int count = 1) {
  SampleRecord r;
  r.face = face;
  r.case_id = "p1";
  r.contact_count = count;
  r.location = {x, y};
  r.a_sim = a_sim;
  r.e_x = e;
  r.e_y = 0.0;
  r.e_eucl = e;
  r.ef_pct = ef;
  r.ef_n = ef / 10.0;
  return r;
}

SampleRecord non_contact(int face, bool ok) {
  SampleRecord r;
  r.face = face;
  r.case_id = "nc0";
  r.predicted_non_contact = ok;
  return r;
}

}  // namespace

TEST(Aggregate, SingleRecordMeanEqualsRecord) {
  std::vector<SampleRecord> v{contact(1, 2, 3, 0.9, 1.0, 4.0)};
  const auto g = aggregate(v, GroupKey::All);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].a_sim.mean, 0.9);
  EXPECT_EQ(g[0].a_sim.p10, 0.9);
  EXPECT_EQ(g[0].ef_pct.p90, 4.0);
  EXPECT_TRUE(std::isnan(g[0].a_non));
}

TEST(Aggregate, QuantilesLinearInterpolation) {
  std::vector<SampleRecord> v;
  for (int i = 0; i < 11; ++i) v.push_back(contact(1, 1, 1, i / 10.0, i, i));
  const auto g = aggregate(v, GroupKey::All)[0];
  EXPECT_NEAR(g.a_sim.p10, 0.1, 1e-12);
  EXPECT_NEAR(g.a_sim.p50, 0.5, 1e-12);
  EXPECT_NEAR(g.a_sim.p90, 0.9, 1e-12);
  EXPECT_NEAR(g.a_sim.mean, 0.5, 1e-12);
}

TEST(Aggregate, LocationGroupsPartition) {
  std::vector<SampleRecord> v;
  for (int i = 0; i < 30; ++i) v.push_back(contact(1, 1 + i % 4, 1 + i % 3, 1.0, 0.0, 1.0));
  v.push_back(non_contact(1, true));
  v.push_back(non_contact(1, false));
  const auto g = aggregate(v, GroupKey::Location);
  std::size_t total = 0;
  for (const auto& s : g) total += s.count;
  EXPECT_EQ(total, v.size());
  const auto all = aggregate(v, GroupKey::All)[0];
  EXPECT_EQ(all.contact, 30u);
  EXPECT_EQ(all.non_contact, 2u);
  EXPECT_EQ(all.a_non, 0.5);
  EXPECT_EQ(all.a_sim.n, 30u);
}

TEST(Aggregate, GroupKeys) {
  EXPECT_EQ(parse_group_key("probe"), GroupKey::Probe);
  EXPECT_EQ(to_string(GroupKey::ForceBin), "force_bin");
  EXPECT_THROW(parse_group_key("colour"), UsageError);
  EXPECT_THROW(aggregate(std::span<const SampleRecord>{}, GroupKey::All), UsageError);
  std::vector<SampleRecord> v{contact(2, 1, 1, 1, 0, 0), contact(1, 1, 1, 1, 0, 0)};
  const auto g = aggregate(v, GroupKey::Face);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_LT(g[0].key, g[1].key);
}

TEST(Aggregate, ReportGridsUseSingleContacts) {
  std::vector<SampleRecord> v{contact(1, 2, 3, 0.8, 1.0, 5.0), contact(1, 2, 3, 0.6, 3.0, 7.0),
                              contact(1, 2, 3, 0.0, 9.0, 99.0, 2), non_contact(1, true)};
  const auto r = make_report(v);
  const std::size_t i = (3 - 1) * 10 + (2 - 1);
  EXPECT_NEAR(r.grid_a_sim[i], 0.7, 1e-12);
  EXPECT_NEAR(r.grid_e_eucl[i], 2.0, 1e-12);
  EXPECT_NEAR(r.grid_ef_pct[i], 6.0, 1e-12);
  EXPECT_TRUE(std::isnan(r.grid_a_sim[0]));
  EXPECT_EQ(r.overall.a_non, 1.0);
  const auto csv = format_samples_csv(r.samples);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_NE(csv.find(",,"), std::string::npos);
}
