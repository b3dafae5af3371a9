#include <gtest/gtest.h>

#include <random>

#include "instobj/datagen.hpp"
#include "instobj/errors.hpp"
#include "instobj/heatmap.hpp"

using namespace instobj;

namespace {

Dataset toy_dataset() {
  Dataset ds;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-500, 500);
  for (int i = 0; i < 40; ++i) {
    DatasetRecord r;
    r.face = 1;
    r.case_id = i < 5 ? "nc0" : "p1_x01_y01";
    r.sample_index = i;
    for (auto& v : r.hall.values) v = u(rng);
    r.hall.values[4] = 7.0;  // constant channel
    r.hall.face_index = 1;
    if (i >= 5) r.contacts.push_back({{1 + i % 10, 1 + i % 7}, 0.24 * (i % 50 + 1)});
    ds.records.push_back(r);
  }
  return ds;
}

}  // namespace

TEST(Heatmap, EncodePlacesForces) {
  std::vector<LabelledContact> c{{{2, 3}, 4.5}, {{9, 9}, 1.0}};
  const auto h = encode(c, 1);
  EXPECT_EQ(h.at(2, 3), 4.5);
  EXPECT_EQ(h.values[(3 - 1) * 10 + (2 - 1)], 4.5);
  EXPECT_EQ(h.max_value(), 4.5);
  double sum = 0;
  for (double v : h.values) sum += v;
  EXPECT_EQ(sum, 5.5);
  std::vector<LabelledContact> dup{{{2, 3}, 1.0}, {{2, 3}, 1.0}};
  EXPECT_THROW(encode(dup, 1), UsageError);
  std::vector<LabelledContact> off{{{11, 3}, 1.0}};
  EXPECT_THROW(encode(off, 1), UsageError);
}

TEST(Heatmap, NormalizationExtremesAndRoundTrip) {
  const auto ds = toy_dataset();
  const auto st = fit_norm_stats(ds);
  EXPECT_TRUE(st.degenerate[4]);
  EXPECT_EQ(st.in_min[4], 6.0);
  EXPECT_EQ(st.in_max[4], 8.0);
  for (int k = 0; k < 9; ++k) {
    if (k == 4) continue;
    bool saw0 = false, saw1 = false;
    for (const auto& r : ds.records) {
      const auto n = normalize(r.hall, st);
      saw0 = saw0 || n[k] == 0.0;
      saw1 = saw1 || n[k] == 1.0;
      const auto back = denormalize(n, st, 1);
      EXPECT_NEAR(back.values[k], r.hall.values[k], 1e-12 * (1 + std::abs(r.hall.values[k])));
    }
    EXPECT_TRUE(saw0 && saw1);
  }
  double fmax = 0;
  for (const auto& r : ds.records) {
    for (const auto& c : r.contacts) fmax = std::max(fmax, c.force);
  }
  EXPECT_EQ(st.f_max, fmax);
  EXPECT_THROW(fit_norm_stats(Dataset{}), UsageError);
}

TEST(Heatmap, OutputNormalizationRoundTrip) {
  const auto ds = toy_dataset();
  const auto st = fit_norm_stats(ds);
  const auto h = encode(ds.records[10].contacts, 1);
  const auto n = normalize(h, st);
  const auto back = denormalize_heatmap(n, st, 1);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_NEAR(back.values[i], h.values[i], 1e-12);
  std::vector<double> wild(100, 1.7);
  wild[0] = -0.3;
  const auto clamped = denormalize_heatmap(wild, st, 1);
  EXPECT_EQ(clamped.values[0], 0.0);
  EXPECT_EQ(clamped.values[1], st.f_max);
}

TEST(Heatmap, NonContactClassification) {
  const auto ds = toy_dataset();
  const double t = non_contact_threshold(ds);
  EXPECT_DOUBLE_EQ(t, 0.9 * (0.24 * 6));
  Heatmap h;
  EXPECT_TRUE(classify_non_contact(h, t));
  h.values[17] = t;
  EXPECT_FALSE(classify_non_contact(h, t));
  Dataset nc;
  nc.records.push_back(ds.records[0]);
  EXPECT_THROW(non_contact_threshold(nc), UsageError);
}

TEST(Heatmap, PgmFormat) {
  std::vector<double> v(4, 0.0);
  v[3] = 2.0;
  v[1] = 1.0;
  const auto text = format_pgm(v, 2, 2.0, "demo");
  EXPECT_EQ(text, "P2\n# demo\n2 2\n255\n0 128\n0 255\n");
}
