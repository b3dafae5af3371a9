#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "instobj/deformation.hpp"
#include "instobj/errors.hpp"
#include "instobj/metrics.hpp"

using namespace instobj;

namespace {

Heatmap random_map(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 5);
  Heatmap h;
  for (auto& v : h.values) v = u(rng);
  return h;
}

Heatmap point_map(int x, int y, double f) {
  Heatmap h;
  h.at(GridCoord{x, y}) = f;
  return h;
}

Heatmap shifted(const Heatmap& h, int dx, int dy) {
  Heatmap out;
  for (int y = 1; y <= 10; ++y) {
    for (int x = 1; x <= 10; ++x) {
      const int sx = x - dx, sy = y - dy;
      if (sx >= 1 && sx <= 10 && sy >= 1 && sy <= 10) out.at(GridCoord{x, y}) = h.at(sx, sy);
    }
  }
  return out;
}

// Independent ZNCC over the overlap of gt(x, y) and pred(x + dx, y + dy).
double oracle_zncc(const Heatmap& pred, const Heatmap& gt, int dx, int dy) {
  std::vector<double> a, b;
  for (int y = 1; y <= 10; ++y) {
    for (int x = 1; x <= 10; ++x) {
      const int px = x + dx, py = y + dy;
      if (px < 1 || px > 10 || py < 1 || py > 10) continue;
      a.push_back(gt.at(x, y));
      b.push_back(pred.at(px, py));
    }
  }
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(Metrics, SelfMatch) {
  const auto h = random_map(1);
  EXPECT_NEAR(*zncc_at(h, h, 0, 0), 1.0, 1e-12);
  const auto m = match(h, h);
  EXPECT_NEAR(m.a_sim, 1.0, 1e-12);
  EXPECT_EQ(m.dx, 0);
  EXPECT_EQ(m.dy, 0);
  EXPECT_EQ(m.e_eucl, 0.0);
  const auto p = point_map(4, 6, 3.0);
  const auto mp = match(p, p);
  EXPECT_EQ(mp.a_sim, 1.0);
  EXPECT_EQ(mp.e_eucl, 0.0);
}

TEST(Metrics, ZnccAgreesWithOracle) {
  const auto a = random_map(2), b = random_map(3);
  for (int dx = -8; dx <= 8; dx += 3) {
    for (int dy = -8; dy <= 8; dy += 4) {
      const auto z = zncc_at(a, b, dx, dy);
      ASSERT_TRUE(z.has_value());
      EXPECT_NEAR(*z, oracle_zncc(a, b, dx, dy), 1e-12);
    }
  }
  EXPECT_FALSE(zncc_at(a, b, 9, 9).has_value());  // one-pixel overlap
  EXPECT_FALSE(zncc_at(Heatmap{}, b, 0, 0).has_value());
}

TEST(Metrics, OnePixelShiftDetectedExactly) {
  const auto gt = point_map(5, 5, 4.0);
  const auto pred = point_map(6, 5, 4.0);
  const auto m = match(pred, gt);
  EXPECT_EQ(m.dx, 1);
  EXPECT_EQ(m.dy, 0);
  EXPECT_EQ(m.e_x, 1.0);
  EXPECT_EQ(m.e_y, 0.0);
  EXPECT_EQ(m.e_eucl, 1.0);
  const auto r = random_map(4);
  EXPECT_NEAR(*zncc_at(shifted(r, 1, 0), r, 1, 0), 1.0, 1e-12);
  const auto d = match(point_map(7, 8, 2.0), point_map(5, 5, 2.0));
  EXPECT_EQ(d.e_eucl, std::sqrt(4.0 + 9.0));
}

TEST(Metrics, AffineInvarianceExact) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto pred = random_map(10 + s), gt = random_map(50 + s);
    Heatmap t;
    for (std::size_t i = 0; i < 100; ++i) t.values[i] = 2.0 * pred.values[i] + 3.0;
    const auto a = match(pred, gt), b = match(t, gt);
    EXPECT_NEAR(a.a_sim, b.a_sim, 1e-12);
    EXPECT_EQ(a.dx, b.dx);
    EXPECT_EQ(a.dy, b.dy);
    EXPECT_EQ(a.e_eucl, std::sqrt(a.e_x * a.e_x + a.e_y * a.e_y));
  }
}

TEST(Metrics, ConstantPredictionPenalized) {
  Heatmap flat;
  const auto m = match(flat, point_map(3, 3, 1.0));
  EXPECT_EQ(m.a_sim, 0.0);
  EXPECT_EQ(m.e_x, 9.0);
  EXPECT_EQ(m.e_y, 9.0);
  EXPECT_NEAR(m.e_eucl, 9.0 * std::sqrt(2.0), 1e-12);
}

TEST(Metrics, ForceErrorArithmeticAndConsistency) {
  ForceRangeMap ranges;
  ranges.ranges.assign(100, {0.0, 20.0});
  const auto gt = point_map(2, 2, 10.0);
  const auto pred = point_map(2, 2, 9.0);
  const auto e = force_error(pred, gt, ranges);
  EXPECT_NEAR(e.percent, 5.0, 1e-12);
  EXPECT_NEAR(e.newtons, 1.0, 1e-12);
  EXPECT_EQ(force_error(gt, gt, ranges).percent, 0.0);
  EXPECT_THROW(force_error(pred, Heatmap{}, ranges), UsageError);

  const auto real = build_range_map(1, default_deformation_params());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 15);
  for (int i = 0; i < 200; ++i) {
    Heatmap g, p;
    const GridCoord c{1 + static_cast<int>(rng() % 10), 1 + static_cast<int>(rng() % 10)};
    g.at(c) = u(rng);
    p.at(c) = u(rng);
    const auto fe = force_error(p, g, real);
    const auto [lo, hi] = real.at(c);
    EXPECT_NEAR(fe.percent * (hi - lo) / 100.0, fe.newtons, 1e-12);
  }
  ForceRangeMap broken;
  broken.ranges.assign(100, {1.0, 1.0});
  EXPECT_THROW(force_error(pred, gt, broken), ConfigError);
}

TEST(Metrics, NonContactAccuracy) {
  std::vector<Heatmap> preds(4);
  EXPECT_EQ(non_contact_accuracy(preds, 0.2), 1.0);
  preds[1].values[3] = 0.5;
  preds[2].values[9] = 0.3;
  EXPECT_EQ(non_contact_accuracy(preds, 0.2), 0.5);
  EXPECT_THROW(non_contact_accuracy(std::span<const Heatmap>{}, 0.2), UsageError);
}

TEST(Metrics, Spearman) {
  std::vector<double> a{1, 2, 3, 4, 5}, b{10, 20, 30, 40, 50}, c{5, 4, 3, 2, 1};
  EXPECT_NEAR(spearman(a, b), 1.0, 1e-12);
  EXPECT_NEAR(spearman(a, c), -1.0, 1e-12);
  std::vector<double> t{1, 1, 2, 3}, u{1, 2, 3, 4};
  // Ranks of t with ties averaged: 1.5 1.5 3 4.
  const double mr = 2.5;
  const double num = (1.5 - mr) * (1 - mr) + (1.5 - mr) * (2 - mr) + (3 - mr) * (3 - mr) + (4 - mr) * (4 - mr);
  const double den = std::sqrt((1.0 * 2 + 0.25 + 2.25) * (2.25 + 0.25 + 0.25 + 2.25));
  EXPECT_NEAR(spearman(t, u), num / den, 1e-12);
  std::vector<double> k{2, 2, 2, 2};
  EXPECT_EQ(spearman(k, u), 0.0);
  EXPECT_THROW(spearman(a, u), UsageError);
}
