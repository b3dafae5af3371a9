#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "instobj/errors.hpp"
#include "instobj/hull_volume.hpp"

using namespace instobj;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Monotone-chain convex hull and shoelace area as an independent 2-D oracle.
double polygon_hull_area(std::vector<std::pair<double, double>> p) {
  std::sort(p.begin(), p.end());
  auto cross = [](auto o, auto a, auto b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<double, double>> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  double area = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& a = h[i];
    const auto& b = h[(i + 1) % h.size()];
    area += a.first * b.second - b.first * a.second;
  }
  return 0.5 * std::abs(area);
}

Eigen::MatrixXd box_vertices(const std::vector<double>& sides) {
  const int d = static_cast<int>(sides.size());
  Eigen::MatrixXd p(1 << d, d);
  for (int m = 0; m < (1 << d); ++m) {
    for (int j = 0; j < d; ++j) p(m, j) = (m >> j & 1) ? sides[j] : 0.0;
  }
  return p;
}

}  // namespace

TEST(Hull, LpSolverBasics) {
  // min x1 + x2 s.t. x1 + 2 x2 = 4, x >= 0 -> x = (0, 2), objective 2.
  Eigen::MatrixXd a(1, 2);
  a << 1, 2;
  Eigen::VectorXd b(1), c(2);
  b << 4;
  c << 1, 1;
  const auto r = solve_lp(a, b, c);
  ASSERT_EQ(r.status, LpResult::Status::Optimal);
  EXPECT_NEAR(r.objective, 2.0, 1e-12);
  b << -4;
  EXPECT_EQ(solve_lp(a, b, c).status, LpResult::Status::Infeasible);
  Eigen::MatrixXd a2(1, 2);
  a2 << 1, -1;
  Eigen::VectorXd b2(1), c2(2);
  b2 << 1;
  c2 << 0, -1;
  EXPECT_EQ(solve_lp(a2, b2, c2).status, LpResult::Status::Unbounded);
}

TEST(Hull, NineSimplexVolume) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(10, 9);
  for (int i = 0; i < 9; ++i) p(i + 1, i) = 1.0;
  HullVolumeOptions opt;
  opt.samples = 100000;
  opt.seed = 1;
  const auto est = hull_volume(p, opt);
  const double truth = 1.0 / factorial(9);
  EXPECT_DOUBLE_EQ(truth, 1.0 / 362880.0);
  EXPECT_EQ(est.affine_dim, 9);
  EXPECT_LT(std::abs(est.volume - truth) / truth, 0.05);
  EXPECT_GT(est.std_error, 0.0);
}

TEST(Hull, AxisAlignedBoxes) {
  HullVolumeOptions opt;
  opt.samples = 20000;
  for (const auto& sides : {std::vector<double>{1, 2, 3}, std::vector<double>{0.5, 1, 1.5, 2, 2.5, 3, 1, 1, 2}}) {
    double truth = 1;
    for (double s : sides) truth *= s;
    const auto est = hull_volume(box_vertices(sides), opt);
    EXPECT_LT(std::abs(est.volume - truth) / truth, 0.05) << sides.size();
  }
}

TEST(Hull, PolygonAreaOracle) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int rep = 0; rep < 3; ++rep) {
    Eigen::MatrixXd p(40, 2);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 40; ++i) {
      p(i, 0) = n(rng);
      p(i, 1) = 0.3 * n(rng) + 0.5 * p(i, 0);
      pts.emplace_back(p(i, 0), p(i, 1));
    }
    HullVolumeOptions opt;
    opt.samples = 20000;
    opt.seed = rep;
    const double truth = polygon_hull_area(pts);
    EXPECT_LT(std::abs(hull_volume(p, opt).volume - truth) / truth, 0.05);
  }
}

TEST(Hull, TranslationAndScaleInvariance) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  Eigen::MatrixXd p(60, 9);
  for (int i = 0; i < p.size(); ++i) p.data()[i] = n(rng);
  HullVolumeOptions opt;
  opt.samples = 20000;
  const double v = hull_volume(p, opt).volume;
  Eigen::MatrixXd t = p.rowwise() + Eigen::RowVectorXd::Constant(9, 17.0);
  EXPECT_LT(std::abs(hull_volume(t, opt).volume - v) / v, 0.05);
  const double s = 1.7;
  EXPECT_LT(std::abs(hull_volume(s * p, opt).volume - std::pow(s, 9) * v) / (std::pow(s, 9) * v), 0.05);
}

TEST(Hull, DegenerateInputsHaveZeroVolume) {
  Eigen::MatrixXd same = Eigen::MatrixXd::Ones(20, 9);
  EXPECT_EQ(hull_volume(same).volume, 0.0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  Eigen::MatrixXd flat(30, 9);
  for (int i = 0; i < flat.size(); ++i) flat.data()[i] = n(rng);
  flat.col(8) = flat.col(0) + flat.col(1);
  const auto est = hull_volume(flat);
  EXPECT_EQ(est.volume, 0.0);
  EXPECT_EQ(est.affine_dim, 8);
}

TEST(Hull, ForceSensitivity) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(10, 9);
  for (int i = 0; i < 9; ++i) p(i + 1, i) = 1.0;
  std::vector<double> f{0, 1, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  HullVolumeOptions opt;
  opt.samples = 100000;
  const auto s = force_sensitivity(p, f, opt);
  EXPECT_LT(std::abs(s.delta - 1.0 / 362880.0) * 362880.0, 0.05);
  EXPECT_EQ(s.force_range, 1.0);
  Eigen::MatrixXd same = Eigen::MatrixXd::Ones(10, 9);
  EXPECT_EQ(force_sensitivity(same, f).delta, 0.0);
  std::vector<double> flat(10, 2.0);
  EXPECT_THROW(force_sensitivity(p, flat), UsageError);
  EXPECT_THROW(force_sensitivity(p.topRows(9), std::span<const double>(f).first(9)), UsageError);
}
