#include <gtest/gtest.h>

#include <set>

#include "instobj/errors.hpp"
#include "instobj/geometry.hpp"

using namespace instobj;

TEST(Geometry, DefaultDimensions) {
  const auto cfg = default_config();
  EXPECT_DOUBLE_EQ(cfg.core_edge, 26.0);
  EXPECT_DOUBLE_EQ(cfg.shell_outer_edge, 42.0);
  EXPECT_DOUBLE_EQ(cfg.wall_thickness(), 8.0);
  EXPECT_DOUBLE_EQ(cfg.pixel_pitch(), 2.6);
  ASSERT_EQ(cfg.faces.size(), 5u);
  for (const auto& f : cfg.faces) {
    EXPECT_EQ(f.magnets.size(), 5u);
    EXPECT_EQ(f.sensors.size(), 3u);
  }
  EXPECT_TRUE(validate(cfg).empty());
}

TEST(Geometry, MagnetDepthBelowSurface) {
  // 8 mm wall, 3 mm pocket from the inner surface: magnet plane at z = 3,
  // i.e. 5 mm under the outer surface; a 1 mm disk centred there stays inside.
  const auto cfg = default_config();
  for (const auto& f : cfg.faces) {
    for (const auto& m : f.magnets) {
      EXPECT_DOUBLE_EQ(cfg.outer_surface_z() - m.rest_position.z(), 5.0);
      EXPECT_GT(m.rest_position.z() - 0.5, 0.0);
      EXPECT_LT(m.rest_position.z() + 0.5, cfg.outer_surface_z());
      EXPECT_LE(std::abs(m.rest_position.x()), 13.0);
      EXPECT_LE(std::abs(m.rest_position.y()), 13.0);
    }
  }
}

TEST(Geometry, PixelToPointOracle) {
  const auto cfg = default_config();
  const Vec3 p = pixel_to_point(cfg, 1, GridCoord{1, 1});
  const double expected = (1.0 - 5.5) * (26.0 / 10.0);
  EXPECT_NEAR(p.x(), expected, 1e-12);
  EXPECT_NEAR(p.y(), -11.7, 1e-12);
  EXPECT_DOUBLE_EQ(p.z(), 8.0);
  const Vec3 c = pixel_to_point(cfg, 1, 5.5, 5.5);
  EXPECT_NEAR(c.norm() - 8.0, 0.0, 1e-12);
}

TEST(Geometry, PixelToPointInjectiveAndReflective) {
  const auto cfg = default_config();
  for (int face = 1; face <= 5; ++face) {
    std::set<std::pair<double, double>> seen;
    for (int x = 1; x <= 10; ++x) {
      for (int y = 1; y <= 10; ++y) {
        const Vec3 p = pixel_to_point(cfg, face, GridCoord{x, y});
        seen.insert({p.x(), p.y()});
        const Vec3 r = pixel_to_point(cfg, face, GridCoord{11 - x, y});
        EXPECT_EQ(r.x(), -p.x());
        EXPECT_EQ(r.y(), p.y());
      }
    }
    EXPECT_EQ(seen.size(), 100u);
  }
}

TEST(Geometry, InvalidFaceThrows) {
  const auto cfg = default_config();
  EXPECT_THROW(pixel_to_point(cfg, 6, GridCoord{1, 1}), ConfigError);
  EXPECT_THROW(cfg.face(0), ConfigError);
}

TEST(Geometry, ValidateReportsViolations) {
  auto cfg = default_config();
  cfg.faces[1].magnets.pop_back();
  auto v = validate(cfg);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find('2'), std::string::npos);

  cfg = default_config();
  cfg.faces[0].magnets[0].moment_direction = Vec3(0, 0, 1.1);
  EXPECT_EQ(validate(cfg).size(), 1u);
}

TEST(Geometry, FaceFramesAreOrthonormalAndDistinct) {
  const auto cfg = default_config();
  std::set<std::tuple<double, double, double>> normals;
  for (const auto& f : cfg.faces) {
    const Mat3& r = f.frame.rotation;
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    const Vec3 n = r.col(2);
    normals.insert({n.x(), n.y(), n.z()});
    EXPECT_NEAR((f.frame.translation - 13.0 * n).norm(), 0.0, 1e-12);
  }
  EXPECT_EQ(normals.size(), 5u);
  const Vec3 n3 = cfg.face(3).frame.rotation.col(2);
  const Vec3 n5 = cfg.face(5).frame.rotation.col(2);
  EXPECT_NEAR((n3 + n5).norm(), 0.0, 1e-12);
}
