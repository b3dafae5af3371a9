#include "instobj/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "instobj/errors.hpp"

namespace instobj {

namespace {

// N50 disk, 6 mm x 1 mm: Br * V / mu0 with Br = 1.42 T.
constexpr double kN50DiskMoment = 0.032;

constexpr double kMagnetOffsetMm = 7.5;
constexpr double kSensorOffsetMm = 6.5;

RigidTransform face_frame(const Vec3& x_axis, const Vec3& y_axis, double core_half) {
  RigidTransform t;
  t.rotation.col(0) = x_axis;
  t.rotation.col(1) = y_axis;
  t.rotation.col(2) = x_axis.cross(y_axis);
  t.translation = t.rotation.col(2) * core_half;
  return t;
}

bool is_orthonormal(const Mat3& m, double tol) {
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

const FaceConfig& ObjectConfig::face(int face_index) const {
  return faces[face_slot(face_index)];
}

bool ObjectConfig::has_face(int face_index) const {
  return std::any_of(faces.begin(), faces.end(),
                     [&](const FaceConfig& f) { return f.face_index == face_index; });
}

std::size_t ObjectConfig::face_slot(int face_index) const {
  for (std::size_t i = 0; i < faces.size(); ++i) {
    if (faces[i].face_index == face_index) return i;
  }
  throw ConfigError("face " + std::to_string(face_index) + " is not an active face");
}

ObjectConfig default_config() {
  ObjectConfig config;
  const double half = 0.5 * config.core_edge;
  const double magnet_z = kMagnetHoleDepthMm;

  // Face 6 (-Z) carries the wiring and is absent. Faces 3 and 5 are opposite.
  const std::array<std::pair<Vec3, Vec3>, kActiveFaces> axes = {{
      {Vec3::UnitX(), Vec3::UnitY()},    // 1: +Z
      {Vec3::UnitY(), Vec3::UnitZ()},    // 2: +X
      {-Vec3::UnitX(), Vec3::UnitZ()},   // 3: +Y
      {-Vec3::UnitY(), Vec3::UnitZ()},   // 4: -X
      {Vec3::UnitX(), Vec3::UnitZ()},    // 5: -Y
  }};

  for (int i = 0; i < kActiveFaces; ++i) {
    FaceConfig face;
    face.face_index = i + 1;
    face.frame = face_frame(axes[i].first, axes[i].second, half);

    const std::array<Vec3, kMagnetsPerFace> magnet_xy = {
        Vec3(0.0, 0.0, magnet_z),
        Vec3(-kMagnetOffsetMm, -kMagnetOffsetMm, magnet_z),
        Vec3(kMagnetOffsetMm, -kMagnetOffsetMm, magnet_z),
        Vec3(-kMagnetOffsetMm, kMagnetOffsetMm, magnet_z),
        Vec3(kMagnetOffsetMm, kMagnetOffsetMm, magnet_z),
    };
    for (const auto& p : magnet_xy) {
      face.magnets.push_back({p, kN50DiskMoment, Vec3::UnitZ()});
    }

    const Mat3 world_to_face = face.frame.rotation.transpose();
    for (double s : {-kSensorOffsetMm, 0.0, kSensorOffsetMm}) {
      face.sensors.push_back({Vec3(s, s, 0.0), world_to_face});
    }
    config.faces.push_back(std::move(face));
  }
  return config;
}

bool is_valid(const GridCoord& coord, int grid) {
  return coord.x >= 1 && coord.x <= grid && coord.y >= 1 && coord.y <= grid;
}

Vec3 pixel_to_point(const ObjectConfig& config, int face, double x, double y) {
  (void)config.face(face);
  const double centre = 0.5 * (config.pixel_grid + 1);
  const double pitch = config.pixel_pitch();
  return {(x - centre) * pitch, (y - centre) * pitch, config.outer_surface_z()};
}

Vec3 pixel_to_point(const ObjectConfig& config, int face, const GridCoord& coord) {
  if (!is_valid(coord, config.pixel_grid)) {
    throw ConfigError("grid coordinate (" + std::to_string(coord.x) + "," +
                      std::to_string(coord.y) + ") outside the pixel grid");
  }
  return pixel_to_point(config, face, static_cast<double>(coord.x),
                        static_cast<double>(coord.y));
}

std::vector<std::string> validate(const ObjectConfig& config) {
  std::vector<std::string> out;
  auto report = [&](const std::string& msg) { out.push_back(msg); };

  if (!(config.shell_outer_edge > config.core_edge)) {
    report("shell_outer_edge must exceed core_edge");
  }
  if (config.pixel_grid < 2) report("pixel_grid must be at least 2");
  if (config.faces.size() != static_cast<std::size_t>(kActiveFaces)) {
    report("expected 5 active faces, found " + std::to_string(config.faces.size()));
  }

  std::set<int> seen;
  const double wall = config.wall_thickness();
  const double half = 0.5 * config.core_edge;
  // Magnets sit at the bottom of pockets drilled from the inner surface.
  const double expected_depth = wall - kMagnetHoleDepthMm;

  for (const auto& face : config.faces) {
    const std::string tag = "face " + std::to_string(face.face_index) + ": ";
    if (face.face_index < 1 || face.face_index > kActiveFaces) {
      report(tag + "face index outside [1,5]");
    }
    if (!seen.insert(face.face_index).second) report(tag + "duplicate face index");
    if (!is_orthonormal(face.frame.rotation, 1e-10) || face.frame.rotation.determinant() < 0) {
      report(tag + "frame rotation is not a proper rotation");
    }
    if (face.magnets.size() != static_cast<std::size_t>(kMagnetsPerFace)) {
      report(tag + "expected 5 magnets, found " + std::to_string(face.magnets.size()));
    }
    if (face.sensors.size() != static_cast<std::size_t>(kSensorsPerFace)) {
      report(tag + "expected 3 sensors, found " + std::to_string(face.sensors.size()));
    }
    for (std::size_t m = 0; m < face.magnets.size(); ++m) {
      const auto& mag = face.magnets[m];
      const std::string mtag = tag + "magnet " + std::to_string(m) + ": ";
      if (!(mag.moment_magnitude > 0.0)) report(mtag + "moment magnitude must be positive");
      if (std::abs(mag.moment_direction.norm() - 1.0) > 1e-12) {
        report(mtag + "moment direction is not a unit vector");
      } else if ((mag.moment_direction - Vec3::UnitZ()).norm() > 1e-12) {
        report(mtag + "moment must point along the outward normal");
      }
      if (std::abs(mag.rest_position.x()) > half || std::abs(mag.rest_position.y()) > half) {
        report(mtag + "rest position outside the face footprint");
      }
      if (std::abs((wall - mag.rest_position.z()) - expected_depth) > 1e-9) {
        report(mtag + "rest depth does not match the pocket depth");
      }
    }
    for (std::size_t s = 0; s < face.sensors.size(); ++s) {
      if (!is_orthonormal(face.sensors[s].orientation, 1e-10)) {
        report(tag + "sensor " + std::to_string(s) + ": orientation is not orthonormal");
      }
    }
  }
  return out;
}

}  // namespace instobj
