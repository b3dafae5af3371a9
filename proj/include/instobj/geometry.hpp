#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace instobj {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Number of faces carrying magnets and sensors (the sixth face routes wires).
inline constexpr int kActiveFaces = 5;
inline constexpr int kMagnetsPerFace = 5;
inline constexpr int kSensorsPerFace = 3;
inline constexpr int kSignalsPerFace = 3 * kSensorsPerFace;

/// Depth of the magnet pockets measured from the inner shell surface.
inline constexpr double kMagnetHoleDepthMm = 3.0;

/// Face frame -> object frame. Columns of `rotation` are the face x, y and
/// outward normal expressed in object coordinates.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_object(const Vec3& p) const { return rotation * p + translation; }
  Vec3 to_object_direction(const Vec3& v) const { return rotation * v; }
  Vec3 to_face(const Vec3& p) const { return rotation.transpose() * (p - translation); }
};

struct MagnetSpec {
  Vec3 rest_position = Vec3::Zero();  // mm, face frame
  double moment_magnitude = 0.0;      // A*m^2
  Vec3 moment_direction = Vec3::UnitZ();
};

struct SensorSpec {
  Vec3 position = Vec3::Zero();      // mm, face frame
  Mat3 orientation = Mat3::Identity();  // object-frame field -> sensor axes
};

/// One active face. The face frame has its origin at the centre of the core
/// face, +Z along the outward normal; the shell's outer surface is the plane
/// z = wall thickness.
struct FaceConfig {
  int face_index = 0;
  RigidTransform frame;
  std::vector<MagnetSpec> magnets;
  std::vector<SensorSpec> sensors;
};

struct GridCoord {
  int x = 1;
  int y = 1;

  friend bool operator==(const GridCoord&, const GridCoord&) = default;
  friend auto operator<=>(const GridCoord&, const GridCoord&) = default;
};

struct ObjectConfig {
  double core_edge = 26.0;         // mm
  double shell_outer_edge = 42.0;  // mm
  std::vector<FaceConfig> faces;
  int pixel_grid = 10;

  double wall_thickness() const { return 0.5 * (shell_outer_edge - core_edge); }
  double pixel_pitch() const { return core_edge / pixel_grid; }
  double outer_surface_z() const { return wall_thickness(); }

  /// Throws ConfigError when `face_index` is not an active face.
  const FaceConfig& face(int face_index) const;
  bool has_face(int face_index) const;
  /// Position of a face within `faces`.
  std::size_t face_slot(int face_index) const;
};

/// The reference cube: 26 mm core, 42 mm shell, five instrumented faces,
/// quincunx magnets and three diagonal sensors per face.
ObjectConfig default_config();

bool is_valid(const GridCoord& coord, int grid);

/// Pixel-centre point on the outer surface, face frame, mm.
Vec3 pixel_to_point(const ObjectConfig& config, int face, const GridCoord& coord);

/// Continuous variant; (x, y) are in pixel units, 1-based, so ((M+1)/2, (M+1)/2)
/// is the face centre.
Vec3 pixel_to_point(const ObjectConfig& config, int face, double x, double y);

/// Human-readable list of invariant violations; empty when the config is sound.
std::vector<std::string> validate(const ObjectConfig& config);

}  // namespace instobj
