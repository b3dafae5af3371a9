#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "instobj/geometry.hpp"

namespace instobj {

/// mu0 / 4pi in T*m/A.
inline constexpr double kMu0Over4Pi = 1e-7;

/// Field evaluations closer than this to a dipole are rejected.
inline constexpr double kDipoleExclusionMm = 0.1;

/// Nine Hall readings of one face, in microtesla, ordered
/// (s1.x, s1.y, s1.z, s2.x, ..., s3.z).
struct HallFrame {
  std::array<double, kSignalsPerFace> values{};
  int face_index = 0;

  friend bool operator==(const HallFrame&, const HallFrame&) = default;
};

/// A magnet's current state in the object frame.
struct DipoleState {
  Vec3 position = Vec3::Zero();  // mm
  Vec3 moment = Vec3::Zero();    // A*m^2
  int face_index = 0;            // owning face
};

struct SensorModel {
  double noise_sd_ut = 2.0;
  /// Constant ambient field added at every sensor (object frame, uT).
  std::optional<Vec3> ambient_field_ut;
  /// Optional ADC quantizer: full-scale range in uT (symmetric) and bit depth.
  std::optional<double> adc_full_scale_ut;
  int adc_bits = 12;
};

/// Point-dipole flux density (tesla) at `point` (mm, object frame).
/// Throws SingularityError inside the exclusion radius.
Vec3 dipole_field(const DipoleState& dipole, const Vec3& point);

/// Rest-state dipoles for every magnet of every face, face-major in config order.
std::vector<DipoleState> rest_dipoles(const ObjectConfig& config);

/// Sum of all dipoles' fields at each sensor of `face`, rotated into sensor
/// axes, in uT, plus i.i.d. Gaussian noise drawn from a stream seeded by
/// `rng_seed`.
HallFrame read_sensors(const ObjectConfig& config, std::span<const DipoleState> dipoles,
                       int face, const SensorModel& sensor, std::uint64_t rng_seed);

/// As read_sensors, but only the dipoles owned by `face` contribute.
HallFrame read_sensors_isolated(const ObjectConfig& config,
                                std::span<const DipoleState> dipoles, int face,
                                const SensorModel& sensor, std::uint64_t rng_seed);

/// Noise-free reading without ambient field or quantization.
HallFrame read_sensors_exact(const ObjectConfig& config, std::span<const DipoleState> dipoles,
                             int face, bool own_face_only = false);

}  // namespace instobj
