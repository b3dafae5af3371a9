#include "instobj/magnetics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "instobj/errors.hpp"

namespace instobj {

namespace {

constexpr double kTeslaToMicro = 1e6;

HallFrame read_impl(const ObjectConfig& config, std::span<const DipoleState> dipoles, int face,
                    const SensorModel* sensor, std::uint64_t rng_seed, bool own_only) {
  const FaceConfig& fc = config.face(face);
  HallFrame frame;
  frame.face_index = face;

  for (std::size_t s = 0; s < fc.sensors.size(); ++s) {
    const Vec3 at = fc.frame.to_object(fc.sensors[s].position);
    Vec3 field = Vec3::Zero();
    for (const auto& d : dipoles) {
      if (own_only && d.face_index != face) continue;
      field += dipole_field(d, at);
    }
    field *= kTeslaToMicro;
    if (sensor != nullptr && sensor->ambient_field_ut) field += *sensor->ambient_field_ut;
    const Vec3 local = fc.sensors[s].orientation * field;
    for (int a = 0; a < 3; ++a) frame.values[3 * s + a] = local[a];
  }

  if (sensor == nullptr) return frame;

  if (sensor->noise_sd_ut > 0.0) {
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> noise(0.0, sensor->noise_sd_ut);
    for (double& v : frame.values) v += noise(rng);
  }
  if (sensor->adc_full_scale_ut) {
    const double fs = *sensor->adc_full_scale_ut;
    const double lsb = 2.0 * fs / std::ldexp(1.0, sensor->adc_bits);
    for (double& v : frame.values) {
      v = std::clamp(std::round(v / lsb) * lsb, -fs, fs);
    }
  }
  return frame;
}

}  // namespace

Vec3 dipole_field(const DipoleState& dipole, const Vec3& point) {
  const Vec3 r_mm = point - dipole.position;
  const double dist_mm = r_mm.norm();
  if (!(dist_mm > kDipoleExclusionMm)) {
    throw SingularityError("field point within " + std::to_string(kDipoleExclusionMm) +
                           " mm of a dipole");
  }
  const Vec3 r_hat = r_mm / dist_mm;
  const double dist_m = dist_mm * 1e-3;
  const double scale = kMu0Over4Pi / (dist_m * dist_m * dist_m);
  return scale * (3.0 * dipole.moment.dot(r_hat) * r_hat - dipole.moment);
}

std::vector<DipoleState> rest_dipoles(const ObjectConfig& config) {
  std::vector<DipoleState> out;
  out.reserve(config.faces.size() * kMagnetsPerFace);
  for (const auto& face : config.faces) {
    for (const auto& m : face.magnets) {
      out.push_back({face.frame.to_object(m.rest_position),
                     face.frame.to_object_direction(m.moment_direction) * m.moment_magnitude,
                     face.face_index});
    }
  }
  return out;
}

HallFrame read_sensors(const ObjectConfig& config, std::span<const DipoleState> dipoles,
                       int face, const SensorModel& sensor, std::uint64_t rng_seed) {
  return read_impl(config, dipoles, face, &sensor, rng_seed, false);
}

HallFrame read_sensors_isolated(const ObjectConfig& config,
                                std::span<const DipoleState> dipoles, int face,
                                const SensorModel& sensor, std::uint64_t rng_seed) {
  return read_impl(config, dipoles, face, &sensor, rng_seed, true);
}

HallFrame read_sensors_exact(const ObjectConfig& config, std::span<const DipoleState> dipoles,
                             int face, bool own_face_only) {
  return read_impl(config, dipoles, face, nullptr, 0, own_face_only);
}

}  // namespace instobj
