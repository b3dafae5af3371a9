#include "instobj/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "instobj/errors.hpp"

namespace instobj {

namespace {

std::size_t pixel_index(const GridCoord& c, int grid) {
  return static_cast<std::size_t>((c.y - 1) * grid + (c.x - 1));
}

double polynomial(double depth, double k1, double k3) {
  return k1 * depth + k3 * depth * depth * depth;
}

}  // namespace

double DeformationParams::stiffness(int face, const GridCoord& coord) const {
  if (face < 1 || static_cast<std::size_t>(face) > stiffness_map.size()) {
    throw ConfigError("no stiffness map for face " + std::to_string(face));
  }
  if (!is_valid(coord, grid)) throw ConfigError("stiffness lookup outside the pixel grid");
  return stiffness_map[face - 1][pixel_index(coord, grid)];
}

DeformationParams default_deformation_params(int grid) {
  DeformationParams p;
  p.grid = grid;
  const double centre = 0.5 * (grid + 1);
  const double r_corner = std::hypot(1.0 - centre, 1.0 - centre);
  std::vector<double> map(static_cast<std::size_t>(grid * grid));
  for (int y = 1; y <= grid; ++y) {
    for (int x = 1; x <= grid; ++x) {
      const double r = std::hypot(x - centre, y - centre);
      map[pixel_index({x, y}, grid)] = 1.0 + 0.5 * r / r_corner;
    }
  }
  p.stiffness_map.assign(kActiveFaces, map);
  return p;
}

DeformationParams uniform_deformation_params(double multiplier, int grid) {
  DeformationParams p;
  p.grid = grid;
  p.stiffness_map.assign(kActiveFaces,
                         std::vector<double>(static_cast<std::size_t>(grid * grid), multiplier));
  return p;
}

void check(const DeformationParams& params, const ObjectConfig& config) {
  if (!(params.kernel_sigma > 0.0)) throw ConfigError("kernel_sigma must be positive");
  if (!(params.k1 > 0.0)) throw ConfigError("k1 must be positive");
  if (!(params.k3 >= 0.0)) throw ConfigError("k3 must be non-negative");
  if (!(params.max_depth > 0.0 && params.max_depth < config.wall_thickness())) {
    throw ConfigError("max_depth must lie in (0, wall thickness)");
  }
  if (params.grid != config.pixel_grid) throw ConfigError("stiffness grid != pixel grid");
  if (params.stiffness_map.size() < static_cast<std::size_t>(kActiveFaces)) {
    throw ConfigError("stiffness_map needs one entry per active face");
  }
  for (const auto& m : params.stiffness_map) {
    if (m.size() != static_cast<std::size_t>(params.grid * params.grid)) {
      throw ConfigError("stiffness_map entry has the wrong size");
    }
    for (double v : m) {
      if (!(v >= 0.5)) throw ConfigError("stiffness multipliers must be >= 0.5");
    }
  }
}

double force_from_depth(double depth, int face, const GridCoord& coord,
                        const DeformationParams& params) {
  if (!(depth >= 0.0 && depth <= params.max_depth)) {
    throw DomainError("depth " + std::to_string(depth) + " mm outside [0, max_depth]");
  }
  return params.stiffness(face, coord) * polynomial(depth, params.k1, params.k3);
}

double depth_for_force(double force, int face, const GridCoord& coord,
                       const DeformationParams& params) {
  const double s = params.stiffness(face, coord);
  const double f_max = s * polynomial(params.max_depth, params.k1, params.k3);
  if (!(force >= 0.0)) throw DomainError("force must be non-negative");
  if (force > f_max) {
    throw RangeError("force " + std::to_string(force) + " N exceeds the location maximum " +
                     std::to_string(f_max) + " N");
  }
  if (force == 0.0) return 0.0;

  double lo = 0.0;
  double hi = params.max_depth;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f = s * polynomial(mid, params.k1, params.k3);
    if (f < force) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double f_lo = s * polynomial(lo, params.k1, params.k3);
  const double f_hi = s * polynomial(hi, params.k1, params.k3);
  return (force - f_lo <= f_hi - force) ? lo : hi;
}

std::vector<double> inward_displacements(std::span<const DepthContact> contacts,
                                         const ObjectConfig& config,
                                         const DeformationParams& params, bool clamp) {
  std::vector<double> out(config.faces.size() * kMagnetsPerFace, 0.0);
  const double two_sigma_sq = 2.0 * params.kernel_sigma * params.kernel_sigma;

  for (const auto& c : contacts) {
    const std::size_t slot = config.face_slot(c.face);
    const Vec3 p = pixel_to_point(config, c.face, c.coord);
    const auto& magnets = config.faces[slot].magnets;
    for (std::size_t m = 0; m < magnets.size(); ++m) {
      const double dx = magnets[m].rest_position.x() - p.x();
      const double dy = magnets[m].rest_position.y() - p.y();
      out[slot * kMagnetsPerFace + m] += c.depth * std::exp(-(dx * dx + dy * dy) / two_sigma_sq);
    }
  }
  if (clamp) {
    for (double& d : out) d = std::min(d, params.max_depth);
  }
  return out;
}

std::vector<DipoleState> displaced_dipoles(const ObjectConfig& config,
                                           std::span<const double> inward) {
  std::vector<DipoleState> dipoles = rest_dipoles(config);
  if (inward.size() != dipoles.size()) throw UsageError("displacement vector size mismatch");
  for (std::size_t i = 0; i < dipoles.size(); ++i) {
    if (inward[i] == 0.0) continue;
    const auto& face = config.faces[i / kMagnetsPerFace];
    dipoles[i].position -= face.frame.rotation.col(2) * inward[i];
  }
  return dipoles;
}

void check(const ContactSpec& contacts, const ObjectConfig& config) {
  std::map<int, int> per_face;
  for (const auto& c : contacts.contacts) {
    if (!config.has_face(c.face)) {
      throw UsageError("contact on inactive face " + std::to_string(c.face));
    }
    if (!is_valid(c.coord, config.pixel_grid)) throw UsageError("contact outside the grid");
    if (!(c.force >= 0.0)) throw UsageError("contact forces must be non-negative");
    if (++per_face[c.face] > kMaxContactsPerFace) {
      throw UsageError("more than three contacts on face " + std::to_string(c.face));
    }
  }
}

std::vector<DipoleState> magnet_displacements(const ContactSpec& contacts,
                                              const ObjectConfig& config,
                                              const DeformationParams& params) {
  check(contacts, config);
  std::vector<DepthContact> depths;
  depths.reserve(contacts.contacts.size());
  for (const auto& c : contacts.contacts) {
    depths.push_back({c.face, c.coord, depth_for_force(c.force, c.face, c.coord, params)});
  }
  const auto inward = inward_displacements(depths, config, params, true);
  return displaced_dipoles(config, inward);
}

std::pair<double, double> location_force_range(int face, const GridCoord& coord,
                                               const DeformationParams& params,
                                               const DepthRange& sweep) {
  return {force_from_depth(sweep.min_depth, face, coord, params),
          force_from_depth(sweep.max_depth, face, coord, params)};
}

}  // namespace instobj
