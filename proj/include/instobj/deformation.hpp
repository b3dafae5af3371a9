#pragma once

#include <span>
#include <utility>
#include <vector>

#include "instobj/geometry.hpp"
#include "instobj/magnetics.hpp"

namespace instobj {

/// Maximum simultaneous contacts resolvable on one face.
inline constexpr int kMaxContactsPerFace = 3;

struct Contact {
  int face = 1;
  GridCoord coord;
  double force = 0.0;  // N, normal
};

struct ContactSpec {
  std::vector<Contact> contacts;
};

/// Indentation applied at a pixel, used where the probe is displacement-driven.
struct DepthContact {
  int face = 1;
  GridCoord coord;
  double depth = 0.0;  // mm
};

/// Indentation sweep limits of the data-collection rig.
struct DepthRange {
  double min_depth = 0.3;  // mm
  double max_depth = 2.0;  // mm
};

/// Shell mechanics: a Gaussian inward-displacement kernel and a cubic
/// force law F = s(x, y) * (k1 d + k3 d^3) scaled by a per-pixel stiffness map.
struct DeformationParams {
  double kernel_sigma = 6.0;  // mm
  double k1 = 4.0;            // N/mm
  double k3 = 0.5;            // N/mm^3
  double max_depth = 2.5;     // mm, clamp on magnet travel
  int grid = 10;
  /// Indexed by face_index - 1; each entry has grid*grid multipliers,
  /// row-major with index (y-1)*grid + (x-1).
  std::vector<std::vector<double>> stiffness_map;

  double stiffness(int face, const GridCoord& coord) const;
};

/// Radially stiffening shell: multiplier 1.0 at the centre rising linearly to
/// 1.5 at the corner pixels, identical on every face.
DeformationParams default_deformation_params(int grid = 10);

/// Uniform multiplier everywhere.
DeformationParams uniform_deformation_params(double multiplier = 1.0, int grid = 10);

/// Throws ConfigError on violated invariants.
void check(const DeformationParams& params, const ObjectConfig& config);

double force_from_depth(double depth, int face, const GridCoord& coord,
                        const DeformationParams& params);

/// Inverse of force_from_depth by bisection; |F(d) - force| <= 1e-9 N.
double depth_for_force(double force, int face, const GridCoord& coord,
                       const DeformationParams& params);

/// Inward travel of every magnet (rest_dipoles order) for the given
/// indentations. Per face, kernel-weighted depths are summed and, if `clamp`,
/// limited to max_depth.
std::vector<double> inward_displacements(std::span<const DepthContact> contacts,
                                         const ObjectConfig& config,
                                         const DeformationParams& params, bool clamp = true);

/// Rest dipoles moved inward along their face normal by `inward` (mm).
std::vector<DipoleState> displaced_dipoles(const ObjectConfig& config,
                                           std::span<const double> inward);

/// Force-specified contacts -> displaced magnets. Throws UsageError on an
/// invalid ContactSpec and RangeError if a force exceeds the location maximum.
std::vector<DipoleState> magnet_displacements(const ContactSpec& contacts,
                                              const ObjectConfig& config,
                                              const DeformationParams& params);

/// (F(min_depth), F(max_depth)) at a location for the rig's sweep limits.
std::pair<double, double> location_force_range(int face, const GridCoord& coord,
                                               const DeformationParams& params,
                                               const DepthRange& sweep = {});

/// Throws UsageError unless forces are >= 0, coords are valid and no face has
/// more than three contacts.
void check(const ContactSpec& contacts, const ObjectConfig& config);

}  // namespace instobj
