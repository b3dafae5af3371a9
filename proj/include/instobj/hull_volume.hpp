#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Dense>

namespace instobj {

/// Dense two-phase simplex for: minimize c'x subject to A x = b, x >= 0.
struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded } status = Status::Infeasible;
  double objective = 0.0;
  Eigen::VectorXd x;
};

LpResult solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c);

/// Largest t with center + t * direction in conv(rows of points). `center`
/// must lie in the interior of the hull; empty if the LP fails.
std::optional<double> radial_extent(const Eigen::MatrixXd& points, const Eigen::VectorXd& center,
                                    const Eigen::VectorXd& direction);

struct HullVolumeOptions {
  std::size_t samples = 200000;
  std::uint64_t seed = 0;
  /// Principal variances below this fraction of the largest count as flat.
  double rank_tolerance = 1e-12;
};

struct HullVolumeEstimate {
  double volume = 0.0;
  double std_error = 0.0;
  int affine_dim = 0;
  std::size_t samples = 0;
};

/// Monte Carlo volume of the convex hull of the rows of `points` (N x d).
/// Points are whitened by their principal axes; the volume is then the mean
/// of rho(u)^d over uniform random directions u times the unit-ball volume,
/// where rho is the hull's radial function about the centroid. Affinely
/// degenerate inputs (dimension < d) have volume 0.
HullVolumeEstimate hull_volume(const Eigen::MatrixXd& points, const HullVolumeOptions& options = {});

struct SensitivityEstimate {
  double delta = 0.0;
  double volume = 0.0;
  double volume_std_error = 0.0;
  double force_range = 0.0;
};

/// hull volume of the signals / (max force - min force). Throws UsageError
/// for fewer than 10 rows, mismatched lengths or a zero force range.
SensitivityEstimate force_sensitivity(const Eigen::MatrixXd& signals,
                                      std::span<const double> forces,
                                      const HullVolumeOptions& options = {});

}  // namespace instobj
