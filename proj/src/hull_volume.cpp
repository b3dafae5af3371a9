#include "instobj/hull_volume.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "instobj/errors.hpp"

namespace instobj {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr int kBlandAfter = 50;  // switch to Bland's rule after this many pivots per phase

class Tableau {
 public:
  Tableau(int rows, int cols) : rows_(rows), cols_(cols), t_((rows + 1) * (cols + 1), 0.0) {}
  double& at(int r, int c) { return t_[static_cast<std::size_t>(r) * (cols_ + 1) + c]; }
  double& rhs(int r) { return at(r, cols_); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  void pivot(int pr, int pc) {
    const double inv = 1.0 / at(pr, pc);
    for (int c = 0; c <= cols_; ++c) at(pr, c) *= inv;
    for (int r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
  }

 private:
  int rows_, cols_;
  std::vector<double> t_;
};

// Row `rows()` holds reduced costs; its rhs holds -objective.
// Returns false when unbounded.
bool run_simplex(Tableau& t, std::vector<int>& basis, const std::vector<bool>& enterable) {
  const int m = t.rows();
  for (int iter = 0;; ++iter) {
    const bool bland = iter >= kBlandAfter;
    int pc = -1;
    double best = -kPivotTol;
    for (int c = 0; c < t.cols(); ++c) {
      if (!enterable[c]) continue;
      const double rc = t.at(m, c);
      if (rc < best) {
        pc = c;
        if (bland) break;
        best = rc;
      }
    }
    if (pc < 0) return true;

    int pr = -1;
    double ratio = 0.0;
    for (int r = 0; r < m; ++r) {
      const double a = t.at(r, pc);
      if (a <= kPivotTol) continue;
      const double q = t.rhs(r) / a;
      if (pr < 0 || q < ratio - 1e-14 ||
          (std::abs(q - ratio) <= 1e-14 && basis[r] < basis[pr])) {
        pr = r;
        ratio = q;
      }
    }
    if (pr < 0) return false;
    t.pivot(pr, pc);
    basis[pr] = pc;
  }
}

}  // namespace

LpResult solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (b.size() != m || c.size() != n) throw UsageError("LP dimensions disagree");

  // Columns: n structural, m artificial.
  Tableau t(m, n + m);
  std::vector<int> basis(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) {
    const double sign = b(r) < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) t.at(r, j) = sign * a(r, j);
    t.at(r, n + r) = 1.0;
    t.rhs(r) = sign * b(r);
    basis[static_cast<std::size_t>(r)] = n + r;
  }
  // Phase 1: minimize the sum of artificials.
  for (int j = 0; j <= n + m; ++j) {
    double s = 0.0;
    if (j < n || j == n + m) {
      for (int r = 0; r < m; ++r) s += j == n + m ? t.rhs(r) : t.at(r, j);
    }
    t.at(m, j) = -s;
  }
  std::vector<bool> enterable(static_cast<std::size_t>(n + m), true);
  run_simplex(t, basis, enterable);

  LpResult res;
  double scale = 1.0;
  for (int r = 0; r < m; ++r) scale = std::max(scale, std::abs(b(r)));
  if (-t.rhs(m) > 1e-9 * scale) {
    res.status = LpResult::Status::Infeasible;
    return res;
  }
  // Drive zero-level artificials out of the basis where possible.
  for (int r = 0; r < m; ++r) {
    if (basis[static_cast<std::size_t>(r)] < n) continue;
    for (int j = 0; j < n; ++j) {
      if (std::abs(t.at(r, j)) > 1e-9) {
        t.pivot(r, j);
        basis[static_cast<std::size_t>(r)] = j;
        break;
      }
    }
  }
  for (int j = n; j < n + m; ++j) enterable[static_cast<std::size_t>(j)] = false;

  // Phase 2 reduced costs.
  for (int j = 0; j <= n + m; ++j) t.at(m, j) = j < n ? c(j) : 0.0;
  for (int r = 0; r < m; ++r) {
    const int bj = basis[static_cast<std::size_t>(r)];
    const double cb = bj < n ? c(bj) : 0.0;
    if (cb == 0.0) continue;
    for (int j = 0; j <= n + m; ++j) t.at(m, j) -= cb * t.at(r, j);
  }
  if (!run_simplex(t, basis, enterable)) {
    res.status = LpResult::Status::Unbounded;
    return res;
  }
  res.status = LpResult::Status::Optimal;
  res.x = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < m; ++r) {
    const int bj = basis[static_cast<std::size_t>(r)];
    if (bj < n) res.x(bj) = t.rhs(r);
  }
  res.objective = c.dot(res.x);
  return res;
}

std::optional<double> radial_extent(const Eigen::MatrixXd& points, const Eigen::VectorXd& center,
                                    const Eigen::VectorXd& direction) {
  // center + t u = sum(mu_j (p_j - center)) / sum(mu) with t = 1 / sum(mu):
  // minimize sum(mu) subject to (P - center) mu = u, mu >= 0.
  const Eigen::MatrixXd d = (points.rowwise() - center.transpose()).transpose();
  const auto lp = solve_lp(d, direction, Eigen::VectorXd::Ones(points.rows()));
  if (lp.status != LpResult::Status::Optimal || !(lp.objective > 0.0)) return std::nullopt;
  return 1.0 / lp.objective;
}

HullVolumeEstimate hull_volume(const Eigen::MatrixXd& points, const HullVolumeOptions& options) {
  HullVolumeEstimate est;
  const int d = static_cast<int>(points.cols());
  const Eigen::Index n = points.rows();
  if (d < 1 || n < 1) return est;

  const Eigen::VectorXd mean = points.colwise().mean();
  const Eigen::MatrixXd centered = points.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  const double top = lambda.maxCoeff();
  for (int i = 0; i < d; ++i) {
    if (top > 0.0 && lambda(i) > options.rank_tolerance * top) ++est.affine_dim;
  }
  if (est.affine_dim < d || n < d + 1) return est;

  // Whitened coordinates y = diag(lambda^-1/2) V' (x - mean).
  const Eigen::VectorXd inv_sd = lambda.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd white = (centered * eig.eigenvectors()) * inv_sd.asDiagonal();
  double log_jacobian = 0.0;
  for (int i = 0; i < d; ++i) log_jacobian += 0.5 * std::log(lambda(i));

  const double ball =
      std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss;
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(d);
  double sum = 0.0, sum_sq = 0.0;
  std::size_t used = 0;
  for (std::size_t s = 0; s < options.samples; ++s) {
    Eigen::VectorXd u(d);
    for (int i = 0; i < d; ++i) u(i) = gauss(rng);
    u.normalize();
    const auto rho = radial_extent(white, origin, u);
    if (!rho) continue;
    const double w = std::pow(*rho, d);
    sum += w;
    sum_sq += w * w;
    ++used;
  }
  if (used == 0) return est;
  const double mean_w = sum / static_cast<double>(used);
  const double var_w = std::max(0.0, sum_sq / static_cast<double>(used) - mean_w * mean_w);
  const double factor = ball * std::exp(log_jacobian);
  est.volume = factor * mean_w;
  est.std_error = factor * std::sqrt(var_w / static_cast<double>(used));
  est.samples = used;
  return est;
}

SensitivityEstimate force_sensitivity(const Eigen::MatrixXd& signals,
                                      std::span<const double> forces,
                                      const HullVolumeOptions& options) {
  if (signals.rows() < 10) throw UsageError("force sensitivity needs at least 10 samples");
  if (static_cast<std::size_t>(signals.rows()) != forces.size()) {
    throw UsageError("signal and force counts differ");
  }
  const auto [lo, hi] = std::minmax_element(forces.begin(), forces.end());
  SensitivityEstimate out;
  out.force_range = *hi - *lo;
  if (!(out.force_range > 0.0)) throw UsageError("force range must be positive");
  const auto vol = hull_volume(signals, options);
  out.volume = vol.volume;
  out.volume_std_error = vol.std_error;
  out.delta = vol.volume / out.force_range;
  return out;
}

}  // namespace instobj
