// AArch64 NEON variants (float64x2). Mirrors kernels_avx2.cpp at half width.

#include <arm_neon.h>

#include <algorithm>
#include <cmath>

#include "instobj/simd/kernels.hpp"

namespace instobj::simd {

namespace {

constexpr std::size_t kTileRows = 64;
constexpr std::size_t kTileCols = 64;
constexpr std::size_t kTileDepth = 256;
constexpr std::size_t kTileWide = 512;

inline double finish_dot(float64x2_t acc, const double* a, const double* b, std::size_t k2,
                         std::size_t k) {
  double s = vaddvq_f64(acc);
  for (std::size_t p = k2; p < k; ++p) s += a[p] * b[p];
  return s;
}

inline double dot_one(const double* a, const double* b, std::size_t k, std::size_t k2) {
  float64x2_t acc = vdupq_n_f64(0.0);
  for (std::size_t p = 0; p < k2; p += 2) acc = vfmaq_f64(acc, vld1q_f64(a + p), vld1q_f64(b + p));
  return finish_dot(acc, a, b, k2, k);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             const double* bias, double* c) {
  const std::size_t k2 = k & ~std::size_t{1};
  auto store = [&](std::size_t i, std::size_t j, double v) {
    c[i * n + j] = bias != nullptr ? v + bias[j] : v;
  };
  for (std::size_t ii = 0; ii < m; ii += kTileRows) {
    const std::size_t ie = std::min(m, ii + kTileRows);
    for (std::size_t jj = 0; jj < n; jj += kTileCols) {
      const std::size_t je = std::min(n, jj + kTileCols);
      std::size_t i = ii;
      for (; i + 2 <= ie; i += 2) {
        const double* a0 = a + i * k;
        const double* a1 = a0 + k;
        std::size_t j = jj;
        for (; j + 2 <= je; j += 2) {
          const double* b0 = b + j * k;
          const double* b1 = b0 + k;
          float64x2_t c00 = vdupq_n_f64(0.0), c01 = vdupq_n_f64(0.0);
          float64x2_t c10 = vdupq_n_f64(0.0), c11 = vdupq_n_f64(0.0);
          for (std::size_t p = 0; p < k2; p += 2) {
            const float64x2_t vb0 = vld1q_f64(b0 + p);
            const float64x2_t vb1 = vld1q_f64(b1 + p);
            const float64x2_t va0 = vld1q_f64(a0 + p);
            const float64x2_t va1 = vld1q_f64(a1 + p);
            c00 = vfmaq_f64(c00, va0, vb0);
            c01 = vfmaq_f64(c01, va0, vb1);
            c10 = vfmaq_f64(c10, va1, vb0);
            c11 = vfmaq_f64(c11, va1, vb1);
          }
          store(i, j, finish_dot(c00, a0, b0, k2, k));
          store(i, j + 1, finish_dot(c01, a0, b1, k2, k));
          store(i + 1, j, finish_dot(c10, a1, b0, k2, k));
          store(i + 1, j + 1, finish_dot(c11, a1, b1, k2, k));
        }
        for (; j < je; ++j) {
          store(i, j, dot_one(a0, b + j * k, k, k2));
          store(i + 1, j, dot_one(a1, b + j * k, k, k2));
        }
      }
      for (; i < ie; ++i) {
        for (std::size_t j = jj; j < je; ++j) store(i, j, dot_one(a + i * k, b + j * k, k, k2));
      }
    }
  }
}

template <int R>
void update_rows(std::size_t n, const double* a, std::size_t si, std::size_t sp, const double* b,
                 double* c, std::size_t i, std::size_t j0, std::size_t je, std::size_t p0,
                 std::size_t p1) {
  std::size_t j = j0;
  for (; j + 4 <= je; j += 4) {
    float64x2_t acc[R][2];
    for (int r = 0; r < R; ++r) {
      acc[r][0] = vld1q_f64(c + (i + r) * n + j);
      acc[r][1] = vld1q_f64(c + (i + r) * n + j + 2);
    }
    for (std::size_t p = p0; p < p1; ++p) {
      const float64x2_t b0 = vld1q_f64(b + p * n + j);
      const float64x2_t b1 = vld1q_f64(b + p * n + j + 2);
      for (int r = 0; r < R; ++r) {
        const float64x2_t av = vdupq_n_f64(a[(i + r) * si + p * sp]);
        acc[r][0] = vfmaq_f64(acc[r][0], av, b0);
        acc[r][1] = vfmaq_f64(acc[r][1], av, b1);
      }
    }
    for (int r = 0; r < R; ++r) {
      vst1q_f64(c + (i + r) * n + j, acc[r][0]);
      vst1q_f64(c + (i + r) * n + j + 2, acc[r][1]);
    }
  }
  for (; j < je; ++j) {
    for (int r = 0; r < R; ++r) {
      double s = c[(i + r) * n + j];
      for (std::size_t p = p0; p < p1; ++p) s += a[(i + r) * si + p * sp] * b[p * n + j];
      c[(i + r) * n + j] = s;
    }
  }
}

void rank_update(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t si,
                 std::size_t sp, const double* b, double* c) {
  std::fill(c, c + m * n, 0.0);
  for (std::size_t pp = 0; pp < k; pp += kTileDepth) {
    const std::size_t pe = std::min(k, pp + kTileDepth);
    for (std::size_t jj = 0; jj < n; jj += kTileWide) {
      const std::size_t je = std::min(n, jj + kTileWide);
      std::size_t i = 0;
      for (; i + 4 <= m; i += 4) update_rows<4>(n, a, si, sp, b, c, i, jj, je, pp, pe);
      for (; i < m; ++i) update_rows<1>(n, a, si, sp, b, c, i, jj, je, pp, pe);
    }
  }
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  rank_update(m, n, k, a, k, 1, b, c);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c) {
  rank_update(m, n, k, a, 1, m, b, c);
}

void column_sums(std::size_t m, std::size_t n, const double* a, double* out) {
  std::fill(out, out + n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = a + i * n;
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) vst1q_f64(out + j, vaddq_f64(vld1q_f64(out + j), vld1q_f64(row + j)));
    for (; j < n; ++j) out[j] += row[j];
  }
}

void relu(std::size_t n, double* x) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(x + i);
    vst1q_f64(x + i, vbslq_f64(vcgtq_f64(v, zero), v, zero));
  }
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(std::size_t n, const double* z, double* g) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t mask = vcgtq_f64(vld1q_f64(z + i), zero);
    vst1q_f64(g + i, vbslq_f64(mask, vld1q_f64(g + i), zero));
  }
  for (; i < n; ++i) g[i] = z[i] > 0.0 ? g[i] : 0.0;
}

void adam(std::size_t n, double* w, const double* g, double* m, double* v, const AdamCoeffs& c) {
  const float64x2_t b1 = vdupq_n_f64(c.beta1), b2 = vdupq_n_f64(c.beta2);
  const float64x2_t omb1 = vdupq_n_f64(1.0 - c.beta1), omb2 = vdupq_n_f64(1.0 - c.beta2);
  const float64x2_t bc1 = vdupq_n_f64(c.bias_correction1), bc2 = vdupq_n_f64(c.bias_correction2);
  const float64x2_t lr = vdupq_n_f64(c.lr), eps = vdupq_n_f64(c.eps);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t gi = vld1q_f64(g + i);
    const float64x2_t mi = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(omb1, gi));
    const float64x2_t vi =
        vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)), vmulq_f64(omb2, vmulq_f64(gi, gi)));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    const float64x2_t step = vdivq_f64(vmulq_f64(lr, vdivq_f64(mi, bc1)),
                                       vaddq_f64(vsqrtq_f64(vdivq_f64(vi, bc2)), eps));
    vst1q_f64(w + i, vsubq_f64(vld1q_f64(w + i), step));
  }
  for (; i < n; ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * (g[i] * g[i]);
    w[i] -= c.lr * (m[i] / c.bias_correction1) / (std::sqrt(v[i] / c.bias_correction2) + c.eps);
  }
}

constexpr KernelTable kNeon{Isa::Neon, "neon", gemm_nt, gemm_nn,       gemm_tn,
                            column_sums, relu, relu_backward, adam};

}  // namespace

const KernelTable* neon_table_unchecked() { return &kNeon; }

}  // namespace instobj::simd
