// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after a runtime CPU check (see dispatch.cpp).

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "instobj/simd/kernels.hpp"

namespace instobj::simd {

namespace {

constexpr std::size_t kTileRows = 64;
constexpr std::size_t kTileCols = 64;
constexpr std::size_t kTileDepth = 256;
constexpr std::size_t kTileWide = 512;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// Shared epilogue: every output of gemm_nt goes through exactly this sequence.
inline double finish_dot(__m256d acc, const double* a, const double* b, std::size_t k4,
                         std::size_t k) {
  double s = hsum(acc);
  for (std::size_t p = k4; p < k; ++p) s += a[p] * b[p];
  return s;
}

inline double dot_one(const double* a, const double* b, std::size_t k, std::size_t k4) {
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t p = 0; p < k4; p += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + p), _mm256_loadu_pd(b + p), acc);
  }
  return finish_dot(acc, a, b, k4, k);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             const double* bias, double* c) {
  const std::size_t k4 = k & ~std::size_t{3};
  auto store = [&](std::size_t i, std::size_t j, double v) {
    c[i * n + j] = bias != nullptr ? v + bias[j] : v;
  };

  for (std::size_t ii = 0; ii < m; ii += kTileRows) {
    const std::size_t ie = std::min(m, ii + kTileRows);
    for (std::size_t jj = 0; jj < n; jj += kTileCols) {
      const std::size_t je = std::min(n, jj + kTileCols);
      std::size_t i = ii;
      for (; i + 4 <= ie; i += 4) {
        const double* a0 = a + i * k;
        const double* a1 = a0 + k;
        const double* a2 = a1 + k;
        const double* a3 = a2 + k;
        std::size_t j = jj;
        for (; j + 2 <= je; j += 2) {
          const double* b0 = b + j * k;
          const double* b1 = b0 + k;
          __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
          __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
          __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
          __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
          for (std::size_t p = 0; p < k4; p += 4) {
            const __m256d vb0 = _mm256_loadu_pd(b0 + p);
            const __m256d vb1 = _mm256_loadu_pd(b1 + p);
            __m256d va = _mm256_loadu_pd(a0 + p);
            c00 = _mm256_fmadd_pd(va, vb0, c00);
            c01 = _mm256_fmadd_pd(va, vb1, c01);
            va = _mm256_loadu_pd(a1 + p);
            c10 = _mm256_fmadd_pd(va, vb0, c10);
            c11 = _mm256_fmadd_pd(va, vb1, c11);
            va = _mm256_loadu_pd(a2 + p);
            c20 = _mm256_fmadd_pd(va, vb0, c20);
            c21 = _mm256_fmadd_pd(va, vb1, c21);
            va = _mm256_loadu_pd(a3 + p);
            c30 = _mm256_fmadd_pd(va, vb0, c30);
            c31 = _mm256_fmadd_pd(va, vb1, c31);
          }
          store(i + 0, j, finish_dot(c00, a0, b0, k4, k));
          store(i + 0, j + 1, finish_dot(c01, a0, b1, k4, k));
          store(i + 1, j, finish_dot(c10, a1, b0, k4, k));
          store(i + 1, j + 1, finish_dot(c11, a1, b1, k4, k));
          store(i + 2, j, finish_dot(c20, a2, b0, k4, k));
          store(i + 2, j + 1, finish_dot(c21, a2, b1, k4, k));
          store(i + 3, j, finish_dot(c30, a3, b0, k4, k));
          store(i + 3, j + 1, finish_dot(c31, a3, b1, k4, k));
        }
        for (; j < je; ++j) {
          const double* bj = b + j * k;
          store(i + 0, j, dot_one(a0, bj, k, k4));
          store(i + 1, j, dot_one(a1, bj, k, k4));
          store(i + 2, j, dot_one(a2, bj, k, k4));
          store(i + 3, j, dot_one(a3, bj, k, k4));
        }
      }
      for (; i < ie; ++i) {
        for (std::size_t j = jj; j < je; ++j) store(i, j, dot_one(a + i * k, b + j * k, k, k4));
      }
    }
  }
}

// Rank-update block shared by gemm_nn and gemm_tn: C[i..i+R, j..je) +=
// sum_{p in [p0, p1)} A(i + r, p) * B[p][j], with A(i, p) = a[i * si + p * sp].
template <int R>
void update_rows(std::size_t n, const double* a, std::size_t si, std::size_t sp, const double* b,
                 double* c, std::size_t i, std::size_t j0, std::size_t je, std::size_t p0,
                 std::size_t p1) {
  std::size_t j = j0;
  for (; j + 8 <= je; j += 8) {
    __m256d acc[R][2];
    for (int r = 0; r < R; ++r) {
      acc[r][0] = _mm256_loadu_pd(c + (i + r) * n + j);
      acc[r][1] = _mm256_loadu_pd(c + (i + r) * n + j + 4);
    }
    for (std::size_t p = p0; p < p1; ++p) {
      const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
      const __m256d b1 = _mm256_loadu_pd(b + p * n + j + 4);
      for (int r = 0; r < R; ++r) {
        const __m256d av = _mm256_broadcast_sd(a + (i + r) * si + p * sp);
        acc[r][0] = _mm256_fmadd_pd(av, b0, acc[r][0]);
        acc[r][1] = _mm256_fmadd_pd(av, b1, acc[r][1]);
      }
    }
    for (int r = 0; r < R; ++r) {
      _mm256_storeu_pd(c + (i + r) * n + j, acc[r][0]);
      _mm256_storeu_pd(c + (i + r) * n + j + 4, acc[r][1]);
    }
  }
  for (; j + 4 <= je; j += 4) {
    __m256d acc[R];
    for (int r = 0; r < R; ++r) acc[r] = _mm256_loadu_pd(c + (i + r) * n + j);
    for (std::size_t p = p0; p < p1; ++p) {
      const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
      for (int r = 0; r < R; ++r) {
        acc[r] = _mm256_fmadd_pd(_mm256_broadcast_sd(a + (i + r) * si + p * sp), b0, acc[r]);
      }
    }
    for (int r = 0; r < R; ++r) _mm256_storeu_pd(c + (i + r) * n + j, acc[r]);
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
    for (; j + 4 <= n; j += 4) {
      _mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_loadu_pd(out + j), _mm256_loadu_pd(row + j)));
    }
    for (; j < n; ++j) out[j] += row[j];
  }
}

void relu(std::size_t n, double* x) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(std::size_t n, const double* z, double* g) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(z + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(g + i, _mm256_and_pd(mask, _mm256_loadu_pd(g + i)));
  }
  for (; i < n; ++i) g[i] = z[i] > 0.0 ? g[i] : 0.0;
}

void adam(std::size_t n, double* w, const double* g, double* m, double* v, const AdamCoeffs& c) {
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d omb1 = _mm256_set1_pd(1.0 - c.beta1);
  const __m256d omb2 = _mm256_set1_pd(1.0 - c.beta2);
  const __m256d bc1 = _mm256_set1_pd(c.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(c.bias_correction2);
  const __m256d lr = _mm256_set1_pd(c.lr);
  const __m256d eps = _mm256_set1_pd(c.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gi = _mm256_loadu_pd(g + i);
    const __m256d mi =
        _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, gi));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(omb2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, bc1);
    const __m256d v_hat = _mm256_div_pd(vi, bc2);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
    _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
  }
  for (; i < n; ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * (g[i] * g[i]);
    w[i] -= c.lr * (m[i] / c.bias_correction1) / (std::sqrt(v[i] / c.bias_correction2) + c.eps);
  }
}

constexpr KernelTable kAvx2{Isa::Avx2, "avx2", gemm_nt, gemm_nn,       gemm_tn,
                            column_sums, relu, relu_backward, adam};

}  // namespace

const KernelTable* avx2_table_unchecked() { return &kAvx2; }

}  // namespace instobj::simd
