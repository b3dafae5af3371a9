#pragma once

// Dense-layer kernels with a scalar reference and vectorized variants chosen
// at runtime. All matrices are row-major and contiguous.
//
// Variants may differ from the scalar reference by FMA rounding only; within
// one variant results are deterministic and independent of how rows are
// batched (gemm_nt computes every output with the same reduction order).

#include <cstddef>
#include <optional>
#include <string_view>

namespace instobj::simd {

enum class Isa { Scalar, Avx2, Neon };

struct AdamCoeffs {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double bias_correction1 = 1.0;  // 1 - beta1^t
  double bias_correction2 = 1.0;  // 1 - beta2^t
};

struct KernelTable {
  Isa isa;
  const char* name;

  /// C[m x n] = A[m x k] * B[n x k]^T (+ bias[n] when bias != nullptr).
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  const double* bias, double* c);
  /// C[m x n] = A[m x k] * B[k x n].
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c);
  /// C[m x n] = A[k x m]^T * B[k x n].
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c);
  /// out[j] = sum_i A[i][j] for A[m x n].
  void (*column_sums)(std::size_t m, std::size_t n, const double* a, double* out);
  /// x = max(x, 0).
  void (*relu)(std::size_t n, double* x);
  /// g = (z > 0) ? g : 0.
  void (*relu_backward)(std::size_t n, const double* z, double* g);
  /// One Adam step on n parameters.
  void (*adam)(std::size_t n, double* w, const double* g, double* m, double* v,
               const AdamCoeffs& c);
};

const KernelTable& scalar_kernels();

/// Null when the variant was not compiled in or the CPU lacks the extension.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

const KernelTable* kernels_for(Isa isa);

/// Best supported variant, unless overridden by set_active_isa or the
/// INSTOBJ_SIMD environment variable (scalar | avx2 | neon).
const KernelTable& active_kernels();

/// Returns false (and changes nothing) when `isa` is unavailable.
bool set_active_isa(Isa isa);

std::optional<Isa> parse_isa(std::string_view name);

}  // namespace instobj::simd
