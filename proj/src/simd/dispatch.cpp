#include <atomic>
#include <cstdlib>
#include <string>

#include "instobj/simd/kernels.hpp"

namespace instobj::simd {

#if defined(INSTOBJ_HAVE_AVX2_TU)
const KernelTable* avx2_table_unchecked();
#endif
#if defined(INSTOBJ_HAVE_NEON_TU)
const KernelTable* neon_table_unchecked();
#endif

namespace {

std::atomic<const KernelTable*> g_override{nullptr};

const KernelTable& detect_best() {
  const char* env = std::getenv("INSTOBJ_SIMD");
  if (env != nullptr) {
    if (auto isa = parse_isa(env)) {
      if (const auto* t = kernels_for(*isa)) return *t;
    }
  }
  if (const auto* t = avx2_kernels()) return *t;
  if (const auto* t = neon_kernels()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable* avx2_kernels() {
#if defined(INSTOBJ_HAVE_AVX2_TU)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_kernels() {
#if defined(INSTOBJ_HAVE_NEON_TU)
  return neon_table_unchecked();  // baseline on AArch64
#else
  return nullptr;
#endif
}

const KernelTable* kernels_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return &scalar_kernels();
    case Isa::Avx2: return avx2_kernels();
    case Isa::Neon: return neon_kernels();
  }
  return nullptr;
}

const KernelTable& active_kernels() {
  if (const auto* t = g_override.load(std::memory_order_acquire)) return *t;
  static const KernelTable& best = detect_best();
  return best;
}

bool set_active_isa(Isa isa) {
  const auto* t = kernels_for(isa);
  if (t == nullptr) return false;
  g_override.store(t, std::memory_order_release);
  return true;
}

std::optional<Isa> parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::Scalar;
  if (name == "avx2") return Isa::Avx2;
  if (name == "neon") return Isa::Neon;
  return std::nullopt;
}

}  // namespace instobj::simd
