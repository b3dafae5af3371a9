#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "instobj/simd/kernels.hpp"

using namespace instobj::simd;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i], b[i], tol * (1.0 + std::abs(a[i]))) << "at " << i;
  }
}

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> out;
  if (auto* k = avx2_kernels()) out.push_back(k);
  if (auto* k = neon_kernels()) out.push_back(k);
  return out;
}

}  // namespace

TEST(Simd, ScalarGemmMatchesNaive) {
  const auto& s = scalar_kernels();
  const std::size_t m = 7, n = 5, k = 11;
  const auto a = random_vec(m * k, 1), b = random_vec(n * k, 2), bias = random_vec(n, 3);
  std::vector<double> c(m * n);
  s.gemm_nt(m, n, k, a.data(), b.data(), bias.data(), c.data());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double ref = bias[j];
      for (std::size_t p = 0; p < k; ++p) ref += a[i * k + p] * b[j * k + p];
      EXPECT_NEAR(c[i * n + j], ref, 1e-12);
    }
  }
}

TEST(Simd, VariantsMatchScalarReference) {
  const auto& s = scalar_kernels();
  for (const KernelTable* v : variants()) {
    SCOPED_TRACE(v->name);
    for (auto [m, n, k] : {std::tuple<std::size_t, std::size_t, std::size_t>{1, 1, 1},
                           {3, 5, 7}, {17, 33, 9}, {64, 100, 64}, {130, 7, 257}}) {
      const auto a = random_vec(m * k, m), b = random_vec(n * k, n), bias = random_vec(n, k);
      std::vector<double> c1(m * n), c2(m * n);
      s.gemm_nt(m, n, k, a.data(), b.data(), bias.data(), c1.data());
      v->gemm_nt(m, n, k, a.data(), b.data(), bias.data(), c2.data());
      expect_close(c1, c2, 1e-12);

      const auto bn = random_vec(k * n, 7);
      s.gemm_nn(m, n, k, a.data(), bn.data(), c1.data());
      v->gemm_nn(m, n, k, a.data(), bn.data(), c2.data());
      expect_close(c1, c2, 1e-12);

      const auto at = random_vec(k * m, 8);
      s.gemm_tn(m, n, k, at.data(), bn.data(), c1.data());
      v->gemm_tn(m, n, k, at.data(), bn.data(), c2.data());
      expect_close(c1, c2, 1e-12);

      std::vector<double> cs1(n), cs2(n);
      s.column_sums(m, n, c1.data(), cs1.data());
      v->column_sums(m, n, c1.data(), cs2.data());
      expect_close(cs1, cs2, 1e-12);
    }
    auto x1 = random_vec(1001, 9), x2 = x1;
    s.relu(x1.size(), x1.data());
    v->relu(x2.size(), x2.data());
    EXPECT_EQ(x1, x2);
    const auto z = random_vec(1001, 10);
    auto g1 = random_vec(1001, 11), g2 = g1;
    s.relu_backward(z.size(), z.data(), g1.data());
    v->relu_backward(z.size(), z.data(), g2.data());
    EXPECT_EQ(g1, g2);

    auto w1 = random_vec(1003, 12), w2 = w1;
    const auto g = random_vec(1003, 13);
    std::vector<double> m1(1003, 0.0), m2(1003, 0.0), v1(1003, 0.0), v2(1003, 0.0);
    AdamCoeffs c{1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001};
    for (int step = 0; step < 5; ++step) {
      s.adam(w1.size(), w1.data(), g.data(), m1.data(), v1.data(), c);
      v->adam(w2.size(), w2.data(), g.data(), m2.data(), v2.data(), c);
    }
    expect_close(w1, w2, 1e-12);
  }
}

TEST(Simd, AdamScalarMatchesFormula) {
  const auto& s = scalar_kernels();
  double w = 1.0, g = 0.5, m = 0.0, v = 0.0;
  AdamCoeffs c{0.01, 0.9, 0.999, 1e-8, 1 - 0.9, 1 - 0.999};
  s.adam(1, &w, &g, &m, &v, c);
  const double mh = (0.1 * 0.5) / 0.1, vh = (0.001 * 0.25) / 0.001;
  EXPECT_NEAR(w, 1.0 - 0.01 * mh / (std::sqrt(vh) + 1e-8), 1e-15);
}

TEST(Simd, DispatchSelection) {
  EXPECT_EQ(parse_isa("scalar"), Isa::Scalar);
  EXPECT_FALSE(parse_isa("sse9").has_value());
  const Isa before = active_kernels().isa;
  EXPECT_TRUE(set_active_isa(Isa::Scalar));
  EXPECT_EQ(active_kernels().isa, Isa::Scalar);
  EXPECT_TRUE(set_active_isa(before));
}
