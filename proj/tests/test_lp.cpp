#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "kls/lp.hpp"

using namespace kls;

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

TEST(Lp, BoxOptimum) {
  // 0 <= x, y <= 1, x + y <= 1.5
  const Mat a{{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}};
  const Vec b{1, 1, 0, 0, 1.5};
  const auto r = lp_maximize(a, b, Vec{1, 2});
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.value, 2.5, 1e-12);
  EXPECT_NEAR(r.x[0], 0.5, 1e-12);
  EXPECT_NEAR(r.x[1], 1.0, 1e-12);
}

TEST(Lp, FreeVariablesAndNegativeRhs) {
  // x >= 2 (as -x <= -2), x <= 5, maximize -x
  const auto r = lp_maximize(Mat{{-1}, {1}}, Vec{-2, 5}, Vec{-1});
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.value, -2.0, 1e-12);
  // Negative optimum for a free variable
  const auto s = lp_maximize(Mat{{1}}, Vec{-3}, Vec{1});
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.x[0], -3.0, 1e-12);
}

TEST(Lp, InfeasibleAndUnbounded) {
  EXPECT_EQ(lp_maximize(Mat{{1}, {-1}}, Vec{1, -2}, Vec{1}).status, LpStatus::infeasible);
  EXPECT_EQ(lp_maximize(Mat{{-1}}, Vec{0}, Vec{1}).status, LpStatus::unbounded);
  EXPECT_EQ(to_string(LpStatus::unbounded), "unbounded");
}

TEST(Lp, ExactArithmetic) {
  const std::vector<std::vector<mpq_class>> a{{1, 1}, {1, -1}, {-1, 0}};
  const std::vector<mpq_class> b{mpq_class(1, 3), mpq_class(1, 7), 0};
  const auto r = lp_maximize(a, b, std::vector<mpq_class>{1, 0});
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_EQ(r.value, mpq_class(5, 21));
  const auto d = lp_maximize_exact(Mat{{1, 1}, {1, -1}, {-1, 0}}, Vec{0.1, 0.3, 0}, Vec{1, 0});
  ASSERT_EQ(d.status, LpStatus::optimal);
  EXPECT_DOUBLE_EQ(d.value, 0.2);
}

TEST(Lp, DegenerateCycleProneProblem) {
  // Beale's example in <= form; Bland's rule must terminate.
  const Mat a{{0.25, -60, -0.04, 9}, {0.5, -90, -0.02, 3}, {0, 0, 1, 0},
              {-1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}};
  const Vec b{0, 0, 1, 0, 0, 0, 0};
  const auto r = lp_maximize(a, b, Vec{0.75, -150, 0.02, -6});
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.value, 0.05, 1e-12);
}

TEST(Lp, VerticesOfSquare) {
  const Mat a{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const auto v = enumerate_vertices(a, Vec{1, 1, 0, 0});
  EXPECT_EQ(v.size(), 4u);
  for (const auto& p : v) EXPECT_EQ(p.tight.size(), 2u);
  EXPECT_EQ(row_rank(a, {0, 2}), 1u);
  EXPECT_EQ(row_rank(a, {0, 1, 2}), 2u);
}

// Weak duality against a random feasible point and agreement of double and exact solves.
TEST(LpProperty, RandomBoundedPrograms) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int it = 0; it < 200; ++it) {
    const std::size_t n = 2 + it % 3;
    Mat a;
    Vec b;
    for (std::size_t i = 0; i < n; ++i) {
      Vec lo(n, 0.0), hi(n, 0.0);
      lo[i] = -1;
      hi[i] = 1;
      a.push_back(lo);
      b.push_back(1.0);
      a.push_back(hi);
      b.push_back(1.0);
    }
    for (int k = 0; k < 4; ++k) {
      Vec row(n);
      for (auto& v : row) v = u(rng);
      a.push_back(row);
      b.push_back(0.5 + 0.5 * u(rng));
    }
    Vec c(n);
    for (auto& v : c) v = u(rng);
    const auto r = lp_maximize(a, b, c);
    const auto e = lp_maximize_exact(a, b, c);
    ASSERT_EQ(r.status, LpStatus::optimal);
    ASSERT_EQ(e.status, LpStatus::optimal);
    EXPECT_NEAR(r.value, e.value, 1e-9);
    // Origin is feasible since every b > 0.
    EXPECT_GE(r.value, -1e-12);
    for (std::size_t i = 0; i < a.size(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += a[i][k] * r.x[k];
      EXPECT_LE(s, b[i] + 1e-9);
    }
  }
}
