#include <cmath>
#include <filesystem>
#include <limits>

#include <gtest/gtest.h>

#include "kls/boundary.hpp"
#include "kls/channels.hpp"
#include "kls/errors.hpp"
#include "kls/probkit.hpp"
#include "random_models.hpp"

using namespace kls;

namespace {

double conv(double a, double b) { return binary_convolution(a, b); }

// Per-enrollment BSC rates written out from H_b alone.
double key_of(double q, double p) { return 1.0 - binary_entropy(conv(conv(q, p), p)); }
double leak_of(double q, double p) {
  return binary_entropy(conv(conv(q, p), p)) - binary_entropy(conv(q, p));
}

// Crossover q giving per-enrollment key k: q * (p*p) = H_b^{-1}(1 - k).
double q_for_key(double k, double p) {
  const double pp = conv(p, p);
  return (binary_entropy_inv(1.0 - k) - pp) / (1.0 - 2.0 * pp);
}

double q_for_leak(double l, double p) {
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (leak_of(mid, p) > l ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Brute-force two-enrollment minimum summed leakage at total key k.
double scan_min_leakage(double p, double k, int steps) {
  double best = std::numeric_limits<double>::infinity();
  const double k_top = key_of(0.0, p);
  for (int i = 0; i <= steps; ++i) {
    const double k1 = k * i / steps;
    const double k2 = k - k1;
    if (k1 > k_top || k2 > k_top) continue;
    best = std::min(best, leak_of(q_for_key(k1, p), p) + leak_of(q_for_key(k2, p), p));
  }
  return best;
}

constexpr double kExample1Reduction = 0.13476011272;
constexpr double kExample2CornerGain = 2.27526199906;
constexpr double kExample2SlopeGain = 4.00051993741;

}  // namespace

TEST(Boundary, CornerRatesAtZeroCrossover) {
  const auto r = bsc_corner_rates(0.0, 0.06);
  EXPECT_NEAR(r.key, 1.0 - binary_entropy(0.1128), 1e-12);
  EXPECT_NEAR(r.key, 0.49171, 5e-5);
  EXPECT_NEAR(r.leakage, binary_entropy(0.1128) - binary_entropy(0.06), 1e-12);
  EXPECT_NEAR(r.storage, binary_entropy(0.1128), 1e-12);
  const auto flat = bsc_corner_rates(0.5, 0.06);
  EXPECT_NEAR(flat.key, 0.0, 1e-12);
  EXPECT_NEAR(flat.leakage, 0.0, 1e-12);
}

TEST(Boundary, OptimalCrossoverInvertsConditionalEntropy) {
  for (double h : {binary_entropy(0.06), 0.4, 0.7, 1.0}) {
    const double q = optimal_test_channel_crossover(h, 0.06);
    EXPECT_NEAR(binary_entropy(conv(q, 0.06)), h, 1e-10);
  }
  EXPECT_THROW(optimal_test_channel_crossover(0.1, 0.06), DomainError);
  EXPECT_THROW(optimal_test_channel_crossover(0.5, 0.6), DomainError);
}

TEST(Boundary, SweepIsMonotone) {
  SweepSpec s;
  s.p_a = 0.06;
  s.grid = 201;
  for (auto mode : {EnrollmentMode::single, EnrollmentMode::two}) {
    s.mode = mode;
    const auto pts = sweep_boundary(s);
    ASSERT_EQ(pts.size(), 201u);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      EXPECT_GE(pts[i].key_rate_total, pts[i - 1].key_rate_total);
      EXPECT_GE(pts[i].privacy_leakage_rate, pts[i - 1].privacy_leakage_rate - 1e-12);
    }
    const double scale = mode == EnrollmentMode::two ? 2.0 : 1.0;
    EXPECT_NEAR(pts.back().key_rate_total, scale * bsc_corner_rates(0.0, 0.06).key, 1e-12);
  }
}

TEST(Boundary, SweepArgumentErrors) {
  SweepSpec s;
  EXPECT_THROW(sweep_boundary(s), UsageError);
  s.p_a = 0.06;
  s.snr_db = 3.0;
  EXPECT_THROW(sweep_boundary(s), UsageError);
  s.snr_db.reset();
  s.grid = 1;
  EXPECT_THROW(sweep_boundary(s), UsageError);
  s.grid = 10;
  s.family = CurveFamily::general_grid;
  EXPECT_THROW(sweep_boundary(s), UsageError);
  EXPECT_THROW(parse_enrollment_mode("three"), UsageError);
}

TEST(Boundary, SnrSweepUsesAwgnCrossover) {
  SweepSpec s;
  s.snr_db = 3.83;
  EXPECT_NEAR(spec_crossover(s), awgn_to_bsc(3.83), 1e-15);
  EXPECT_NEAR(doubled_power_crossover(3.83), q_function(std::sqrt(2.0 * std::pow(10.0, 0.383))), 1e-15);
}

TEST(Boundary, GeneralGridMatchesBscCurveForSeparateBsc) {
  // For a BSC measurement the BSC test channel traces the optimal boundary.
  const auto sys = kls::testing::separate_bsc_system(0.06, 1);
  const auto front = sweep_general_grid(sys, 0, 40, 2);
  ASSERT_FALSE(front.empty());
  for (const auto& c : front) {
    if (c.key_rate_total <= 1e-9 || c.key_rate_total >= key_of(0.0, 0.06) - 1e-9) continue;
    const double q = q_for_key(c.key_rate_total, 0.06);
    EXPECT_GE(c.privacy_leakage_rate, leak_of(q, 0.06) - 1e-9);
  }
}

TEST(Boundary, PairOptimaMatchSymmetricOracle) {
  const double p = 0.06;
  const double k = key_of(0.0, p);
  const auto opt = min_leakage_at_key(p, k);
  ASSERT_TRUE(opt.feasible);
  const double sym = 2.0 * leak_of(q_for_key(k / 2.0, p), p);
  EXPECT_NEAR(opt.value, sym, 1e-9);
  EXPECT_LE(opt.value, scan_min_leakage(p, k, 2000) + 1e-9);
  EXPECT_NEAR(opt.q1, opt.q2, 1e-6);

  const double l = leak_of(0.0, p);
  const auto mk = max_key_at_leakage(p, l);
  ASSERT_TRUE(mk.feasible);
  EXPECT_NEAR(mk.value, 2.0 * key_of(q_for_leak(l / 2.0, p), p), 1e-9);
  EXPECT_FALSE(min_leakage_at_key(p, 2.0 * k + 0.01).feasible);
}

TEST(Boundary, ExampleOneLeakageReduction) {
  const double p = 0.06;
  const double k = key_of(0.0, p);
  const double oracle = 1.0 - 2.0 * leak_of(q_for_key(k / 2.0, p), p) / leak_of(0.0, p);
  EXPECT_NEAR(oracle, kExample1Reduction, 1e-9);
  const auto c = compare_single_vs_two(p);
  EXPECT_NEAR(c.reference_key, k, 1e-12);
  EXPECT_NEAR(c.leakage_reduction, oracle, 1e-8);
}

TEST(Boundary, ExampleTwoCornerGain) {
  const double pc = awgn_to_bsc(3.83);
  const double pr = doubled_power_crossover(3.83);
  const double kr = key_of(0.0, pr), lr = leak_of(0.0, pr);
  const double kc = 2.0 * key_of(q_for_leak(lr / 2.0, pc), pc);
  EXPECT_NEAR(kr / kc - 1.0, kExample2CornerGain, 1e-8);
  const double br = (1 - 2 * pr) * (1 - 2 * pr), bc = (1 - 2 * pc) * (1 - 2 * pc);
  EXPECT_NEAR((br / (1 - br)) / (bc / (1 - bc)) - 1.0, kExample2SlopeGain, 1e-9);

  const auto c = compare_single_vs_two_snr(3.83);
  EXPECT_NEAR(c.corner_key_gain, kr / kc - 1.0, 1e-7);
  EXPECT_NEAR(c.limiting_slope_gain, kExample2SlopeGain, 1e-9);
  EXPECT_TRUE(std::isfinite(c.raw_grid_gain));
}

TEST(Boundary, IdenticalCurvesGiveZeroGain) {
  const auto c = compare_curves({EnrollmentMode::single, 0.1}, {EnrollmentMode::single, 0.1}, 501);
  EXPECT_NEAR(c.leakage_reduction, 0.0, 1e-9);
  EXPECT_NEAR(c.corner_key_gain, 0.0, 1e-9);
  EXPECT_NEAR(c.limiting_slope_gain, 0.0, 1e-12);
}

TEST(Boundary, CurveCsvRoundTrip) {
  SweepSpec s;
  s.p_a = 0.06;
  s.grid = 11;
  s.mode = EnrollmentMode::two;
  const auto pts = sweep_boundary(s);
  const auto dir = std::filesystem::temp_directory_path() / "kls_boundary_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / curve_file_name(EnrollmentMode::two, "pA0.06")).string();
  EXPECT_EQ(curve_file_name(EnrollmentMode::two, "pA0.06"), "curve_two_pA0.06.csv");
  write_curve_csv(path, pts, EnrollmentMode::two);
  EnrollmentMode mode = EnrollmentMode::single;
  const auto back = read_curve_csv(path, &mode);
  EXPECT_EQ(mode, EnrollmentMode::two);
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(back[i].key_rate_total, pts[i].key_rate_total, 1e-11);
    EXPECT_NEAR(back[i].privacy_leakage_rate, pts[i].privacy_leakage_rate, 1e-11);
    EXPECT_NEAR(back[i].test_channel_crossover, pts[i].test_channel_crossover, 1e-11);
  }
  EXPECT_THROW(read_curve_csv((dir / "missing.csv").string()), UsageError);
}
