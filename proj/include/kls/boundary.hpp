#pragma once

// Key/leakage boundary curves over BSC test channels for a uniform binary
// source seen through BSC measurement channels, and single- vs two-enrollment
// comparisons.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kls/channels.hpp"

namespace kls {

enum class CurveFamily { bsc_test_channel, general_grid };
enum class EnrollmentMode { single, two };

std::string to_string(EnrollmentMode m);
EnrollmentMode parse_enrollment_mode(const std::string& s);

inline constexpr std::size_t kDefaultSweepGrid = 2001;
inline constexpr std::size_t kMaxSweepGrid = 10'000'000;
inline constexpr double kCrossoverTol = 1e-6;

struct SweepSpec {
  CurveFamily family = CurveFamily::bsc_test_channel;
  std::size_t grid = kDefaultSweepGrid;
  // Overrides `grid` when non-empty.
  std::vector<double> crossovers;
  std::optional<double> p_a;
  std::optional<double> snr_db;
  EnrollmentMode mode = EnrollmentMode::single;
  // Two mode only: replace each symmetric point by the best (q1, q2) pair at
  // the same total key rate.
  bool asymmetric = false;
};

struct CurvePoint {
  double key_rate_total = 0.0;
  double privacy_leakage_rate = 0.0;
  double storage_rate_total = 0.0;
  double test_channel_crossover = 0.0;
};

// Per-enrollment rates at the corner for U = X~ through BSC(q), X~ = X through
// BSC(p), Y = X through BSC(p).
struct BscRates {
  double key = 0.0;
  double leakage = 0.0;
  double storage = 0.0;
};
BscRates bsc_corner_rates(double q, double p_a);

// Crossover q of the test channel giving H(X|U) = h.
double optimal_test_channel_crossover(double h_x_given_u, double p_a);

// Resolves p_A from either field of the spec.
double spec_crossover(const SweepSpec& spec);
std::vector<double> crossover_grid(const SweepSpec& spec);

// Sorted by key rate, ascending.
std::vector<CurvePoint> sweep_boundary(const SweepSpec& spec);

// Single-enrollment Pareto frontier (min leakage per key rate) over a simplex
// grid of P(u|x~) with |U| = aux_cardinality (0 selects |X~| + 1). No
// optimality claim; test_channel_crossover is left at 0.
std::vector<CurvePoint> sweep_general_grid(const EntitySystem& sys, std::size_t j,
                                           std::size_t grid_resolution,
                                           std::size_t aux_cardinality = 0);

struct PairOptimum {
  double value = 0.0;  // summed leakage or summed key rate
  double q1 = 0.0;
  double q2 = 0.0;
  bool feasible = false;
};

// Two enrollments with independent test channels BSC(q1), BSC(q2).
PairOptimum min_leakage_at_key(double p_a, double total_key, std::size_t grid = kDefaultSweepGrid);
PairOptimum max_key_at_leakage(double p_a, double total_leakage,
                               std::size_t grid = kDefaultSweepGrid);

struct CurveParam {
  EnrollmentMode mode = EnrollmentMode::single;
  double p_a = 0.0;
};

struct Comparison {
  CurveParam reference;
  CurveParam candidate;
  // Reference corner (q = 0).
  double reference_key = 0.0;
  double reference_leakage = 0.0;
  // 1 - (candidate min leakage at reference_key) / reference_leakage; NaN if
  // the candidate cannot reach reference_key.
  double leakage_reduction = 0.0;
  double candidate_leakage_at_key = 0.0;
  // reference_key / (candidate max key at reference_leakage) - 1.
  double corner_key_gain = 0.0;
  double candidate_key_at_leakage = 0.0;
  // Ratio of key-per-leakage slopes as leakage -> 0, minus 1.
  double limiting_slope_gain = 0.0;
  // Same ratio read at the smallest positive-leakage grid point.
  double raw_grid_gain = 0.0;
  std::vector<CurvePoint> reference_curve;
  std::vector<CurvePoint> candidate_curve;
};

Comparison compare_curves(const CurveParam& reference, const CurveParam& candidate,
                          std::size_t grid = kDefaultSweepGrid);

// Example-1 form: single vs two enrollments at the same p_A.
Comparison compare_single_vs_two(double p_a, std::size_t grid = kDefaultSweepGrid);
// Example-2 form: two enrollments at snr_db vs one at twice the linear power.
Comparison compare_single_vs_two_snr(double snr_db, std::size_t grid = kDefaultSweepGrid);
double doubled_power_crossover(double snr_db);

std::string curve_file_name(EnrollmentMode mode, const std::string& param);
void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& points,
                     EnrollmentMode mode);
// Reads a file written by write_curve_csv; the mode column must be uniform.
std::vector<CurvePoint> read_curve_csv(const std::string& path, EnrollmentMode* mode = nullptr);

}  // namespace kls
