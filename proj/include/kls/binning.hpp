#pragma once

// Exhaustive small-blocklength random binning with U = X~. Bin maps are
// random; every reported quantity is computed exactly from the enumerated joint.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kls/channels.hpp"

namespace kls {

struct BinRates {
  double rs = 0.0;
  double rw = 0.0;
  double rc = 0.0;
};

inline constexpr std::size_t kMaxBinningCells = std::size_t{1} << 24;
inline constexpr std::size_t kDefaultMaxBlocklength = 10;
inline constexpr std::size_t kDefaultMaxTrials = 64;

struct BinningConfig {
  std::size_t n = 1;
  // One entry per entity; at most two entities.
  std::vector<BinRates> rates;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  // Bin indices form a random bijection; requires |S||W||C| = |X~|^n.
  bool injective = false;
  std::size_t max_n = kDefaultMaxBlocklength;
  std::size_t max_trials = kDefaultMaxTrials;
};

struct BinSizes {
  std::size_t s = 1, w = 1, c = 1;
};

// floor(2^{nR}), at least 1.
std::size_t bin_count(std::size_t n, double rate);
BinSizes bin_sizes(std::size_t n, const BinRates& r);

struct Stat {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stderr_mean = 0.0;
};

struct EntityOracle {
  BinSizes sizes;
  Stat error_prob;           // Pr[S != S^]
  Stat key_entropy_rate;     // H(S)/n
  Stat secrecy_leakage;      // I(S;W,C), bits
  Stat privacy_leakage_rate; // I(X^n;W,C)/n
  Stat helper_source_mi;     // I(W;X^n), bits
};

struct OracleReport {
  std::size_t n = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<EntityOracle> entities;
  // I(X^n; all (W,C))/n
  Stat privacy_leakage_rate;
  // I(W_1;W_2); zero with one entity.
  Stat helper_mi;
};

// Throws ResourceError when a cap is exceeded and UsageError on bad configs.
OracleReport run_binning(const EntitySystem& sys, const BinningConfig& cfg);

struct OneTimePadCheck {
  double gs_error = 0.0;
  double cs_error = 0.0;
  // I(K; W, C) for a uniform chosen key K.
  double chosen_key_helper_leakage = 0.0;
  // I(K; W, C, S' + K) = log|S| - H(S') + I(S'; W, C).
  double chosen_key_leakage = 0.0;
  // H(S') and I(S'; W, C) of the generated key.
  double generated_key_entropy = 0.0;
  double generated_key_secrecy = 0.0;
};

// Single entity, single trial (the cfg's seed), chosen-secret embedding of a
// uniform key by modular addition onto the generated key.
OneTimePadCheck one_time_pad_check(const EntitySystem& sys, const BinningConfig& cfg);

struct TrendRow {
  std::size_t n = 0;
  double error_prob = 0.0;
  double error_stderr = 0.0;
  double leak_rate = 0.0;  // I(S;W,C)/n
  double leak_stderr = 0.0;
  double key_rate = 0.0;   // H(S)/n
};

struct TrendReport {
  std::vector<TrendRow> rows;
  // Least-squares slopes in n; empty with fewer than two rows.
  std::vector<double> slopes;  // {error, leak, key}
  bool error_nonincreasing = true;
  bool leak_nonincreasing = true;
  // key_rate at the largest n short of R_s by at least 0.05 bits.
  bool key_shortfall = false;
  bool leak_growing = false;
};

// Each step may rise by at most two standard errors before counting as an increase.
TrendReport trend_check(const EntitySystem& sys, const BinRates& rates,
                        const std::vector<std::size_t>& n_list, std::size_t trials,
                        std::uint64_t seed);

void write_trend_csv(const std::string& path, const TrendReport& rep);
TrendReport read_trend_csv(const std::string& path);

}  // namespace kls
