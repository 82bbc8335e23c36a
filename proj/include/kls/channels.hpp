#pragma once

// Broadcast measurement channels P(x~, y | x), entity systems built from them,
// and the degradedness / less-noisy classification used for strong privacy.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kls/probkit.hpp"

namespace kls {

// Test channel P(u | x~) for one entity.
struct AuxiliaryChannel {
  ConditionalPmf cond;

  std::size_t aux_cardinality() const { return cond.output_size(); }
  static AuxiliaryChannel identity(std::size_t n) { return {ConditionalPmf::identity(n)}; }
};

// P(x~, y | x): one joint over (encoder measurement, decoder measurement) per
// hidden-source symbol. Stored as the full joint, never only its marginals.
class BroadcastChannel {
 public:
  BroadcastChannel() = default;
  // table[x][x~][y]; each table[x] must sum to 1 within 1e-12.
  explicit BroadcastChannel(std::vector<std::vector<std::vector<double>>> table);

  std::size_t source_size() const { return table_.size(); }
  std::size_t measurement_size() const { return nxt_; }
  std::size_t decoder_size() const { return ny_; }
  double operator()(std::size_t x, std::size_t xt, std::size_t y) const { return table_[x][xt][y]; }
  const std::vector<std::vector<std::vector<double>>>& table() const { return table_; }

  ConditionalPmf measurement_marginal() const;  // P(x~ | x)
  ConditionalPmf decoder_marginal() const;      // P(y | x)

 private:
  std::vector<std::vector<std::vector<double>>> table_;
  std::size_t nxt_ = 0;
  std::size_t ny_ = 0;
};

// Hidden source P_X plus one broadcast channel per entity.
class EntitySystem {
 public:
  EntitySystem(Pmf source, std::vector<BroadcastChannel> entities);

  const Pmf& source() const { return source_; }
  const std::vector<BroadcastChannel>& entities() const { return entities_; }
  const BroadcastChannel& entity(std::size_t j) const;
  std::size_t entity_count() const { return entities_.size(); }

 private:
  Pmf source_;
  std::vector<BroadcastChannel> entities_;
};

enum class ChannelKind { physically_degraded, less_noisy_strong_privacy, neither };

std::string to_string(ChannelKind kind);

struct ChannelClass {
  ChannelKind kind = ChannelKind::neither;
  // Set iff kind == neither and the less-noisy grid found a violation.
  std::optional<AuxiliaryChannel> witness;
  double tolerance = 1e-9;
  // Certificate resolution; zero when the result came from the PD test.
  std::size_t grid_resolution = 0;
  std::size_t aux_cardinality = 0;
  // min over searched aux channels of I(U;Y) - I(U;X).
  double min_gap = 0.0;
  // I(U;X) and I(U;Y) at the witness.
  double witness_info_x = 0.0;
  double witness_info_y = 0.0;
};

ConditionalPmf bsc(double p);
ConditionalPmf cascade(const ConditionalPmf& first, const ConditionalPmf& second);
// Conditionally independent outputs through the same measurement channel.
BroadcastChannel separate_bc(const ConditionalPmf& measure);
double awgn_to_bsc(double snr_db);

// Joint of (X, Xt, Y) for entity j, optionally extended by an aux channel U.
JointPmf entity_joint(const EntitySystem& sys, std::size_t j);
JointPmf entity_joint(const EntitySystem& sys, std::size_t j, const AuxiliaryChannel& aux);

bool is_physically_degraded(const EntitySystem& sys, std::size_t j, double tol = 1e-9);

// All points k/r on the (n-1)-simplex, in lexicographic order of the numerators.
std::vector<std::vector<double>> simplex_grid(std::size_t n, std::size_t r);

inline constexpr std::size_t kMaxLnGridPoints = 2'000'000;

// Grid-limited certificate of I(U;Y_j) >= I(U;X) for all P(u|x~_j) with
// |U| = aux_cardinality (0 selects |X~_j| + 1).
ChannelClass certify_less_noisy_strong_privacy(const EntitySystem& sys, std::size_t j,
                                               std::size_t grid_resolution,
                                               std::size_t aux_cardinality = 0,
                                               double tol = 1e-9);

// PD test first, then the less-noisy certificate.
ChannelClass classify(const EntitySystem& sys, std::size_t j, std::size_t grid_resolution = 20,
                      std::size_t aux_cardinality = 0, double tol = 1e-9);

}  // namespace kls
