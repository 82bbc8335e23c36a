#pragma once

// Inner and outer bounds on key-leakage-storage regions, evaluated for a fixed
// choice of auxiliary channels.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kls/channels.hpp"
#include "kls/probkit.hpp"

namespace kls {

enum class Model { gs, cs };
enum class Setting { multi_entity, two_enrollment };
enum class Bound { inner, outer };

// How the joint law of (U_1..U_J) was obtained.
enum class Construction {
  product,   // P_X prod_j P(u_j|x~_j) P(x~_j, y_j | x)
  coupling,  // caller-supplied joint over (U_1, U_2, X~_1, X~_2)
};

std::string to_string(Model m);
std::string to_string(Setting s);
std::string to_string(Bound b);
Model parse_model(const std::string& s);
Setting parse_setting(const std::string& s);
Bound parse_bound(const std::string& s);

// Rates in bits per source symbol.
struct RateTuple {
  std::vector<double> key_rates;
  double privacy_leakage = 0.0;
  std::vector<double> storage_rates;

  std::size_t entity_count() const { return key_rates.size(); }
  // Throws DomainError on negative or non-finite entries, UsageError on ragged sizes.
  void validate() const;
};

struct EntityInfo {
  double h_u = 0.0;             // H(U_j)
  double i_u_y = 0.0;           // I(U_j;Y_j)
  double i_u_x = 0.0;           // I(U_j;X)
  double i_u_xt = 0.0;          // I(U_j;X~_j)
  double i_u_rest = 0.0;        // I(U_j;U_rest)
  double h_u_given_rest = 0.0;  // H(U_j|U_rest)

  double h_u_given_y() const { return h_u - i_u_y; }
  double h_u_given_xt() const { return h_u - i_u_xt; }
  double h_u_given_x() const { return h_u - i_u_x; }
};

struct InfoRecord {
  std::vector<EntityInfo> entities;
  // pair_entropy[j][k] = H(U_j, U_k); the diagonal holds H(U_j).
  std::vector<std::vector<double>> pair_entropy;
  // cross_cond[j][k] = H(U_j | X~_k).
  std::vector<std::vector<double>> cross_cond;
  double h_all = 0.0;
  Construction construction = Construction::product;
  // Every entity uses P(x~,y|x) = P(x~|x) P(y|x) with one shared P(x~|x).
  bool separate_identical_channels = false;

  std::size_t entity_count() const { return entities.size(); }
  const EntityInfo& at(std::size_t j) const { return entities.at(j); }
};

inline constexpr double kMembershipTol = 1e-9;

enum class Sense { le, ge };

struct ConstraintCheck {
  std::string label;
  Sense sense = Sense::le;
  double lhs = 0.0;
  double rhs = 0.0;
  // rhs - lhs for <=, lhs - rhs for >=.
  double slack = 0.0;
};

struct MembershipReport {
  bool member = true;
  double tolerance = kMembershipTol;
  std::vector<ConstraintCheck> constraints;
  std::vector<std::string> binding;

  const ConstraintCheck& find(const std::string& label) const;
};

// Builds the joint of (U_1..U_J, X~_1..X~_J, X, Y_1..Y_J) from the product
// factorization and reads off every information term by marginalization.
InfoRecord info_record(const EntitySystem& sys, std::span<const AuxiliaryChannel> aux);

// Two entities whose (U_1, U_2, X~_1, X~_2) law is supplied directly. The
// (X~_1, X~_2) marginal must match the system and U_j - X~_j - (X, Y_j) must hold.
InfoRecord info_record_from_coupling(const EntitySystem& sys, const JointPmf& coupling,
                                     double tol = 1e-9);

MembershipReport eval_multi_entity_inner(const InfoRecord& rec, const RateTuple& t, Model model,
                                         double tol = kMembershipTol);

// Requires every entity to be classified PD or less-noisy first.
MembershipReport eval_pd_ln_outer(const InfoRecord& rec, const RateTuple& t, Model model,
                                  std::span<const ChannelClass> classes,
                                  double tol = kMembershipTol);

MembershipReport eval_two_enrollment(const InfoRecord& rec, const RateTuple& t, Model model,
                                     Bound bound, double tol = kMembershipTol);

// Keys at their upper bounds, storage and leakage at their lower bounds.
RateTuple gs_corner_point(const InfoRecord& rec, Setting setting);

// sum_j max{0, I(U_j;X) - I(U_j;Y_j)}
double strong_privacy_term(const InfoRecord& rec);

}  // namespace kls
