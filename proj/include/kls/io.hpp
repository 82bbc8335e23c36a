#pragma once

// JSON forms of channel, aux and rate files, and of every report the CLI emits.
// Parsers reject unknown keys; writers round doubles to 12 significant digits.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kls/binning.hpp"
#include "kls/boundary.hpp"
#include "kls/channels.hpp"
#include "kls/polysys.hpp"
#include "kls/regions.hpp"

namespace kls {

using Json = nlohmann::ordered_json;

double sig12(double v);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

// {source: [...], entities: [{type: separate_bsc, p} | {type: explicit, table}
//  | {type: awgn, snr_db}]}
EntitySystem channel_from_json(const Json& j);
// Always emits explicit tables.
Json channel_to_json(const EntitySystem& sys);

struct AuxSpec {
  std::vector<AuxiliaryChannel> aux;
  // Optional joint over (U1, U2, Xt1, Xt2) for the two-enrollment outer bound.
  std::optional<JointPmf> coupling;
};

// {aux: [{type: identity, size} | {type: bsc, q} | {type: explicit, matrix}],
//  coupling?: {axes: [{name, size}], mass: [...]}}
AuxSpec aux_from_json(const Json& j);
Json aux_to_json(const AuxSpec& a);

// {key_rates: [...], privacy_leakage, storage_rates: [...]}
RateTuple rates_from_json(const Json& j);
Json rates_to_json(const RateTuple& t);

Json to_json(const MembershipReport& r);
MembershipReport membership_from_json(const Json& j);

Json to_json(const ChannelClass& c);

Json to_json(const InequalitySystem& s);
InequalitySystem system_from_json(const Json& j);

Json to_json(const RedundancyCertificate& c);

Json to_json(const Stat& s);
Json to_json(const OracleReport& r);
OracleReport oracle_from_json(const Json& j);

Json to_json(const OneTimePadCheck& c);
Json to_json(const TrendReport& r);
Json to_json(const Comparison& c);

}  // namespace kls
