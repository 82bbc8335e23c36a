#include "kls/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "kls/errors.hpp"

namespace kls {

double sig12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

Json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read '" + path + "'");
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << j.dump(2) << '\n';
  if (!f) throw UsageError("failed writing '" + path + "'");
}

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& ctx) {
  if (!j.is_object()) throw UsageError(ctx + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw UsageError(ctx + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
T req(const Json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) throw UsageError(ctx + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(ctx + ": bad value for '" + key + "': " + e.what());
  }
}

Json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return sig12(v);
}

double num_from(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw UsageError("expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

Json num_vec(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

Json matrix(const std::vector<std::vector<double>>& m) {
  Json a = Json::array();
  for (const auto& r : m) a.push_back(num_vec(r));
  return a;
}

}  // namespace

EntitySystem channel_from_json(const Json& j) {
  const std::string ctx = "channel file";
  check_keys(j, {"source", "entities"}, ctx);
  Pmf source(req<std::vector<double>>(j, "source", ctx));
  const auto ents = req<Json>(j, "entities", ctx);
  if (!ents.is_array()) throw UsageError(ctx + ": 'entities' must be an array");
  std::vector<BroadcastChannel> list;
  for (std::size_t i = 0; i < ents.size(); ++i) {
    const auto& e = ents[i];
    const std::string ectx = ctx + ": entity " + std::to_string(i + 1);
    const auto type = req<std::string>(e, "type", ectx);
    if (type == "separate_bsc") {
      check_keys(e, {"type", "p"}, ectx);
      list.push_back(separate_bc(bsc(req<double>(e, "p", ectx))));
    } else if (type == "awgn") {
      check_keys(e, {"type", "snr_db"}, ectx);
      list.push_back(separate_bc(bsc(awgn_to_bsc(req<double>(e, "snr_db", ectx)))));
    } else if (type == "explicit") {
      check_keys(e, {"type", "table"}, ectx);
      list.emplace_back(req<std::vector<std::vector<std::vector<double>>>>(e, "table", ectx));
    } else {
      throw UsageError(ectx + ": unknown type '" + type + "' (expected separate_bsc|explicit|awgn)");
    }
  }
  return EntitySystem(std::move(source), std::move(list));
}

Json channel_to_json(const EntitySystem& sys) {
  Json ents = Json::array();
  for (const auto& bc : sys.entities()) {
    Json t = Json::array();
    for (const auto& slice : bc.table()) t.push_back(matrix(slice));
    ents.push_back({{"type", "explicit"}, {"table", t}});
  }
  std::vector<double> src(sys.source().probs().begin(), sys.source().probs().end());
  return {{"source", num_vec(src)}, {"entities", ents}};
}

AuxSpec aux_from_json(const Json& j) {
  const std::string ctx = "aux file";
  check_keys(j, {"aux", "coupling"}, ctx);
  const auto list = req<Json>(j, "aux", ctx);
  if (!list.is_array()) throw UsageError(ctx + ": 'aux' must be an array");
  AuxSpec out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& e = list[i];
    const std::string ectx = ctx + ": aux " + std::to_string(i + 1);
    const auto type = req<std::string>(e, "type", ectx);
    if (type == "identity") {
      check_keys(e, {"type", "size"}, ectx);
      out.aux.push_back(AuxiliaryChannel::identity(e.contains("size") ? req<std::size_t>(e, "size", ectx) : 2));
    } else if (type == "bsc") {
      check_keys(e, {"type", "q"}, ectx);
      out.aux.push_back({bsc(req<double>(e, "q", ectx))});
    } else if (type == "explicit") {
      check_keys(e, {"type", "matrix"}, ectx);
      out.aux.push_back({ConditionalPmf(req<std::vector<std::vector<double>>>(e, "matrix", ectx))});
    } else {
      throw UsageError(ectx + ": unknown type '" + type + "' (expected identity|bsc|explicit)");
    }
  }
  if (j.contains("coupling")) {
    const auto& c = j.at("coupling");
    const std::string cctx = ctx + ": coupling";
    check_keys(c, {"axes", "mass"}, cctx);
    std::vector<JointPmf::Axis> axes;
    for (const auto& a : req<Json>(c, "axes", cctx)) {
      check_keys(a, {"name", "size"}, cctx + " axis");
      axes.push_back({req<std::string>(a, "name", cctx), req<std::size_t>(a, "size", cctx)});
    }
    out.coupling = JointPmf(std::move(axes), req<std::vector<double>>(c, "mass", cctx));
  }
  return out;
}

Json aux_to_json(const AuxSpec& a) {
  Json list = Json::array();
  for (const auto& ch : a.aux) list.push_back({{"type", "explicit"}, {"matrix", matrix(ch.cond.table())}});
  Json out = {{"aux", list}};
  if (a.coupling) {
    Json axes = Json::array();
    for (const auto& ax : a.coupling->axes()) axes.push_back({{"name", ax.name}, {"size", ax.size}});
    std::vector<double> mass(a.coupling->mass().begin(), a.coupling->mass().end());
    out["coupling"] = {{"axes", axes}, {"mass", num_vec(mass)}};
  }
  return out;
}

RateTuple rates_from_json(const Json& j) {
  const std::string ctx = "rates file";
  check_keys(j, {"key_rates", "privacy_leakage", "storage_rates"}, ctx);
  RateTuple t{req<std::vector<double>>(j, "key_rates", ctx), req<double>(j, "privacy_leakage", ctx),
              req<std::vector<double>>(j, "storage_rates", ctx)};
  t.validate();
  return t;
}

Json rates_to_json(const RateTuple& t) {
  return {{"key_rates", num_vec(t.key_rates)},
          {"privacy_leakage", num(t.privacy_leakage)},
          {"storage_rates", num_vec(t.storage_rates)}};
}

Json to_json(const MembershipReport& r) {
  Json cons = Json::array();
  for (const auto& c : r.constraints) {
    cons.push_back({{"label", c.label},
                    {"sense", c.sense == Sense::le ? "le" : "ge"},
                    {"lhs", num(c.lhs)},
                    {"rhs", num(c.rhs)},
                    {"slack", num(c.slack)}});
  }
  return {{"member", r.member}, {"tolerance", r.tolerance}, {"constraints", cons}, {"binding", r.binding}};
}

MembershipReport membership_from_json(const Json& j) {
  const std::string ctx = "membership report";
  check_keys(j, {"member", "tolerance", "constraints", "binding"}, ctx);
  MembershipReport r;
  r.member = req<bool>(j, "member", ctx);
  r.tolerance = req<double>(j, "tolerance", ctx);
  r.binding = req<std::vector<std::string>>(j, "binding", ctx);
  for (const auto& c : req<Json>(j, "constraints", ctx)) {
    check_keys(c, {"label", "sense", "lhs", "rhs", "slack"}, ctx + " constraint");
    const auto sense = req<std::string>(c, "sense", ctx);
    if (sense != "le" && sense != "ge") throw UsageError(ctx + ": bad sense '" + sense + "'");
    r.constraints.push_back({req<std::string>(c, "label", ctx), sense == "le" ? Sense::le : Sense::ge,
                             num_from(c.at("lhs")), num_from(c.at("rhs")), num_from(c.at("slack"))});
  }
  return r;
}

Json to_json(const ChannelClass& c) {
  Json out = {{"kind", to_string(c.kind)}, {"tolerance", c.tolerance}};
  if (c.grid_resolution > 0) {
    out["grid_resolution"] = c.grid_resolution;
    out["aux_cardinality"] = c.aux_cardinality;
    out["min_gap"] = num(c.min_gap);
    out["witness_info_x"] = num(c.witness_info_x);
    out["witness_info_y"] = num(c.witness_info_y);
  }
  if (c.witness) out["witness"] = matrix(c.witness->cond.table());
  return out;
}

Json to_json(const InequalitySystem& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows()) {
    rows.push_back({{"label", r.label}, {"coeffs", num_vec(r.coeffs)}, {"sense", to_string(r.sense)}, {"rhs", num(r.rhs)}});
  }
  return {{"variables", s.variables()}, {"rows", rows}};
}

InequalitySystem system_from_json(const Json& j) {
  const std::string ctx = "inequality system";
  check_keys(j, {"variables", "rows"}, ctx);
  InequalitySystem s(req<std::vector<std::string>>(j, "variables", ctx));
  for (const auto& r : req<Json>(j, "rows", ctx)) {
    check_keys(r, {"label", "coeffs", "sense", "rhs"}, ctx + " row");
    s.add({req<std::string>(r, "label", ctx), req<std::vector<double>>(r, "coeffs", ctx),
           parse_row_sense(req<std::string>(r, "sense", ctx)), num_from(r.at("rhs"))});
  }
  return s;
}

Json to_json(const RedundancyCertificate& c) {
  return {{"label", c.label},         {"redundant", c.redundant}, {"unbounded", c.unbounded},
          {"infeasible", c.infeasible}, {"optimum", num(c.optimum)}, {"rhs", num(c.rhs)},
          {"active", c.active}};
}

Json to_json(const Stat& s) {
  return {{"mean", num(s.mean)}, {"min", num(s.min)}, {"max", num(s.max)}, {"stderr", num(s.stderr_mean)}};
}

namespace {

Stat stat_from(const Json& j) {
  check_keys(j, {"mean", "min", "max", "stderr"}, "stat");
  return {num_from(j.at("mean")), num_from(j.at("min")), num_from(j.at("max")), num_from(j.at("stderr"))};
}

}  // namespace

Json to_json(const OracleReport& r) {
  Json ents = Json::array();
  for (const auto& e : r.entities) {
    ents.push_back({{"sizes", {{"s", e.sizes.s}, {"w", e.sizes.w}, {"c", e.sizes.c}}},
                    {"error_prob", to_json(e.error_prob)},
                    {"key_entropy_rate", to_json(e.key_entropy_rate)},
                    {"secrecy_leakage", to_json(e.secrecy_leakage)},
                    {"privacy_leakage_rate", to_json(e.privacy_leakage_rate)},
                    {"helper_source_mi", to_json(e.helper_source_mi)}});
  }
  return {{"n", r.n},
          {"trials", r.trials},
          {"seed", r.seed},
          {"entities", ents},
          {"privacy_leakage_rate", to_json(r.privacy_leakage_rate)},
          {"helper_mi", to_json(r.helper_mi)}};
}

OracleReport oracle_from_json(const Json& j) {
  const std::string ctx = "oracle report";
  check_keys(j, {"n", "trials", "seed", "entities", "privacy_leakage_rate", "helper_mi"}, ctx);
  OracleReport r;
  r.n = req<std::size_t>(j, "n", ctx);
  r.trials = req<std::size_t>(j, "trials", ctx);
  r.seed = req<std::uint64_t>(j, "seed", ctx);
  r.privacy_leakage_rate = stat_from(j.at("privacy_leakage_rate"));
  r.helper_mi = stat_from(j.at("helper_mi"));
  for (const auto& e : req<Json>(j, "entities", ctx)) {
    check_keys(e, {"sizes", "error_prob", "key_entropy_rate", "secrecy_leakage", "privacy_leakage_rate", "helper_source_mi"},
               ctx + " entity");
    const auto& sz = e.at("sizes");
    check_keys(sz, {"s", "w", "c"}, ctx + " sizes");
    r.entities.push_back({{req<std::size_t>(sz, "s", ctx), req<std::size_t>(sz, "w", ctx), req<std::size_t>(sz, "c", ctx)},
                          stat_from(e.at("error_prob")),
                          stat_from(e.at("key_entropy_rate")),
                          stat_from(e.at("secrecy_leakage")),
                          stat_from(e.at("privacy_leakage_rate")),
                          stat_from(e.at("helper_source_mi"))});
  }
  return r;
}

Json to_json(const OneTimePadCheck& c) {
  return {{"gs_error", num(c.gs_error)},
          {"cs_error", num(c.cs_error)},
          {"chosen_key_helper_leakage", num(c.chosen_key_helper_leakage)},
          {"chosen_key_leakage", num(c.chosen_key_leakage)},
          {"generated_key_entropy", num(c.generated_key_entropy)},
          {"generated_key_secrecy", num(c.generated_key_secrecy)}};
}

Json to_json(const TrendReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"error_prob", num(row.error_prob)},
                    {"error_stderr", num(row.error_stderr)},
                    {"leak_rate", num(row.leak_rate)},
                    {"leak_stderr", num(row.leak_stderr)},
                    {"key_rate", num(row.key_rate)}});
  }
  Json slopes = Json::object();
  if (r.slopes.size() == 3) slopes = {{"error", num(r.slopes[0])}, {"leak", num(r.slopes[1])}, {"key", num(r.slopes[2])}};
  return {{"rows", rows},
          {"slopes", slopes},
          {"error_nonincreasing", r.error_nonincreasing},
          {"leak_nonincreasing", r.leak_nonincreasing},
          {"leak_growing", r.leak_growing},
          {"key_shortfall", r.key_shortfall}};
}

Json to_json(const Comparison& c) {
  auto param = [](const CurveParam& p) { return Json{{"mode", to_string(p.mode)}, {"p_A", num(p.p_a)}}; };
  return {{"reference", param(c.reference)},
          {"candidate", param(c.candidate)},
          {"reference_key", num(c.reference_key)},
          {"reference_leakage", num(c.reference_leakage)},
          {"candidate_leakage_at_key", num(c.candidate_leakage_at_key)},
          {"leakage_reduction_percent", num(100.0 * c.leakage_reduction)},
          {"candidate_key_at_leakage", num(c.candidate_key_at_leakage)},
          {"corner_key_gain_percent", num(100.0 * c.corner_key_gain)},
          {"limiting_slope_gain_percent", num(100.0 * c.limiting_slope_gain)},
          {"raw_grid_gain_percent", num(100.0 * c.raw_grid_gain)}};
}

}  // namespace kls
