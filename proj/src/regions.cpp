#include "kls/regions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kls/errors.hpp"

namespace kls {

std::string to_string(Model m) { return m == Model::gs ? "gs" : "cs"; }
std::string to_string(Setting s) { return s == Setting::multi_entity ? "multi" : "two"; }
std::string to_string(Bound b) { return b == Bound::inner ? "inner" : "outer"; }

Model parse_model(const std::string& s) {
  if (s == "gs") return Model::gs;
  if (s == "cs") return Model::cs;
  throw UsageError("unknown model '" + s + "' (expected gs|cs)");
}

Setting parse_setting(const std::string& s) {
  if (s == "multi") return Setting::multi_entity;
  if (s == "two") return Setting::two_enrollment;
  throw UsageError("unknown setting '" + s + "' (expected multi|two)");
}

Bound parse_bound(const std::string& s) {
  if (s == "inner") return Bound::inner;
  if (s == "outer") return Bound::outer;
  throw UsageError("unknown bound '" + s + "' (expected inner|outer)");
}

void RateTuple::validate() const {
  if (storage_rates.size() != key_rates.size()) {
    throw UsageError("rate tuple: key and storage rate counts differ");
  }
  auto check = [](double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) {
      std::ostringstream os;
      os << "rate tuple: " << what << " rate " << v << " is not a nonnegative finite number";
      throw DomainError(os.str());
    }
  };
  for (double v : key_rates) check(v, "key");
  for (double v : storage_rates) check(v, "storage");
  check(privacy_leakage, "privacy-leakage");
}

const ConstraintCheck& MembershipReport::find(const std::string& label) const {
  for (const auto& c : constraints) {
    if (c.label == label) return c;
  }
  throw UsageError("membership report has no constraint '" + label + "'");
}

namespace {

std::string u_name(std::size_t j) { return "U" + std::to_string(j + 1); }
std::string xt_name(std::size_t j) { return "Xt" + std::to_string(j + 1); }
std::string y_name(std::size_t j) { return "Y" + std::to_string(j + 1); }

InfoRecord record_from_joint(const JointPmf& joint, std::size_t J) {
  InfoRecord rec;
  VarSet all_u;
  for (std::size_t j = 0; j < J; ++j) all_u.push_back(u_name(j));
  rec.h_all = joint.entropy(all_u);
  rec.entities.resize(J);
  rec.pair_entropy.assign(J, std::vector<double>(J, 0.0));
  rec.cross_cond.assign(J, std::vector<double>(J, 0.0));
  for (std::size_t j = 0; j < J; ++j) {
    const VarSet u{u_name(j)};
    VarSet rest;
    for (std::size_t k = 0; k < J; ++k) {
      if (k != j) rest.push_back(u_name(k));
    }
    auto& e = rec.entities[j];
    e.h_u = joint.entropy(u);
    e.i_u_y = mutual_information(joint, u, {y_name(j)});
    e.i_u_x = mutual_information(joint, u, {"X"});
    e.i_u_xt = mutual_information(joint, u, {xt_name(j)});
    const double h_rest = joint.entropy(rest);
    e.h_u_given_rest = std::max(0.0, rec.h_all - h_rest);
    e.i_u_rest = std::max(0.0, e.h_u - e.h_u_given_rest);
    for (std::size_t k = 0; k < J; ++k) {
      rec.pair_entropy[j][k] = k == j ? e.h_u : joint.entropy({u_name(j), u_name(k)});
      rec.cross_cond[j][k] = conditional_entropy(joint, u, {xt_name(k)});
    }
  }
  return rec;
}

bool has_separate_identical_channels(const EntitySystem& sys) {
  const ConditionalPmf ref = sys.entity(0).measurement_marginal();
  for (const auto& bc : sys.entities()) {
    if (bc.measurement_size() != bc.decoder_size()) return false;
    const ConditionalPmf m = bc.measurement_marginal();
    if (m.output_size() != ref.output_size()) return false;
    for (std::size_t x = 0; x < bc.source_size(); ++x)
      for (std::size_t a = 0; a < bc.measurement_size(); ++a) {
        if (std::abs(m(x, a) - ref(x, a)) > kProbTolerance) return false;
        for (std::size_t y = 0; y < bc.decoder_size(); ++y) {
          if (std::abs(bc(x, a, y) - ref(x, a) * ref(x, y)) > kProbTolerance) return false;
        }
      }
  }
  return true;
}

class ReportBuilder {
 public:
  explicit ReportBuilder(double tol) { report_.tolerance = tol; }

  void le(std::string label, double lhs, double rhs) { add(std::move(label), Sense::le, lhs, rhs); }
  void ge(std::string label, double lhs, double rhs) { add(std::move(label), Sense::ge, lhs, rhs); }

  MembershipReport finish() && { return std::move(report_); }

 private:
  void add(std::string label, Sense sense, double lhs, double rhs) {
    ConstraintCheck c{std::move(label), sense, lhs, rhs, sense == Sense::le ? rhs - lhs : lhs - rhs};
    if (c.slack < -report_.tolerance) report_.member = false;
    if (std::abs(c.slack) <= report_.tolerance) report_.binding.push_back(c.label);
    report_.constraints.push_back(std::move(c));
  }

  MembershipReport report_;
};

std::string tag(const char* prefix, const char* name, std::size_t j) {
  std::ostringstream os;
  os << prefix << ':' << name << ":j=" << j + 1;
  return os.str();
}

void require_matching(const InfoRecord& rec, const RateTuple& t) {
  t.validate();
  if (t.entity_count() != rec.entity_count()) {
    std::ostringstream os;
    os << "rate tuple has " << t.entity_count() << " entities, record has " << rec.entity_count();
    throw UsageError(os.str());
  }
}

}  // namespace

InfoRecord info_record(const EntitySystem& sys, std::span<const AuxiliaryChannel> aux) {
  const std::size_t J = sys.entity_count();
  if (aux.size() != J) {
    std::ostringstream os;
    os << "info_record: " << aux.size() << " aux channels for " << J << " entities";
    throw UsageError(os.str());
  }
  const std::size_t nx = sys.source().size();
  std::vector<std::size_t> sizes{nx};
  std::vector<JointPmf::Axis> axes{{"X", nx}};
  for (std::size_t j = 0; j < J; ++j) {
    const auto& bc = sys.entity(j);
    if (aux[j].cond.input_size() != bc.measurement_size()) {
      std::ostringstream os;
      os << "info_record: aux channel " << j + 1 << " expects " << aux[j].cond.input_size()
         << " inputs, measurement alphabet has " << bc.measurement_size();
      throw UsageError(os.str());
    }
    axes.push_back({xt_name(j), bc.measurement_size()});
    axes.push_back({y_name(j), bc.decoder_size()});
    axes.push_back({u_name(j), aux[j].aux_cardinality()});
    sizes.insert(sizes.end(), {bc.measurement_size(), bc.decoder_size(), aux[j].aux_cardinality()});
  }
  const std::size_t cells = checked_cell_count(sizes);

  std::vector<double> mass;
  mass.reserve(cells);
  for (std::size_t x = 0; x < nx; ++x) {
    // Outer product over entities of P(x~_j, y_j | x) P(u_j | x~_j).
    std::vector<double> block{sys.source()[x]};
    for (std::size_t j = 0; j < J; ++j) {
      const auto& bc = sys.entity(j);
      std::vector<double> factor;
      for (std::size_t a = 0; a < bc.measurement_size(); ++a)
        for (std::size_t y = 0; y < bc.decoder_size(); ++y)
          for (std::size_t u = 0; u < aux[j].aux_cardinality(); ++u)
            factor.push_back(bc(x, a, y) * aux[j].cond(a, u));
      std::vector<double> next;
      next.reserve(block.size() * factor.size());
      for (double b : block)
        for (double f : factor) next.push_back(b * f);
      block = std::move(next);
    }
    mass.insert(mass.end(), block.begin(), block.end());
  }
  JointPmf joint(std::move(axes), std::move(mass));
  InfoRecord rec = record_from_joint(joint, J);
  rec.construction = Construction::product;
  rec.separate_identical_channels = has_separate_identical_channels(sys);
  return rec;
}

InfoRecord info_record_from_coupling(const EntitySystem& sys, const JointPmf& coupling,
                                     double tol) {
  if (sys.entity_count() != 2) throw UsageError("coupling records require exactly two entities");
  const JointPmf c = coupling.marginal({"U1", "U2", "Xt1", "Xt2"});
  const auto& b1 = sys.entity(0);
  const auto& b2 = sys.entity(1);
  const std::size_t nu1 = c.axes()[0].size, nu2 = c.axes()[1].size;
  const std::size_t n1 = b1.measurement_size(), n2 = b2.measurement_size();
  if (c.axes()[2].size != n1 || c.axes()[3].size != n2) {
    throw UsageError("coupling: measurement alphabets do not match the system");
  }
  const std::size_t nx = sys.source().size(), ny1 = b1.decoder_size(), ny2 = b2.decoder_size();

  // P(x~_1, x~_2) under the system.
  std::vector<double> p_meas(n1 * n2, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t a = 0; a < n1; ++a)
      for (std::size_t b = 0; b < n2; ++b) {
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t y = 0; y < ny1; ++y) m1 += b1(x, a, y);
        for (std::size_t y = 0; y < ny2; ++y) m2 += b2(x, b, y);
        p_meas[a * n2 + b] += sys.source()[x] * m1 * m2;
      }
  const JointPmf cm = c.marginal({"Xt1", "Xt2"});
  for (std::size_t i = 0; i < p_meas.size(); ++i) {
    if (std::abs(cm.mass()[i] - p_meas[i]) > tol) {
      throw UsageError("coupling: (Xt1, Xt2) marginal differs from the system's");
    }
  }

  std::vector<std::size_t> sizes{nu1, nu2, n1, n2, nx, ny1, ny2};
  checked_cell_count(sizes);
  std::vector<double> mass;
  for (std::size_t u1 = 0; u1 < nu1; ++u1)
    for (std::size_t u2 = 0; u2 < nu2; ++u2)
      for (std::size_t a = 0; a < n1; ++a)
        for (std::size_t b = 0; b < n2; ++b) {
          const double pc = c.mass()[((u1 * nu2 + u2) * n1 + a) * n2 + b];
          const double pm = p_meas[a * n2 + b];
          for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y1 = 0; y1 < ny1; ++y1)
              for (std::size_t y2 = 0; y2 < ny2; ++y2) {
                const double cond =
                    pm > 0.0 ? sys.source()[x] * b1(x, a, y1) * b2(x, b, y2) / pm : 0.0;
                mass.push_back(pc * cond);
              }
        }
  // Renormalize against division rounding.
  double s = 0.0;
  for (double m : mass) s += m;
  for (double& m : mass) m /= s;
  JointPmf joint({{"U1", nu1}, {"U2", nu2}, {"Xt1", n1}, {"Xt2", n2}, {"X", nx}, {"Y1", ny1}, {"Y2", ny2}},
                 std::move(mass));
  for (std::size_t j = 0; j < 2; ++j) {
    double leak = conditional_mutual_information(joint, {u_name(j)}, {"X", y_name(j)}, {xt_name(j)});
    if (leak > tol) {
      std::ostringstream os;
      os << "coupling: U" << j + 1 << " - Xt" << j + 1 << " - (X, Y" << j + 1
         << ") is not a Markov chain (I = " << leak << ")";
      throw UsageError(os.str());
    }
  }
  InfoRecord rec = record_from_joint(joint, 2);
  rec.construction = Construction::coupling;
  rec.separate_identical_channels = has_separate_identical_channels(sys);
  return rec;
}

double strong_privacy_term(const InfoRecord& rec) {
  double s = 0.0;
  for (const auto& e : rec.entities) s += std::max(0.0, e.i_u_x - e.i_u_y);
  return s;
}

MembershipReport eval_multi_entity_inner(const InfoRecord& rec, const RateTuple& t, Model model,
                                         double tol) {
  require_matching(rec, t);
  ReportBuilder r(tol);
  for (std::size_t j = 0; j < rec.entity_count(); ++j) {
    const auto& e = rec.at(j);
    r.ge(tag("thm1", "key_nonneg", j), t.key_rates[j], 0.0);
    r.le(tag("thm1", "key", j), t.key_rates[j], e.i_u_y - e.i_u_rest);
  }
  r.ge("thm1:leakage", t.privacy_leakage, strong_privacy_term(rec));
  for (std::size_t j = 0; j < rec.entity_count(); ++j) {
    const auto& e = rec.at(j);
    if (model == Model::gs) {
      r.ge(tag("thm1", "storage", j), t.storage_rates[j], e.i_u_xt - e.i_u_y);
      r.le(tag("thm1", "key_storage", j), t.key_rates[j] + t.storage_rates[j], e.h_u_given_rest);
    } else {
      r.ge(tag("thm1", "cs_storage", j), t.storage_rates[j], e.i_u_xt - e.i_u_rest);
      r.le(tag("thm1", "cs_storage_upper", j), t.storage_rates[j], e.h_u_given_rest);
    }
  }
  return std::move(r).finish();
}

MembershipReport eval_pd_ln_outer(const InfoRecord& rec, const RateTuple& t, Model model,
                                  std::span<const ChannelClass> classes, double tol) {
  require_matching(rec, t);
  if (classes.size() != rec.entity_count()) {
    throw UsageError("eval_pd_ln_outer: one channel classification per entity is required");
  }
  for (std::size_t j = 0; j < classes.size(); ++j) {
    if (classes[j].kind == ChannelKind::neither) {
      std::ostringstream os;
      os << "eval_pd_ln_outer: entity " << j + 1
         << " is neither physically degraded nor certified less noisy";
      throw UsageError(os.str());
    }
  }
  ReportBuilder r(tol);
  for (std::size_t j = 0; j < rec.entity_count(); ++j) {
    const auto& e = rec.at(j);
    r.ge(tag("lem1", "key_nonneg", j), t.key_rates[j], 0.0);
    r.le(tag("lem1", "key", j), t.key_rates[j], e.i_u_y);
  }
  r.ge("lem1:leakage", t.privacy_leakage, 0.0);
  for (std::size_t j = 0; j < rec.entity_count(); ++j) {
    const auto& e = rec.at(j);
    if (model == Model::gs) {
      r.ge(tag("lem1", "storage", j), t.storage_rates[j], e.i_u_xt - e.i_u_y);
    } else {
      r.ge(tag("lem1", "cs_storage", j), t.storage_rates[j], e.i_u_xt);
    }
  }
  return std::move(r).finish();
}

MembershipReport eval_two_enrollment(const InfoRecord& rec, const RateTuple& t, Model model,
                                     Bound bound, double tol) {
  if (rec.entity_count() != 2) {
    throw UsageError("eval_two_enrollment: exactly two enrollments are required");
  }
  require_matching(rec, t);
  if (bound == Bound::inner) {
    if (rec.construction != Construction::product) {
      throw UsageError("eval_two_enrollment: the inner bound needs the product construction");
    }
    if (!rec.separate_identical_channels) {
      throw UsageError(
          "eval_two_enrollment: the inner bound needs separate measurement channels with one "
          "shared transition matrix");
    }
  }
  ReportBuilder r(tol);
  double leak_lower = 0.0, leak_upper = 0.0;
  for (std::size_t j = 0; j < 2; ++j) {
    const auto& e = rec.at(j);
    r.ge(tag("thm2", "key_nonneg", j), t.key_rates[j], 0.0);
    r.le(tag("thm2", "key", j), t.key_rates[j], e.i_u_y);
    leak_lower += e.i_u_x - e.i_u_y;
    leak_upper += e.i_u_x - e.i_u_xt + t.storage_rates[j];
  }
  r.ge("thm2:leakage_lower", t.privacy_leakage, leak_lower);
  r.le("thm2:leakage_upper", t.privacy_leakage, leak_upper);
  for (std::size_t j = 0; j < 2; ++j) {
    const std::size_t k = 1 - j;
    const auto& e = rec.at(j);
    const double h_pair = rec.pair_entropy[j][k];
    if (model == Model::gs) {
      r.ge(tag("thm2", "storage", j), t.storage_rates[j], e.i_u_xt - e.i_u_y);
      r.le(tag("thm2", "key_storage", j), t.key_rates[j] + t.storage_rates[j], e.h_u);
      r.le(tag("thm2", "joint_sum", j), t.key_rates[j] + t.storage_rates[j] + t.storage_rates[k],
           h_pair);
    } else {
      r.ge(tag("thm2", "cs_storage", j), t.storage_rates[j], e.i_u_xt);
      r.le(tag("thm2", "cs_storage_upper", j), t.storage_rates[j], e.h_u);
      r.le(tag("thm2", "cs_joint_sum", j), t.storage_rates[j] + t.storage_rates[k],
           h_pair + t.key_rates[k]);
    }
  }
  return std::move(r).finish();
}

RateTuple gs_corner_point(const InfoRecord& rec, Setting setting) {
  RateTuple t;
  if (setting == Setting::two_enrollment && rec.entity_count() != 2) {
    throw UsageError("gs_corner_point: the two-enrollment setting needs two entities");
  }
  for (const auto& e : rec.entities) {
    const double key = setting == Setting::multi_entity ? e.i_u_y - e.i_u_rest : e.i_u_y;
    t.key_rates.push_back(std::max(0.0, key));
    t.storage_rates.push_back(std::max(0.0, e.i_u_xt - e.i_u_y));
  }
  if (setting == Setting::multi_entity) {
    t.privacy_leakage = strong_privacy_term(rec);
  } else {
    double l = 0.0;
    for (const auto& e : rec.entities) l += e.i_u_x - e.i_u_y;
    t.privacy_leakage = std::max(0.0, l);
  }
  return t;
}

}  // namespace kls
