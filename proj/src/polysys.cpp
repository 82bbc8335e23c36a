#include "kls/polysys.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "kls/errors.hpp"

namespace kls {

std::string to_string(RowSense s) {
  switch (s) {
    case RowSense::le: return "le";
    case RowSense::ge: return "ge";
    case RowSense::lt: return "lt";
    case RowSense::gt: return "gt";
  }
  return "le";
}

RowSense parse_row_sense(const std::string& s) {
  if (s == "le") return RowSense::le;
  if (s == "ge") return RowSense::ge;
  if (s == "lt") return RowSense::lt;
  if (s == "gt") return RowSense::gt;
  throw UsageError("unknown row sense '" + s + "' (expected le|ge|lt|gt)");
}

InequalitySystem::InequalitySystem(std::vector<std::string> variables)
    : variables_(std::move(variables)) {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    for (std::size_t k = i + 1; k < variables_.size(); ++k) {
      if (variables_[i] == variables_[k]) throw UsageError("duplicate variable '" + variables_[i] + "'");
    }
}

std::size_t InequalitySystem::variable_index(const std::string& name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i] == name) return i;
  }
  throw UsageError("unknown variable '" + name + "'");
}

bool InequalitySystem::has_row(const std::string& label) const {
  return std::any_of(rows_.begin(), rows_.end(), [&](const Inequality& r) { return r.label == label; });
}

const Inequality& InequalitySystem::row(const std::string& label) const {
  for (const auto& r : rows_) {
    if (r.label == label) return r;
  }
  throw UsageError("no inequality labelled '" + label + "'");
}

void InequalitySystem::add(Inequality row) {
  if (row.coeffs.size() != variables_.size()) {
    std::ostringstream os;
    os << "inequality '" << row.label << "' has " << row.coeffs.size() << " coefficients for "
       << variables_.size() << " variables";
    throw UsageError(os.str());
  }
  if (has_row(row.label)) throw UsageError("duplicate inequality label '" + row.label + "'");
  rows_.push_back(std::move(row));
}

void InequalitySystem::add(const std::string& label,
                           const std::vector<std::pair<std::string, double>>& terms, RowSense sense,
                           double rhs) {
  Inequality r{label, std::vector<double>(variables_.size(), 0.0), sense, rhs};
  for (const auto& [name, c] : terms) r.coeffs[variable_index(name)] += c;
  add(std::move(r));
}

InequalitySystem InequalitySystem::without(const std::string& label) const {
  row(label);
  InequalitySystem out(variables_);
  for (const auto& r : rows_) {
    if (r.label != label) out.rows_.push_back(r);
  }
  return out;
}

InequalitySystem InequalitySystem::with_rhs(const std::string& label, double rhs) const {
  row(label);
  InequalitySystem out = *this;
  for (auto& r : out.rows_) {
    if (r.label == label) r.rhs = rhs;
  }
  return out;
}

InequalitySystem InequalitySystem::closure() const {
  InequalitySystem out = *this;
  for (auto& r : out.rows_) {
    if (r.sense == RowSense::lt) r.sense = RowSense::le;
    if (r.sense == RowSense::gt) r.sense = RowSense::ge;
  }
  return out;
}

void InequalitySystem::as_le(std::vector<std::vector<double>>& a, std::vector<double>& b) const {
  a.clear();
  b.clear();
  for (const auto& r : rows_) {
    const bool flip = r.sense == RowSense::ge || r.sense == RowSense::gt;
    std::vector<double> c = r.coeffs;
    if (flip) {
      for (double& v : c) v = -v;
    }
    a.push_back(std::move(c));
    b.push_back(flip ? -r.rhs : r.rhs);
  }
}

namespace {

std::string idx(const char* base, std::size_t j) { return std::string(base) + std::to_string(j + 1); }
std::string jl(const char* base, std::size_t j) { return std::string(base) + ":j=" + std::to_string(j + 1); }

void add_nonneg(InequalitySystem& s) {
  for (const auto& v : s.variables()) s.add("nonneg:" + v, {{v, 1.0}}, RowSense::ge, 0.0);
}

void require_two(const InfoRecord& rec, const char* what) {
  if (rec.entity_count() != 2) throw UsageError(std::string(what) + ": a two-entity record is required");
}

struct TwoTerms {
  double hy[2], hxt[2], h[2], iy[2], h12;
};

TwoTerms two_terms(const InfoRecord& rec) {
  TwoTerms t{};
  for (std::size_t j = 0; j < 2; ++j) {
    t.hy[j] = rec.at(j).h_u_given_y();
    t.hxt[j] = rec.at(j).h_u_given_xt();
    t.h[j] = rec.at(j).h_u;
    t.iy[j] = rec.at(j).i_u_y;
  }
  t.h12 = rec.pair_entropy[0][1];
  return t;
}

InequalitySystem reduced_common(const InfoRecord& rec, bool replaced) {
  require_two(rec, "build_theorem2_reduced");
  const auto t = two_terms(rec);
  InequalitySystem s({"Rs1", "Rw1", "Rs2", "Rw2"});
  for (std::size_t j = 0; j < 2; ++j) {
    s.add(jl("storage", j), {{idx("Rw", j), 1.0}}, RowSense::gt, t.hy[j] - t.hxt[j]);
  }
  for (std::size_t j = 0; j < 2; ++j) s.add(jl("key", j), {{idx("Rs", j), 1.0}}, RowSense::lt, t.iy[j]);
  for (std::size_t j = 0; j < 2; ++j) {
    s.add(jl("key_joint", j), {{idx("Rs", j), 1.0}}, RowSense::lt, t.h12 - t.hy[0] - t.hy[1]);
  }
  for (std::size_t j = 0; j < 2; ++j) {
    const std::size_t k = 1 - j;
    const std::string rs = idx("Rs", j), rw = idx("Rw", j), rwk = idx("Rw", k);
    if (replaced) {
      s.add(jl("corner_sum", j), {{rs, 2.0}, {rw, 1.0}, {rwk, 1.0}}, RowSense::lt, t.iy[j] + t.h12);
    } else {
      s.add(jl("key_cross_storage", j), {{rs, 1.0}, {rwk, 1.0}}, RowSense::lt, t.h12 - t.hy[j]);
    }
    s.add(jl("key_storage", j), {{rs, 1.0}, {rw, 1.0}}, RowSense::lt, t.h[j]);
    s.add(jl("key_storage_joint", j), {{rs, 1.0}, {rw, 1.0}}, RowSense::lt, t.h12 - t.hy[k]);
    s.add(jl("sum", j), {{rs, 1.0}, {rw, 1.0}, {rwk, 1.0}}, RowSense::lt, t.h12);
  }
  add_nonneg(s);
  return s;
}

InequalitySystem raw_common(const InfoRecord& rec, bool merged) {
  require_two(rec, "build_theorem2_osrb");
  const auto t = two_terms(rec);
  InequalitySystem s({"Rs1", "Rw1", "Rc1", "Rs2", "Rw2", "Rc2"});
  for (std::size_t j = 0; j < 2; ++j) {
    s.add(jl("sw", j), {{idx("Rc", j), 1.0}, {idx("Rw", j), 1.0}}, RowSense::gt, t.hy[j]);
  }
  for (std::size_t j = 0; j < 2; ++j) {
    s.add(jl("uniform", j), {{idx("Rs", j), 1.0}, {idx("Rw", j), 1.0}, {idx("Rc", j), 1.0}}, RowSense::lt,
          t.h[j]);
  }
  if (merged) {
    s.add("joint_secrecy",
          {{"Rs1", 1.0}, {"Rw1", 1.0}, {"Rc1", 1.0}, {"Rs2", 1.0}, {"Rw2", 1.0}, {"Rc2", 1.0}},
          RowSense::lt, t.h12);
  } else {
    for (std::size_t j = 0; j < 2; ++j) {
      const std::size_t k = 1 - j;
      s.add(jl("joint", j),
            {{idx("Rs", j), 1.0}, {idx("Rw", j), 1.0}, {idx("Rc", j), 1.0}, {idx("Rw", k), 1.0},
             {idx("Rc", k), 1.0}},
            RowSense::lt, t.h12);
    }
  }
  for (std::size_t j = 0; j < 2; ++j) s.add(jl("code", j), {{idx("Rc", j), 1.0}}, RowSense::lt, t.hxt[j]);
  add_nonneg(s);
  return s;
}

}  // namespace

InequalitySystem build_theorem1_osrb(const InfoRecord& rec, std::size_t j) {
  const auto& e = rec.at(j);
  const std::string rs = idx("Rs", j), rw = idx("Rw", j), rc = idx("Rc", j);
  InequalitySystem s({rs, rw, rc});
  s.add(jl("sw", j), {{rc, 1.0}, {rw, 1.0}}, RowSense::gt, e.h_u_given_y());
  s.add(jl("indep", j), {{rs, 1.0}, {rw, 1.0}, {rc, 1.0}}, RowSense::lt, e.h_u_given_rest);
  s.add(jl("code", j), {{rc, 1.0}}, RowSense::lt, e.h_u_given_xt());
  add_nonneg(s);
  return s;
}

InequalitySystem build_theorem2_osrb(const InfoRecord& rec) { return raw_common(rec, false); }
InequalitySystem build_theorem2_joint_secrecy(const InfoRecord& rec) { return raw_common(rec, true); }
InequalitySystem build_theorem2_reduced(const InfoRecord& rec) { return reduced_common(rec, false); }
InequalitySystem build_theorem2_replaced(const InfoRecord& rec) { return reduced_common(rec, true); }

std::vector<std::string> claimed_inactive_labels() {
  return {"key_joint:j=1", "key_joint:j=2", "key_storage_joint:j=1", "key_storage_joint:j=2"};
}

namespace {

struct LeRow {
  std::vector<double> a;
  double b;
  std::string label;
};

std::vector<LeRow> le_rows(const InequalitySystem& sys) {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  sys.closure().as_le(a, b);
  std::vector<LeRow> out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back({a[i], b[i], sys.rows()[i].label});
  return out;
}

// Scales so the largest coefficient magnitude is 1.
void normalize(LeRow& r) {
  double m = 0.0;
  for (double v : r.a) m = std::max(m, std::abs(v));
  if (m == 0.0) return;
  for (double& v : r.a) v /= m;
  r.b /= m;
}

bool redundant_among(const std::vector<LeRow>& rows, std::size_t target, double tol) {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == target) continue;
    a.push_back(rows[i].a);
    b.push_back(rows[i].b);
  }
  const auto r = lp_maximize(a, b, rows[target].a);
  if (r.status == LpStatus::infeasible) return true;
  return r.status == LpStatus::optimal && r.value <= rows[target].b + tol;
}

}  // namespace

InequalitySystem fourier_motzkin(const InequalitySystem& sys, const std::vector<std::string>& eliminate,
                                 const FmeOptions& opt) {
  std::vector<std::size_t> elim;
  for (const auto& v : eliminate) elim.push_back(sys.variable_index(v));
  std::vector<LeRow> rows = le_rows(sys);
  for (std::size_t k : elim) {
    std::vector<LeRow> pos, neg, next;
    for (auto& r : rows) {
      if (r.a[k] > opt.tol) pos.push_back(r);
      else if (r.a[k] < -opt.tol) neg.push_back(r);
      else {
        r.a[k] = 0.0;
        next.push_back(r);
      }
    }
    if (next.size() + pos.size() * neg.size() > opt.row_cap) {
      std::ostringstream os;
      os << "fourier_motzkin: eliminating '" << sys.variables()[k] << "' would produce "
         << next.size() + pos.size() * neg.size() << " rows, cap is " << opt.row_cap;
      throw ResourceError(os.str());
    }
    for (const auto& p : pos)
      for (const auto& n : neg) {
        LeRow r{std::vector<double>(p.a.size()), 0.0, "(" + p.label + ")+(" + n.label + ")"};
        const double wp = -n.a[k], wn = p.a[k];
        for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = wp * p.a[i] + wn * n.a[i];
        r.a[k] = 0.0;
        r.b = wp * p.b + wn * n.b;
        next.push_back(std::move(r));
      }
    // Drop trivial rows and keep the tightest of parallel duplicates.
    std::vector<LeRow> kept;
    for (auto& r : next) {
      normalize(r);
      const bool zero = std::all_of(r.a.begin(), r.a.end(), [&](double v) { return std::abs(v) <= opt.tol; });
      if (zero && r.b >= -opt.tol) continue;
      auto dup = std::find_if(kept.begin(), kept.end(), [&](const LeRow& o) {
        for (std::size_t i = 0; i < o.a.size(); ++i) {
          if (std::abs(o.a[i] - r.a[i]) > opt.tol) return false;
        }
        return true;
      });
      if (dup == kept.end()) kept.push_back(std::move(r));
      else if (r.b < dup->b) *dup = std::move(r);
    }
    if (opt.prune) {
      for (std::size_t i = kept.size(); i-- > 0;) {
        if (kept.size() > 1 && redundant_among(kept, i, opt.tol)) kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
    rows = std::move(kept);
  }
  std::vector<std::string> vars;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < sys.variables().size(); ++i) {
    if (std::find(elim.begin(), elim.end(), i) == elim.end()) {
      vars.push_back(sys.variables()[i]);
      keep.push_back(i);
    }
  }
  InequalitySystem out(vars);
  std::map<std::string, int> seen;
  for (const auto& r : rows) {
    Inequality q{r.label, {}, RowSense::le, r.b};
    for (auto i : keep) q.coeffs.push_back(r.a[i]);
    if (int n = seen[r.label]++; n > 0) q.label += "#" + std::to_string(n);
    out.add(std::move(q));
  }
  return out;
}

RedundancyCertificate certify_redundancy(const InequalitySystem& sys, const std::string& label,
                                         double tol) {
  sys.row(label);
  const auto rows = le_rows(sys);
  RedundancyCertificate cert;
  cert.label = label;
  std::vector<std::vector<double>> a;
  std::vector<double> b, c;
  std::vector<std::string> labels;
  for (const auto& r : rows) {
    if (r.label == label) {
      c = r.a;
      cert.rhs = r.b;
    } else {
      a.push_back(r.a);
      b.push_back(r.b);
      labels.push_back(r.label);
    }
  }
  const auto res = lp_maximize_exact(a, b, c);
  switch (res.status) {
    case LpStatus::unbounded:
      cert.unbounded = true;
      cert.optimum = std::numeric_limits<double>::infinity();
      return cert;
    case LpStatus::infeasible:
      cert.infeasible = true;
      cert.redundant = true;
      return cert;
    case LpStatus::optimal:
      break;
  }
  cert.optimum = res.value;
  cert.redundant = res.value <= cert.rhs + tol;
  for (auto i : res.active) cert.active.push_back(labels[i]);
  return cert;
}

namespace {

// Coefficients of `other`'s rows mapped onto `sys`'s variable order; every
// variable of `other` must exist in `sys`.
std::vector<LeRow> mapped_rows(const InequalitySystem& sys, const InequalitySystem& other) {
  std::vector<LeRow> out;
  for (auto& r : le_rows(other)) {
    LeRow m{std::vector<double>(sys.variables().size(), 0.0), r.b, r.label};
    for (std::size_t i = 0; i < other.variables().size(); ++i) m.a[sys.variable_index(other.variables()[i])] = r.a[i];
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

bool implies(const InequalitySystem& sys, const InequalitySystem& other, double tol,
             std::vector<std::string>* failing) {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  sys.closure().as_le(a, b);
  bool ok = true;
  for (const auto& r : mapped_rows(sys, other)) {
    const auto res = lp_maximize_exact(a, b, r.a);
    if (res.status == LpStatus::infeasible) return true;
    if (res.status == LpStatus::unbounded || res.value > r.b + tol) {
      ok = false;
      if (failing) failing->push_back(r.label);
    }
  }
  return ok;
}

bool is_bounded(const InequalitySystem& sys) {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  sys.closure().as_le(a, b);
  const std::size_t n = sys.variables().size();
  for (std::size_t i = 0; i < n; ++i)
    for (double s : {1.0, -1.0}) {
      std::vector<double> c(n, 0.0);
      c[i] = s;
      if (lp_maximize(a, b, c).status == LpStatus::unbounded) return false;
    }
  return true;
}

std::optional<std::vector<Vertex>> system_vertices(const InequalitySystem& sys, double tol) {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  sys.closure().as_le(a, b);
  const std::size_t n = sys.variables().size();
  if (lp_maximize(a, b, std::vector<double>(n, 0.0)).status == LpStatus::infeasible) return std::nullopt;
  if (!is_bounded(sys)) return std::nullopt;
  return enumerate_vertices(a, b, tol);
}

bool is_vertex(const InequalitySystem& sys, const std::vector<double>& x, double tol) {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  sys.closure().as_le(a, b);
  if (x.size() != sys.variables().size()) throw UsageError("is_vertex: point has the wrong dimension");
  std::vector<std::size_t> tight;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double lhs = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) lhs += a[i][k] * x[k];
    if (lhs > b[i] + tol) return false;
    if (lhs >= b[i] - tol) tight.push_back(i);
  }
  return row_rank(a, tight) == x.size();
}

bool vertices_extend(const InequalitySystem& raw, const InequalitySystem& reduced, double tol) {
  const auto verts = system_vertices(reduced, tol);
  if (!verts) return false;
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  raw.closure().as_le(a, b);
  std::vector<std::size_t> fixed;
  for (const auto& v : reduced.variables()) fixed.push_back(raw.variable_index(v));
  std::vector<std::size_t> free_vars;
  for (std::size_t i = 0; i < raw.variables().size(); ++i) {
    if (std::find(fixed.begin(), fixed.end(), i) == fixed.end()) free_vars.push_back(i);
  }
  for (const auto& v : *verts) {
    std::vector<std::vector<double>> sa;
    std::vector<double> sb;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double rhs = b[i] + tol;
      for (std::size_t k = 0; k < fixed.size(); ++k) rhs -= a[i][fixed[k]] * v.x[k];
      std::vector<double> row;
      for (auto f : free_vars) row.push_back(a[i][f]);
      sa.push_back(std::move(row));
      sb.push_back(rhs);
    }
    if (free_vars.empty()) {
      for (double r : sb) {
        if (r < 0.0) return false;
      }
      continue;
    }
    if (lp_maximize(sa, sb, std::vector<double>(free_vars.size(), 0.0)).status == LpStatus::infeasible) return false;
  }
  return true;
}

ProjectionReport project_and_compare_report(const InequalitySystem& raw,
                                            const std::vector<std::string>& eliminate,
                                            const InequalitySystem& reduced, double tol) {
  ProjectionReport rep;
  rep.projected = fourier_motzkin(raw.closure(), eliminate, {tol, true, kFmeRowCap});
  rep.projected_rows = rep.projected.rows().size();
  auto a = reduced.variables(), b = rep.projected.variables();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw UsageError("project_and_compare: reduced system is over different variables");
  const bool fwd = implies(rep.projected, reduced, tol, &rep.reduced_not_implied);
  const bool back = implies(reduced, rep.projected, tol, &rep.projected_not_implied);
  rep.equal = fwd && back;
  rep.lifted_check = implies(raw, reduced, tol);
  rep.vertices_extend = vertices_extend(raw, reduced, tol);
  return rep;
}

bool project_and_compare(const InequalitySystem& raw, const std::vector<std::string>& eliminate,
                         const InequalitySystem& reduced, double tol) {
  const auto rep = project_and_compare_report(raw, eliminate, reduced, tol);
  return rep.equal && rep.lifted_check;
}

std::vector<double> reduced_corner(const InfoRecord& rec) {
  require_two(rec, "reduced_corner");
  std::vector<double> x;
  for (std::size_t j = 0; j < 2; ++j) {
    const auto& e = rec.at(j);
    x.push_back(e.i_u_y);
    x.push_back(e.i_u_xt - e.i_u_y);
  }
  return x;
}

SymmetryCheck check_symmetric_record(const InfoRecord& rec, double tol) {
  if (rec.entity_count() != 2) return {false, "record does not have two entities"};
  const auto& e1 = rec.at(0);
  const auto& e2 = rec.at(1);
  auto fail = [](const char* what, double a, double b) {
    std::ostringstream os;
    os.precision(12);
    os << what << " differ: " << a << " vs " << b;
    return SymmetryCheck{false, os.str()};
  };
  if (std::abs(e1.h_u - e2.h_u) > tol) return fail("H(U1), H(U2)", e1.h_u, e2.h_u);
  if (std::abs(e1.i_u_y - e2.i_u_y) > tol) return fail("I(U1;Y1), I(U2;Y2)", e1.i_u_y, e2.i_u_y);
  if (std::abs(rec.cross_cond[0][1] - e1.h_u_given_y()) > tol) {
    return fail("H(U1|Xt2), H(U1|Y1)", rec.cross_cond[0][1], e1.h_u_given_y());
  }
  if (std::abs(rec.cross_cond[1][0] - e2.h_u_given_y()) > tol) {
    return fail("H(U2|Xt1), H(U2|Y2)", rec.cross_cond[1][0], e2.h_u_given_y());
  }
  return {true, "symmetric"};
}

CornerReplacementReport verify_corner_replacement(const InfoRecord& rec, double tol) {
  CornerReplacementReport rep;
  const auto sym = check_symmetric_record(rec);
  rep.precondition = sym.reason;
  rep.precondition_met = sym.symmetric;
  if (!sym.symmetric) return rep;
  const auto orig = build_theorem2_reduced(rec);
  const auto repl = build_theorem2_replaced(rec);
  const auto corner = reduced_corner(rec);
  rep.corner_in_original = is_vertex(orig, corner, tol);
  rep.corner_in_replaced = is_vertex(repl, corner, tol);
  const auto vo = system_vertices(orig, tol * 0.1);
  const auto vr = system_vertices(repl, tol * 0.1);
  rep.bounded = vo.has_value() && vr.has_value();
  if (!rep.bounded) return rep;
  rep.original_vertices = vo->size();
  rep.replaced_vertices = vr->size();
  auto contains = [&](const std::vector<Vertex>& set, const std::vector<double>& x) {
    return std::any_of(set.begin(), set.end(), [&](const Vertex& v) {
      for (std::size_t k = 0; k < x.size(); ++k) {
        if (std::abs(v.x[k] - x[k]) > tol) return false;
      }
      return true;
    });
  };
  for (const auto& v : *vo) {
    if (!contains(*vr, v.x)) rep.only_in_original.push_back(v.x);
  }
  for (const auto& v : *vr) {
    if (!contains(*vo, v.x)) rep.only_in_replaced.push_back(v.x);
  }
  rep.vertex_sets_equal = rep.only_in_original.empty() && rep.only_in_replaced.empty();
  return rep;
}

JointSecrecyDiagnostic joint_secrecy_diagnostic(const InfoRecord& rec, double tol) {
  auto max_keys = [](const InequalitySystem& s) {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    s.closure().as_le(a, b);
    std::vector<double> c(s.variables().size(), 0.0);
    c[s.variable_index("Rs1")] = 1.0;
    c[s.variable_index("Rs2")] = 1.0;
    const auto r = lp_maximize_exact(a, b, c);
    return r.status == LpStatus::optimal ? r.value : 0.0;
  };
  JointSecrecyDiagnostic d;
  d.max_total_key = max_keys(build_theorem2_joint_secrecy(rec));
  d.max_total_key_split = max_keys(build_theorem2_osrb(rec));
  d.positive_keys_feasible = d.max_total_key > tol;
  return d;
}

}  // namespace kls
