#include "kls/probkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "kls/errors.hpp"

namespace kls {

namespace {

void validate_probs(std::span<const double> probs, const char* what) {
  if (probs.empty()) {
    throw DistributionError(std::string(what) + ": empty distribution");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      std::ostringstream os;
      os << what << ": entry " << p << " is not a nonnegative finite number";
      throw DistributionError(os.str());
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": entries sum to " << sum << ", expected 1";
    throw DistributionError(os.str());
  }
}

double plogp_sum(std::span<const double> mass) {
  double h = 0.0;
  for (double p : mass) {
    if (p > kZeroMass) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
  validate_probs(probs_, "Pmf");
}

Pmf Pmf::uniform(std::size_t n) {
  if (n == 0) throw DistributionError("Pmf::uniform: empty alphabet");
  return Pmf(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Pmf Pmf::point_mass(std::size_t n, std::size_t at) {
  if (at >= n) throw DistributionError("Pmf::point_mass: symbol outside alphabet");
  std::vector<double> v(n, 0.0);
  v[at] = 1.0;
  return Pmf(std::move(v));
}

ConditionalPmf::ConditionalPmf(std::vector<Pmf> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw DistributionError("ConditionalPmf: no rows");
  for (const auto& r : rows_) {
    if (r.size() != rows_.front().size()) {
      throw DistributionError("ConditionalPmf: ragged rows");
    }
  }
}

ConditionalPmf::ConditionalPmf(const std::vector<std::vector<double>>& rows) {
  std::vector<Pmf> pmfs;
  pmfs.reserve(rows.size());
  for (const auto& r : rows) pmfs.emplace_back(r);
  *this = ConditionalPmf(std::move(pmfs));
}

ConditionalPmf ConditionalPmf::identity(std::size_t n) {
  std::vector<Pmf> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back(Pmf::point_mass(n, i));
  return ConditionalPmf(std::move(rows));
}

std::vector<std::vector<double>> ConditionalPmf::table() const {
  std::vector<std::vector<double>> t;
  for (const auto& r : rows_) t.emplace_back(r.probs().begin(), r.probs().end());
  return t;
}

std::size_t checked_cell_count(std::span<const std::size_t> sizes) {
  double cells = 1.0;
  for (std::size_t s : sizes) cells *= static_cast<double>(s);
  if (cells > kMaxJointCells) {
    std::ostringstream os;
    os << "joint alphabet has " << cells << " cells, cap is " << kMaxJointCells;
    throw ResourceError(os.str());
  }
  return static_cast<std::size_t>(cells);
}

JointPmf::JointPmf(std::vector<Axis> axes, std::vector<double> mass)
    : axes_(std::move(axes)), mass_(std::move(mass)) {
  std::set<std::string> names;
  std::vector<std::size_t> sizes;
  for (const auto& a : axes_) {
    if (a.size == 0) throw DistributionError("JointPmf: axis '" + a.name + "' is empty");
    if (!names.insert(a.name).second) {
      throw UsageError("JointPmf: duplicate axis '" + a.name + "'");
    }
    sizes.push_back(a.size);
  }
  if (checked_cell_count(sizes) != mass_.size()) {
    throw DistributionError("JointPmf: mass size does not match axes");
  }
  validate_probs(mass_, "JointPmf");
}

std::size_t JointPmf::axis_index(const std::string& name) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].name == name) return i;
  }
  throw UsageError("unknown variable '" + name + "'");
}

bool JointPmf::has_axis(const std::string& name) const {
  return std::any_of(axes_.begin(), axes_.end(), [&](const Axis& a) { return a.name == name; });
}

JointPmf JointPmf::marginal(const VarSet& keep) const {
  std::vector<std::size_t> idx;
  std::vector<Axis> out_axes;
  for (const auto& name : keep) {
    std::size_t i = axis_index(name);
    if (std::find(idx.begin(), idx.end(), i) != idx.end()) {
      throw UsageError("marginal: variable '" + name + "' listed twice");
    }
    idx.push_back(i);
    out_axes.push_back(axes_[i]);
  }
  std::size_t out_cells = 1;
  for (const auto& a : out_axes) out_cells *= a.size;
  std::vector<double> out(out_cells, 0.0);

  // Output stride of every input axis (0 for summed-out axes).
  const std::size_t rank = axes_.size();
  std::vector<std::size_t> out_stride(rank, 0);
  {
    std::size_t s = 1;
    for (std::size_t k = idx.size(); k-- > 0;) {
      out_stride[idx[k]] = s;
      s *= out_axes[k].size;
    }
  }
  std::vector<std::size_t> digit(rank, 0);
  std::size_t pos = 0;
  for (double m : mass_) {
    out[pos] += m;
    for (std::size_t a = rank; a-- > 0;) {
      pos += out_stride[a];
      if (++digit[a] < axes_[a].size) break;
      pos -= out_stride[a] * axes_[a].size;
      digit[a] = 0;
    }
  }
  JointPmf result;
  result.axes_ = std::move(out_axes);
  result.mass_ = std::move(out);
  return result;
}

double JointPmf::entropy(const VarSet& vars) const {
  if (vars.empty()) return 0.0;
  return plogp_sum(marginal(vars).mass_);
}

double entropy(const Pmf& p) { return plogp_sum(p.probs()); }

double entropy(std::span<const double> mass) { return plogp_sum(mass); }

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("binary_entropy: argument outside [0,1]");
  }
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double binary_entropy_inv(double h) {
  if (!(h >= 0.0 && h <= 1.0)) {
    throw DomainError("binary_entropy_inv: argument outside [0,1]");
  }
  if (h == 0.0) return 0.0;
  if (h == 1.0) return 0.5;
  double lo = 0.0;
  double hi = 0.5;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (binary_entropy(mid) < h) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(binary_entropy(lo) - h) <= std::abs(binary_entropy(hi) - h) ? lo : hi;
}

namespace {

void require_disjoint(const VarSet& a, const VarSet& b, const char* what) {
  for (const auto& x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end()) {
      throw UsageError(std::string(what) + ": variable '" + x + "' appears in both sets");
    }
  }
}

VarSet concat(const VarSet& a, const VarSet& b) {
  VarSet out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

double mutual_information(const JointPmf& j, const VarSet& a, const VarSet& b) {
  require_disjoint(a, b, "mutual_information");
  double mi = j.entropy(a) + j.entropy(b) - j.entropy(concat(a, b));
  return std::max(0.0, mi);
}

double conditional_entropy(const JointPmf& j, const VarSet& target, const VarSet& given) {
  require_disjoint(target, given, "conditional_entropy");
  double h = j.entropy(concat(target, given)) - j.entropy(given);
  return std::max(0.0, h);
}

double conditional_mutual_information(const JointPmf& j, const VarSet& a, const VarSet& b,
                                      const VarSet& c) {
  require_disjoint(a, b, "conditional_mutual_information");
  require_disjoint(a, c, "conditional_mutual_information");
  require_disjoint(b, c, "conditional_mutual_information");
  double v = j.entropy(concat(a, c)) + j.entropy(concat(b, c)) - j.entropy(concat(concat(a, b), c)) -
             j.entropy(c);
  return std::max(0.0, v);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace kls
