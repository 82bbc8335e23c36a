#include "kls/lp.hpp"

#include <algorithm>
#include <cmath>

#include "kls/errors.hpp"

namespace kls {

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

template <class T>
struct Num;

template <>
struct Num<double> {
  static bool pos(double v) { return v > 1e-11; }
  static bool nonzero(double v) { return std::abs(v) > 1e-11; }
  static bool equal(double lhs, double rhs) { return std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(rhs)); }
};

template <>
struct Num<mpq_class> {
  static bool pos(const mpq_class& v) { return sgn(v) > 0; }
  static bool nonzero(const mpq_class& v) { return sgn(v) != 0; }
  static bool equal(const mpq_class& lhs, const mpq_class& rhs) { return lhs == rhs; }
};

template <class T>
class Tableau {
 public:
  Tableau(std::size_t m, std::size_t cols) : tab_(m, std::vector<T>(cols, T(0))), rhs_(m, T(0)), basis_(m, 0) {}

  std::vector<std::vector<T>> tab_;
  std::vector<T> rhs_;
  std::vector<std::size_t> basis_;

  void pivot(std::size_t r, std::size_t col) {
    const T p = tab_[r][col];
    for (auto& v : tab_[r]) v /= p;
    rhs_[r] /= p;
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      if (i == r || !Num<T>::nonzero(tab_[i][col])) continue;
      const T f = tab_[i][col];
      for (std::size_t k = 0; k < tab_[i].size(); ++k) tab_[i][k] -= f * tab_[r][k];
      rhs_[i] -= f * rhs_[r];
    }
    basis_[r] = col;
  }

  // Returns false when unbounded. Columns >= allowed never enter.
  bool run(const std::vector<T>& cost, std::size_t allowed) {
    const std::size_t m = tab_.size();
    for (;;) {
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed; ++j) {
        T d = cost[j];
        for (std::size_t i = 0; i < m; ++i) d -= cost[basis_[i]] * tab_[i][j];
        if (Num<T>::pos(d)) {
          enter = j;
          break;
        }
      }
      if (enter == allowed) return true;
      std::size_t leave = m;
      T best{};
      for (std::size_t i = 0; i < m; ++i) {
        if (!Num<T>::pos(tab_[i][enter])) continue;
        T ratio = rhs_[i] / tab_[i][enter];
        if (leave == m || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

template <class T>
LpResult<T> lp_maximize(const std::vector<std::vector<T>>& a, const std::vector<T>& b,
                        const std::vector<T>& c) {
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  if (b.size() != m) throw UsageError("lp_maximize: row count mismatch");
  for (const auto& row : a) {
    if (row.size() != n) throw UsageError("lp_maximize: ragged constraint matrix");
  }
  // Columns: x+ (n), x- (n), slacks (m), artificials (one per negative-rhs row).
  std::size_t n_art = 0;
  for (const auto& v : b) n_art += v < T(0) ? 1 : 0;
  const std::size_t s0 = 2 * n, a0 = s0 + m, cols = a0 + n_art;
  Tableau<T> t(m, cols);
  std::size_t next_art = a0;
  for (std::size_t i = 0; i < m; ++i) {
    const bool flip = b[i] < T(0);
    const T sign = flip ? T(-1) : T(1);
    for (std::size_t k = 0; k < n; ++k) {
      t.tab_[i][k] = sign * a[i][k];
      t.tab_[i][n + k] = -sign * a[i][k];
    }
    t.tab_[i][s0 + i] = sign;
    t.rhs_[i] = sign * b[i];
    if (flip) {
      t.tab_[i][next_art] = T(1);
      t.basis_[i] = next_art++;
    } else {
      t.basis_[i] = s0 + i;
    }
  }

  LpResult<T> out;
  if (n_art > 0) {
    std::vector<T> cost(cols, T(0));
    for (std::size_t k = a0; k < cols; ++k) cost[k] = T(-1);
    t.run(cost, cols);
    T infeas(0);
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis_[i] >= a0) infeas += t.rhs_[i];
    }
    if (Num<T>::pos(infeas)) {
      out.status = LpStatus::infeasible;
      return out;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (t.basis_[i] < a0) continue;
      for (std::size_t k = 0; k < a0; ++k) {
        if (Num<T>::nonzero(t.tab_[i][k])) {
          t.pivot(i, k);
          break;
        }
      }
    }
  }
  std::vector<T> cost(cols, T(0));
  for (std::size_t k = 0; k < n; ++k) {
    cost[k] = c[k];
    cost[n + k] = -c[k];
  }
  if (!t.run(cost, a0)) {
    out.status = LpStatus::unbounded;
    return out;
  }
  std::vector<T> val(cols, T(0));
  for (std::size_t i = 0; i < m; ++i) val[t.basis_[i]] = t.rhs_[i];
  out.status = LpStatus::optimal;
  out.x.assign(n, T(0));
  out.value = T(0);
  for (std::size_t k = 0; k < n; ++k) {
    out.x[k] = val[k] - val[n + k];
    out.value += c[k] * out.x[k];
  }
  for (std::size_t i = 0; i < m; ++i) {
    T lhs(0);
    for (std::size_t k = 0; k < n; ++k) lhs += a[i][k] * out.x[k];
    if (Num<T>::equal(lhs, b[i])) out.active.push_back(i);
  }
  return out;
}

template LpResult<double> lp_maximize(const std::vector<std::vector<double>>&,
                                      const std::vector<double>&, const std::vector<double>&);
template LpResult<mpq_class> lp_maximize(const std::vector<std::vector<mpq_class>>&,
                                         const std::vector<mpq_class>&,
                                         const std::vector<mpq_class>&);

LpResult<double> lp_maximize_exact(const std::vector<std::vector<double>>& a,
                                   const std::vector<double>& b, const std::vector<double>& c) {
  std::vector<std::vector<mpq_class>> qa(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) qa[i].assign(a[i].begin(), a[i].end());
  std::vector<mpq_class> qb(b.begin(), b.end()), qc(c.begin(), c.end());
  const auto r = lp_maximize(qa, qb, qc);
  LpResult<double> out;
  out.status = r.status;
  out.value = r.value.get_d();
  for (const auto& v : r.x) out.x.push_back(v.get_d());
  out.active = r.active;
  return out;
}

namespace {

// Solves the square system formed by `rows`; false if singular.
bool solve_rows(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                const std::vector<std::size_t>& rows, std::vector<double>& x) {
  const std::size_t n = rows.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) m[i][k] = a[rows[i]][k];
    m[i][n] = b[rows[i]];
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i) {
      if (std::abs(m[i][col]) > std::abs(m[piv][col])) piv = i;
    }
    if (std::abs(m[piv][col]) < 1e-12) return false;
    std::swap(m[piv], m[col]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      const double f = m[i][col] / m[col][col];
      for (std::size_t k = col; k <= n; ++k) m[i][k] -= f * m[col][k];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
  return true;
}

}  // namespace

std::vector<Vertex> enumerate_vertices(const std::vector<std::vector<double>>& a,
                                       const std::vector<double>& b, double tol) {
  const std::size_t m = a.size();
  const std::size_t n = a.empty() ? 0 : a.front().size();
  std::vector<Vertex> out;
  if (n == 0 || m < n) return out;
  std::vector<bool> pick(m, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n), true);
  std::vector<double> x;
  do {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < m; ++i) {
      if (pick[i]) rows.push_back(i);
    }
    if (!solve_rows(a, b, rows, x)) continue;
    Vertex v{x, {}};
    bool feasible = true;
    for (std::size_t i = 0; i < m && feasible; ++i) {
      double lhs = 0.0;
      for (std::size_t k = 0; k < n; ++k) lhs += a[i][k] * x[k];
      if (lhs > b[i] + tol) feasible = false;
      else if (lhs >= b[i] - tol) v.tight.push_back(i);
    }
    if (!feasible) continue;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Vertex& w) {
      for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(w.x[k] - x[k]) > tol) return false;
      }
      return true;
    });
    if (!seen) out.push_back(std::move(v));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

std::size_t row_rank(const std::vector<std::vector<double>>& a, const std::vector<std::size_t>& rows,
                     double tol) {
  if (rows.empty()) return 0;
  std::vector<std::vector<double>> m;
  for (auto r : rows) m.push_back(a.at(r));
  const std::size_t n = m.front().size();
  std::size_t rank = 0;
  for (std::size_t col = 0; col < n && rank < m.size(); ++col) {
    std::size_t piv = rank;
    for (std::size_t i = rank + 1; i < m.size(); ++i) {
      if (std::abs(m[i][col]) > std::abs(m[piv][col])) piv = i;
    }
    if (std::abs(m[piv][col]) <= tol) continue;
    std::swap(m[piv], m[rank]);
    for (std::size_t i = rank + 1; i < m.size(); ++i) {
      const double f = m[i][col] / m[rank][col];
      for (std::size_t k = col; k < n; ++k) m[i][k] -= f * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

}  // namespace kls
