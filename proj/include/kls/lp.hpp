#pragma once

// Dense two-phase simplex (Bland's rule) over free variables, for the small
// rate-constraint systems. Instantiated for double and for exact rationals.

#include <cstddef>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace kls {

enum class LpStatus { optimal, infeasible, unbounded };

std::string to_string(LpStatus s);

template <class T>
struct LpResult {
  LpStatus status = LpStatus::infeasible;
  T value{};
  std::vector<T> x;
  // Rows with A_i x = b_i at the returned optimum.
  std::vector<std::size_t> active;
};

// maximize c.x subject to A x <= b, x unrestricted in sign.
template <class T>
LpResult<T> lp_maximize(const std::vector<std::vector<T>>& a, const std::vector<T>& b,
                        const std::vector<T>& c);

extern template LpResult<double> lp_maximize(const std::vector<std::vector<double>>&,
                                             const std::vector<double>&, const std::vector<double>&);
extern template LpResult<mpq_class> lp_maximize(const std::vector<std::vector<mpq_class>>&,
                                                const std::vector<mpq_class>&,
                                                const std::vector<mpq_class>&);

// Doubles converted exactly, solved over the rationals, converted back.
LpResult<double> lp_maximize_exact(const std::vector<std::vector<double>>& a,
                                   const std::vector<double>& b, const std::vector<double>& c);

struct Vertex {
  std::vector<double> x;
  std::vector<std::size_t> tight;
};

// All vertices of {x : A x <= b} by basis enumeration, deduplicated within tol.
// Rows within tol of equality count as tight.
std::vector<Vertex> enumerate_vertices(const std::vector<std::vector<double>>& a,
                                       const std::vector<double>& b, double tol = 1e-9);

// Rank of the given rows of A (partial-pivot elimination).
std::size_t row_rank(const std::vector<std::vector<double>>& a, const std::vector<std::size_t>& rows,
                     double tol = 1e-9);

}  // namespace kls
