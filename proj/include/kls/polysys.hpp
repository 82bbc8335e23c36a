#pragma once

// Rate-constraint systems of the random-binning proofs, Fourier-Motzkin
// projection, and LP checks of redundancy and corner-point claims.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kls/lp.hpp"
#include "kls/regions.hpp"

namespace kls {

// lt/gt are kept for reporting; every computation uses the closure.
enum class RowSense { le, ge, lt, gt };

std::string to_string(RowSense s);
RowSense parse_row_sense(const std::string& s);

struct Inequality {
  std::string label;
  std::vector<double> coeffs;
  RowSense sense = RowSense::le;
  double rhs = 0.0;
};

class InequalitySystem {
 public:
  InequalitySystem() = default;
  explicit InequalitySystem(std::vector<std::string> variables);

  const std::vector<std::string>& variables() const { return variables_; }
  const std::vector<Inequality>& rows() const { return rows_; }
  std::size_t variable_index(const std::string& name) const;
  bool has_row(const std::string& label) const;
  const Inequality& row(const std::string& label) const;

  // Throws UsageError on a duplicate label or a wrong-length coefficient vector.
  void add(Inequality row);
  void add(const std::string& label, const std::vector<std::pair<std::string, double>>& terms,
           RowSense sense, double rhs);

  InequalitySystem without(const std::string& label) const;
  InequalitySystem with_rhs(const std::string& label, double rhs) const;
  // Every strict row replaced by its non-strict form.
  InequalitySystem closure() const;

  // Rows rewritten as A x <= b.
  void as_le(std::vector<std::vector<double>>& a, std::vector<double>& b) const;

 private:
  std::vector<std::string> variables_;
  std::vector<Inequality> rows_;
};

// Nonnegativity rows are labelled "nonneg:<var>".
InequalitySystem build_theorem1_osrb(const InfoRecord& rec, std::size_t j);
InequalitySystem build_theorem2_osrb(const InfoRecord& rec);
// The raw system after eliminating the public-randomness rates.
InequalitySystem build_theorem2_reduced(const InfoRecord& rec);
// Reduced system with the two key/cross-storage rows swapped for the
// corner-sum rows.
InequalitySystem build_theorem2_replaced(const InfoRecord& rec);
// Raw system with the two joint rows merged into one joint-secrecy row.
InequalitySystem build_theorem2_joint_secrecy(const InfoRecord& rec);

// Labels of the reduced rows that the symmetric analysis calls inactive.
std::vector<std::string> claimed_inactive_labels();

inline constexpr std::size_t kFmeRowCap = 20'000;

struct FmeOptions {
  double tol = 1e-9;
  // LP-based pruning after every elimination step.
  bool prune = true;
  std::size_t row_cap = kFmeRowCap;
};

// Eliminates `eliminate` and returns a system over the remaining variables in
// their original order. Row labels record their parents.
InequalitySystem fourier_motzkin(const InequalitySystem& sys, const std::vector<std::string>& eliminate,
                                 const FmeOptions& opt = {});

struct RedundancyCertificate {
  std::string label;
  bool redundant = false;
  bool unbounded = false;
  bool infeasible = false;
  // max of the target row's left side over the other rows (<= form).
  double optimum = 0.0;
  double rhs = 0.0;
  std::vector<std::string> active;
};

// Exact rational LP on the closure; redundant iff optimum <= rhs + tol.
RedundancyCertificate certify_redundancy(const InequalitySystem& sys, const std::string& label,
                                         double tol = 1e-9);

// True iff every row of `other` holds on the feasible set of `sys`.
bool implies(const InequalitySystem& sys, const InequalitySystem& other, double tol,
             std::vector<std::string>* failing = nullptr);

struct ProjectionReport {
  bool equal = false;
  std::size_t projected_rows = 0;
  // Rows of the reduced system not implied by the projection, and vice versa.
  std::vector<std::string> reduced_not_implied;
  std::vector<std::string> projected_not_implied;
  // Every reduced row bounded on the raw system with eliminated variables free.
  bool lifted_check = false;
  // Every vertex of the reduced system extends to a raw-feasible point.
  bool vertices_extend = false;
  InequalitySystem projected;
};

ProjectionReport project_and_compare_report(const InequalitySystem& raw,
                                            const std::vector<std::string>& eliminate,
                                            const InequalitySystem& reduced, double tol = 1e-9);
bool project_and_compare(const InequalitySystem& raw, const std::vector<std::string>& eliminate,
                         const InequalitySystem& reduced, double tol = 1e-9);

// Vertices of the closure; nullopt if the region is empty or unbounded.
std::optional<std::vector<Vertex>> system_vertices(const InequalitySystem& sys, double tol = 1e-9);
bool is_bounded(const InequalitySystem& sys);

// Feasible within tol, and the rows tight within tol have full rank.
bool is_vertex(const InequalitySystem& sys, const std::vector<double>& x, double tol = 1e-8);

// Two-enrollment GS corner in (Rs1, Rw1, Rs2, Rw2) order.
std::vector<double> reduced_corner(const InfoRecord& rec);

struct SymmetryCheck {
  bool symmetric = false;
  std::string reason;
};
SymmetryCheck check_symmetric_record(const InfoRecord& rec, double tol = 1e-9);

struct CornerReplacementReport {
  bool precondition_met = false;
  std::string precondition;
  bool bounded = false;
  bool vertex_sets_equal = false;
  bool corner_in_original = false;
  bool corner_in_replaced = false;
  std::size_t original_vertices = 0;
  std::size_t replaced_vertices = 0;
  std::vector<std::vector<double>> only_in_original;
  std::vector<std::vector<double>> only_in_replaced;

  bool corner_shared() const { return corner_in_original && corner_in_replaced; }
};

CornerReplacementReport verify_corner_replacement(const InfoRecord& rec, double tol = 1e-8);

struct JointSecrecyDiagnostic {
  double max_total_key = 0.0;        // with the merged joint-secrecy row
  double max_total_key_split = 0.0;  // with the two per-key joint rows
  bool positive_keys_feasible = false;
};
JointSecrecyDiagnostic joint_secrecy_diagnostic(const InfoRecord& rec, double tol = 1e-9);

// Every vertex of `reduced` extends to a feasible point of `raw` whose
// remaining coordinates are free.
bool vertices_extend(const InequalitySystem& raw, const InequalitySystem& reduced, double tol = 1e-9);

}  // namespace kls
