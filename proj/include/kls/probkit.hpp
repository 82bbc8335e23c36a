#pragma once

// Finite-alphabet probability and information measures. All quantities are in
// bits; 0 log 0 is taken as 0.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kls {

inline constexpr double kProbTolerance = 1e-12;
inline constexpr double kZeroMass = 1e-15;
inline constexpr double kMaxJointCells = 1e7;

class Pmf {
 public:
  Pmf() = default;
  // Throws DistributionError unless entries are >= 0 and sum to 1 within 1e-12.
  explicit Pmf(std::vector<double> probs);

  static Pmf uniform(std::size_t n);
  static Pmf point_mass(std::size_t n, std::size_t at);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// Row-stochastic matrix P(out | in).
class ConditionalPmf {
 public:
  ConditionalPmf() = default;
  explicit ConditionalPmf(std::vector<Pmf> rows);
  explicit ConditionalPmf(const std::vector<std::vector<double>>& rows);

  static ConditionalPmf identity(std::size_t n);

  std::size_t input_size() const { return rows_.size(); }
  std::size_t output_size() const { return rows_.empty() ? 0 : rows_.front().size(); }
  const Pmf& row(std::size_t in) const { return rows_[in]; }
  double operator()(std::size_t in, std::size_t out) const { return rows_[in][out]; }
  std::vector<std::vector<double>> table() const;

 private:
  std::vector<Pmf> rows_;
};

using VarSet = std::vector<std::string>;

// Dense joint distribution over named finite variables. The last axis varies
// fastest in the flat mass array.
class JointPmf {
 public:
  struct Axis {
    std::string name;
    std::size_t size = 0;
  };

  JointPmf() = default;
  JointPmf(std::vector<Axis> axes, std::vector<double> mass);

  const std::vector<Axis>& axes() const { return axes_; }
  std::span<const double> mass() const { return mass_; }
  std::size_t axis_index(const std::string& name) const;
  bool has_axis(const std::string& name) const;

  // Marginal over `keep`, axes ordered as listed.
  JointPmf marginal(const VarSet& keep) const;
  // Joint entropy H(vars); an empty set has entropy 0.
  double entropy(const VarSet& vars) const;

 private:
  std::vector<Axis> axes_;
  std::vector<double> mass_;
};

// Multiplies alphabet sizes, throwing ResourceError past kMaxJointCells.
std::size_t checked_cell_count(std::span<const std::size_t> sizes);

double entropy(const Pmf& p);
double entropy(std::span<const double> mass);
double binary_entropy(double p);
// Inverse of binary_entropy with range [0, 0.5], by bisection.
double binary_entropy_inv(double h);
double mutual_information(const JointPmf& j, const VarSet& a, const VarSet& b);
double conditional_entropy(const JointPmf& j, const VarSet& target, const VarSet& given);
// I(A;B|C).
double conditional_mutual_information(const JointPmf& j, const VarSet& a, const VarSet& b,
                                      const VarSet& c);
// Standard normal tail probability.
double q_function(double x);

// a(1-b) + b(1-a): crossover of two cascaded BSCs.
inline double binary_convolution(double a, double b) { return a * (1.0 - b) + b * (1.0 - a); }

}  // namespace kls
