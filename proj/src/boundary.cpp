#include "kls/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "kls/errors.hpp"
#include "kls/parallel.hpp"
#include "kls/regions.hpp"

namespace kls {

std::string to_string(EnrollmentMode m) { return m == EnrollmentMode::single ? "single" : "two"; }

EnrollmentMode parse_enrollment_mode(const std::string& s) {
  if (s == "single") return EnrollmentMode::single;
  if (s == "two") return EnrollmentMode::two;
  throw UsageError("unknown enrollment mode '" + s + "' (expected single|two)");
}

BscRates bsc_corner_rates(double q, double p_a) {
  const double qp = binary_convolution(q, p_a);
  const double qpp = binary_convolution(qp, p_a);
  const double h_qpp = binary_entropy(qpp);
  return {1.0 - h_qpp, std::max(0.0, h_qpp - binary_entropy(qp)),
          std::max(0.0, h_qpp - binary_entropy(q))};
}

double optimal_test_channel_crossover(double h_x_given_u, double p_a) {
  if (!(p_a >= 0.0 && p_a < 0.5)) throw DomainError("optimal_test_channel_crossover: p_A must be in [0, 0.5)");
  if (h_x_given_u > 1.0 + 1e-12) throw DomainError("optimal_test_channel_crossover: H(X|U) exceeds 1 bit");
  if (h_x_given_u < binary_entropy(p_a) - 1e-12) {
    std::ostringstream os;
    os << "optimal_test_channel_crossover: H(X|U) = " << h_x_given_u << " is below H_b(p_A) = "
       << binary_entropy(p_a);
    throw DomainError(os.str());
  }
  const double t = binary_entropy_inv(std::clamp(h_x_given_u, 0.0, 1.0));
  return std::clamp((t - p_a) / (1.0 - 2.0 * p_a), 0.0, 0.5);
}

double spec_crossover(const SweepSpec& spec) {
  if (spec.p_a.has_value() == spec.snr_db.has_value()) {
    throw UsageError("sweep: exactly one of p_A and snr_db must be given");
  }
  const double p = spec.p_a ? *spec.p_a : awgn_to_bsc(*spec.snr_db);
  if (!(p >= 0.0 && p <= 0.5)) throw DomainError("sweep: p_A must lie in [0, 0.5]");
  return p;
}

std::vector<double> crossover_grid(const SweepSpec& spec) {
  if (!spec.crossovers.empty()) {
    for (double q : spec.crossovers) {
      if (!(q >= 0.0 && q <= 0.5)) throw DomainError("sweep: crossover grid must lie in [0, 0.5]");
    }
    if (spec.crossovers.size() > kMaxSweepGrid) throw ResourceError("sweep: grid exceeds cap");
    return spec.crossovers;
  }
  if (spec.grid < 2) throw UsageError("sweep: grid count must be >= 2");
  if (spec.grid > kMaxSweepGrid) {
    std::ostringstream os;
    os << "sweep: grid count " << spec.grid << " exceeds cap " << kMaxSweepGrid;
    throw ResourceError(os.str());
  }
  std::vector<double> q(spec.grid);
  for (std::size_t i = 0; i < spec.grid; ++i) {
    q[i] = 0.5 * static_cast<double>(i) / static_cast<double>(spec.grid - 1);
  }
  return q;
}

namespace {

double key_inverse(double key, double p_a) {
  // 1 - H_b(q * p * p) = key, solved in closed form through H_b^{-1}.
  const double pp = binary_convolution(p_a, p_a);
  if (pp >= 0.5) return 0.5;
  const double t = binary_entropy_inv(std::clamp(1.0 - key, 0.0, 1.0));
  return std::clamp((t - pp) / (1.0 - 2.0 * pp), 0.0, 0.5);
}

double leakage_inverse(double leak, double p_a) {
  double lo = 0.0, hi = 0.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bsc_corner_rates(mid, p_a).leakage > leak) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

enum class Target { key, leakage };

// Fixes the summed `target` quantity and optimizes the other one over (q1, q2).
PairOptimum optimize_pair(double p_a, double total, Target target, std::size_t grid) {
  auto target_of = [&](double q) {
    auto r = bsc_corner_rates(q, p_a);
    return target == Target::key ? r.key : r.leakage;
  };
  auto inverse = [&](double v) {
    return target == Target::key ? key_inverse(v, p_a) : leakage_inverse(v, p_a);
  };
  // Objective in "smaller is better" form.
  auto objective = [&](double q1, double q2) {
    auto a = bsc_corner_rates(q1, p_a), b = bsc_corner_rates(q2, p_a);
    return target == Target::key ? a.leakage + b.leakage : -(a.key + b.key);
  };
  const double top = target_of(0.0);
  PairOptimum out;
  if (total > 2.0 * top + 1e-12 || total < 0.0) return out;
  if (total >= 2.0 * top) {
    out = {objective(0.0, 0.0), 0.0, 0.0, true};
  } else {
    // q1 ranges where both enrollments can carry their share.
    const double q_lo = total >= top ? 0.0 : inverse(total);
    const double q_hi = total - top <= 0.0 ? 0.5 : inverse(total - top);
    auto partner = [&](double q1) { return inverse(std::clamp(total - target_of(q1), 0.0, top)); };
    auto f = [&](double q1) { return objective(q1, partner(q1)); };

    const std::size_t n = std::max<std::size_t>(grid, 3);
    std::vector<double> qs(n);
    for (std::size_t i = 0; i < n; ++i) qs[i] = q_lo + (q_hi - q_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    auto vals = parallel_map(n, [&](std::size_t i) { return f(qs[i]); });
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      const double d_new = std::abs(qs[i] - partner(qs[i]));
      const double d_old = std::abs(qs[best] - partner(qs[best]));
      if (vals[i] < vals[best] - 1e-15 || (std::abs(vals[i] - vals[best]) <= 1e-15 && d_new < d_old)) best = i;
    }
    // Golden-section refinement on the bracketing grid cells.
    double a = qs[best == 0 ? 0 : best - 1], b = qs[std::min(n - 1, best + 1)];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > kCrossoverTol) {
      if (fc < fd) { b = d; d = c; fd = fc; c = b - g * (b - a); fc = f(c); }
      else { a = c; c = d; fc = fd; d = a + g * (b - a); fd = f(d); }
    }
    double q1 = 0.5 * (a + b);
    double v = f(q1);
    if (vals[best] < v) { q1 = qs[best]; v = vals[best]; }
    out = {v, q1, partner(q1), true};
    // Prefer the symmetric pair when it is as good.
    const double qs_sym = inverse(0.5 * total);
    const double v_sym = objective(qs_sym, qs_sym);
    if (v_sym <= out.value + 1e-12) out = {v_sym, qs_sym, qs_sym, true};
  }
  if (target == Target::leakage) out.value = -out.value;
  return out;
}

}  // namespace

PairOptimum min_leakage_at_key(double p_a, double total_key, std::size_t grid) {
  return optimize_pair(p_a, total_key, Target::key, grid);
}

PairOptimum max_key_at_leakage(double p_a, double total_leakage, std::size_t grid) {
  return optimize_pair(p_a, total_leakage, Target::leakage, grid);
}

std::vector<CurvePoint> sweep_boundary(const SweepSpec& spec) {
  if (spec.family == CurveFamily::general_grid) {
    throw UsageError("sweep_boundary: the general-grid family needs an entity system (use sweep_general_grid)");
  }
  const double p = spec_crossover(spec);
  const auto qs = crossover_grid(spec);
  const double m = spec.mode == EnrollmentMode::two ? 2.0 : 1.0;
  auto pts = parallel_map(qs.size(), [&](std::size_t i) {
    const auto r = bsc_corner_rates(qs[i], p);
    CurvePoint c{m * r.key, m * r.leakage, m * r.storage, qs[i]};
    if (spec.mode == EnrollmentMode::two && spec.asymmetric) {
      const auto opt = min_leakage_at_key(p, c.key_rate_total, 201);
      if (opt.feasible && opt.value < c.privacy_leakage_rate) {
        c.privacy_leakage_rate = opt.value;
        c.storage_rate_total = bsc_corner_rates(opt.q1, p).storage + bsc_corner_rates(opt.q2, p).storage;
      }
    }
    return c;
  });
  std::stable_sort(pts.begin(), pts.end(),
                   [](const CurvePoint& a, const CurvePoint& b) { return a.key_rate_total < b.key_rate_total; });
  return pts;
}

std::vector<CurvePoint> sweep_general_grid(const EntitySystem& sys, std::size_t j,
                                           std::size_t grid_resolution,
                                           std::size_t aux_cardinality) {
  const std::size_t nxt = sys.entity(j).measurement_size();
  if (aux_cardinality == 0) aux_cardinality = nxt + 1;
  const auto rows = simplex_grid(aux_cardinality, grid_resolution);
  const double total = std::pow(static_cast<double>(rows.size()), static_cast<double>(nxt));
  if (total > static_cast<double>(kMaxLnGridPoints)) throw ResourceError("sweep_general_grid: grid exceeds cap");
  const std::size_t count = static_cast<std::size_t>(total);
  const EntitySystem single(sys.source(), {sys.entity(j)});
  auto pts = parallel_map(count, [&](std::size_t idx) {
    std::vector<std::vector<double>> aux(nxt);
    for (std::size_t a = nxt; a-- > 0;) {
      aux[a] = rows[idx % rows.size()];
      idx /= rows.size();
    }
    const AuxiliaryChannel ch{ConditionalPmf(aux)};
    const auto rec = info_record(single, std::span<const AuxiliaryChannel>(&ch, 1));
    const auto& e = rec.at(0);
    return CurvePoint{e.i_u_y, std::max(0.0, e.i_u_x - e.i_u_y), std::max(0.0, e.i_u_xt - e.i_u_y), 0.0};
  });
  std::sort(pts.begin(), pts.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return a.key_rate_total != b.key_rate_total ? a.key_rate_total > b.key_rate_total
                                                : a.privacy_leakage_rate < b.privacy_leakage_rate;
  });
  // Keep points not dominated by a higher-key point with lower leakage.
  std::vector<CurvePoint> front;
  double best_leak = std::numeric_limits<double>::infinity();
  for (const auto& c : pts) {
    if (c.privacy_leakage_rate < best_leak - 1e-12) {
      front.push_back(c);
      best_leak = c.privacy_leakage_rate;
    }
  }
  std::reverse(front.begin(), front.end());
  return front;
}

namespace {

double mode_scale(EnrollmentMode m) { return m == EnrollmentMode::two ? 2.0 : 1.0; }

double curve_min_leakage(const CurveParam& c, double key, std::size_t grid) {
  if (c.mode == EnrollmentMode::two) {
    auto opt = min_leakage_at_key(c.p_a, key, grid);
    return opt.feasible ? opt.value : std::numeric_limits<double>::quiet_NaN();
  }
  if (key > bsc_corner_rates(0.0, c.p_a).key + 1e-12) return std::numeric_limits<double>::quiet_NaN();
  return bsc_corner_rates(key_inverse(key, c.p_a), c.p_a).leakage;
}

double curve_max_key(const CurveParam& c, double leak, std::size_t grid) {
  if (c.mode == EnrollmentMode::two) return max_key_at_leakage(c.p_a, leak, grid).value;
  const auto top = bsc_corner_rates(0.0, c.p_a);
  if (leak >= top.leakage) return top.key;
  return bsc_corner_rates(leakage_inverse(leak, c.p_a), c.p_a).key;
}

double slope_limit(double p_a) {
  const double b2 = (1.0 - 2.0 * p_a) * (1.0 - 2.0 * p_a);
  return b2 / (1.0 - b2);
}

}  // namespace

Comparison compare_curves(const CurveParam& reference, const CurveParam& candidate,
                          std::size_t grid) {
  Comparison out;
  out.reference = reference;
  out.candidate = candidate;
  SweepSpec spec;
  spec.grid = grid;
  spec.p_a = reference.p_a;
  spec.mode = reference.mode;
  out.reference_curve = sweep_boundary(spec);
  spec.p_a = candidate.p_a;
  spec.mode = candidate.mode;
  out.candidate_curve = sweep_boundary(spec);

  const auto corner = bsc_corner_rates(0.0, reference.p_a);
  out.reference_key = mode_scale(reference.mode) * corner.key;
  out.reference_leakage = mode_scale(reference.mode) * corner.leakage;

  out.candidate_leakage_at_key = curve_min_leakage(candidate, out.reference_key, grid);
  out.leakage_reduction = out.reference_leakage > 0.0
                              ? 1.0 - out.candidate_leakage_at_key / out.reference_leakage
                              : 0.0;
  out.candidate_key_at_leakage = curve_max_key(candidate, out.reference_leakage, grid);
  out.corner_key_gain = out.candidate_key_at_leakage > 0.0
                            ? out.reference_key / out.candidate_key_at_leakage - 1.0
                            : std::numeric_limits<double>::quiet_NaN();
  out.limiting_slope_gain = slope_limit(reference.p_a) / slope_limit(candidate.p_a) - 1.0;

  const CurvePoint* low = nullptr;
  for (const auto& c : out.reference_curve) {
    if (c.privacy_leakage_rate > 0.0 && (!low || c.privacy_leakage_rate < low->privacy_leakage_rate)) low = &c;
  }
  if (low) {
    const double k = curve_max_key(candidate, low->privacy_leakage_rate, grid);
    out.raw_grid_gain = k > 0.0 ? low->key_rate_total / k - 1.0 : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

Comparison compare_single_vs_two(double p_a, std::size_t grid) {
  return compare_curves({EnrollmentMode::single, p_a}, {EnrollmentMode::two, p_a}, grid);
}

double doubled_power_crossover(double snr_db) {
  return q_function(std::sqrt(2.0 * std::pow(10.0, snr_db / 10.0)));
}

Comparison compare_single_vs_two_snr(double snr_db, std::size_t grid) {
  return compare_curves({EnrollmentMode::single, doubled_power_crossover(snr_db)},
                        {EnrollmentMode::two, awgn_to_bsc(snr_db)}, grid);
}

std::string curve_file_name(EnrollmentMode mode, const std::string& param) {
  return "curve_" + to_string(mode) + "_" + param + ".csv";
}

void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& points,
                     EnrollmentMode mode) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f.precision(12);
  f << "q,key_rate,leakage_rate,storage_rate,mode\n";
  for (const auto& c : points) {
    f << c.test_channel_crossover << ',' << c.key_rate_total << ',' << c.privacy_leakage_rate << ','
      << c.storage_rate_total << ',' << to_string(mode) << '\n';
  }
  if (!f) throw UsageError("failed writing '" + path + "'");
}

std::vector<CurvePoint> read_curve_csv(const std::string& path, EnrollmentMode* mode) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(f, line) || line != "q,key_rate,leakage_rate,storage_rate,mode") {
    throw UsageError("'" + path + "': unexpected curve CSV header");
  }
  std::vector<CurvePoint> out;
  std::optional<EnrollmentMode> seen;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 5) throw UsageError("'" + path + "': row '" + line + "' needs 5 columns");
    CurvePoint c;
    try {
      c.test_channel_crossover = std::stod(cells[0]);
      c.key_rate_total = std::stod(cells[1]);
      c.privacy_leakage_rate = std::stod(cells[2]);
      c.storage_rate_total = std::stod(cells[3]);
    } catch (const std::exception&) {
      throw UsageError("'" + path + "': non-numeric cell in row '" + line + "'");
    }
    const auto m = parse_enrollment_mode(cells[4]);
    if (seen && *seen != m) throw UsageError("'" + path + "': mixed mode column");
    seen = m;
    out.push_back(c);
  }
  if (mode && seen) *mode = *seen;
  return out;
}

}  // namespace kls
