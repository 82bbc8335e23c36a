#include "kls/binning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "kls/errors.hpp"
#include "kls/parallel.hpp"

namespace kls {

std::size_t bin_count(std::size_t n, double rate) {
  const double v = std::floor(std::exp2(static_cast<double>(n) * rate) + 1e-9);
  if (v > 9.0e15) throw ResourceError("bin count overflows");
  return std::max<std::size_t>(1, static_cast<std::size_t>(v));
}

BinSizes bin_sizes(std::size_t n, const BinRates& r) {
  return {bin_count(n, r.rs), bin_count(n, r.rw), bin_count(n, r.rc)};
}

namespace {

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) {
    if (r > kMaxBinningCells * 16 / std::max<std::size_t>(b, 1)) return kMaxBinningCells * 16;
    r *= b;
  }
  return r;
}

// Extends a rows x cols array by one symbol on each axis:
// out[(r*tr + a)][(c*tc + b)] = in[r][c] * t[a][b].
std::vector<double> kron2(const std::vector<double>& in, std::size_t rows, std::size_t cols,
                          const std::vector<std::vector<double>>& t) {
  const std::size_t tr = t.size(), tc = t.front().size();
  std::vector<double> out(in.size() * tr * tc);
  const std::size_t ncols = cols * tc;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t a = 0; a < tr; ++a)
      for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t b = 0; b < tc; ++b)
          out[(r * tr + a) * ncols + c * tc + b] = in[r * cols + c] * t[a][b];
  return out;
}

std::vector<double> kron_power(const std::vector<std::vector<double>>& t, std::size_t n) {
  std::vector<double> v{1.0};
  std::size_t rows = 1, cols = 1;
  for (std::size_t i = 0; i < n; ++i) {
    v = kron2(v, rows, cols, t);
    rows *= t.size();
    cols *= t.front().size();
  }
  return v;
}

double mi_from(const std::vector<double>& joint, std::size_t rows, std::size_t cols) {
  std::vector<double> pr(rows, 0.0), pc(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      pr[r] += joint[r * cols + c];
      pc[c] += joint[r * cols + c];
    }
  return std::max(0.0, entropy(pr) + entropy(pc) - entropy(joint));
}

// Per-entity enumerated law: P(u^n, y^n) and P(x^n, u^n).
struct EntityTables {
  std::size_t nu = 0, ny = 0, nx = 0;
  std::vector<double> p_uy;  // [u * ny + y]
  std::vector<double> p_xu;  // [x * nu + u]
};

EntityTables entity_tables(const EntitySystem& sys, std::size_t j, std::size_t n) {
  const auto& bc = sys.entity(j);
  const std::size_t A = bc.measurement_size(), Y = bc.decoder_size(), X = bc.source_size();
  EntityTables t;
  t.nu = ipow(A, n);
  t.ny = ipow(Y, n);
  t.nx = ipow(X, n);
  const double cells_uy = static_cast<double>(t.nu) * static_cast<double>(t.ny);
  const double cells_xu = static_cast<double>(t.nu) * static_cast<double>(t.nx);
  if (cells_uy > static_cast<double>(kMaxBinningCells) || cells_xu > static_cast<double>(kMaxBinningCells)) {
    std::ostringstream os;
    os << "binning: n = " << n << " needs " << std::max(cells_uy, cells_xu) << " joint cells, cap is "
       << kMaxBinningCells;
    throw ResourceError(os.str());
  }
  std::vector<std::vector<double>> ay(A, std::vector<double>(Y, 0.0)), xa(X, std::vector<double>(A, 0.0));
  for (std::size_t x = 0; x < X; ++x)
    for (std::size_t a = 0; a < A; ++a)
      for (std::size_t y = 0; y < Y; ++y) {
        const double m = sys.source()[x] * bc(x, a, y);
        ay[a][y] += m;
        xa[x][a] += m;
      }
  t.p_uy = kron_power(ay, n);
  t.p_xu = kron_power(xa, n);
  return t;
}

struct BinMap {
  BinSizes sizes;
  std::vector<std::size_t> s;  // key index per u
  std::vector<std::size_t> b;  // w * |C| + c per u

  std::size_t helper_bins() const { return sizes.w * sizes.c; }
};

BinMap draw_bins(std::size_t nu, const BinSizes& sz, bool injective, std::uint64_t seed,
                 std::size_t trial, std::size_t entity) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(entity)};
  std::mt19937_64 rng(seq);
  BinMap m{sz, std::vector<std::size_t>(nu), std::vector<std::size_t>(nu)};
  const std::size_t nb = m.helper_bins();
  if (injective) {
    std::vector<std::size_t> perm(nu);
    for (std::size_t i = 0; i < nu; ++i) perm[i] = i;
    for (std::size_t i = nu; i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
    for (std::size_t u = 0; u < nu; ++u) {
      m.s[u] = perm[u] / nb;
      m.b[u] = perm[u] % nb;
    }
  } else {
    for (std::size_t u = 0; u < nu; ++u) {
      m.s[u] = rng() % sz.s;
      const std::size_t w = rng() % sz.w;
      const std::size_t c = rng() % sz.c;
      m.b[u] = w * sz.c + c;
    }
  }
  return m;
}

// MAP estimate of u within the observed helper bin for each (bin, y); ties go
// to the smallest u. Returns best[y * nb + bin].
std::vector<std::size_t> map_decoder(const EntityTables& t, const BinMap& m) {
  const std::size_t nb = m.helper_bins();
  std::vector<std::size_t> best(t.ny * nb, 0);
  std::vector<double> val(nb);
  for (std::size_t y = 0; y < t.ny; ++y) {
    std::fill(val.begin(), val.end(), -1.0);
    for (std::size_t u = 0; u < t.nu; ++u) {
      const double v = t.p_uy[u * t.ny + y];
      if (v > val[m.b[u]]) {
        val[m.b[u]] = v;
        best[y * nb + m.b[u]] = u;
      }
    }
  }
  return best;
}

double decode_error(const EntityTables& t, const BinMap& m, const std::vector<std::size_t>& best) {
  const std::size_t nb = m.helper_bins();
  double err = 0.0;
  for (std::size_t u = 0; u < t.nu; ++u)
    for (std::size_t y = 0; y < t.ny; ++y) {
      if (m.s[best[y * nb + m.b[u]]] != m.s[u]) err += t.p_uy[u * t.ny + y];
    }
  return std::min(1.0, err);
}

struct TrialEntity {
  double error = 0.0, key_rate = 0.0, secrecy = 0.0, privacy_rate = 0.0, helper_x = 0.0;
  std::vector<double> p_b_given_x;  // [x * nb + b], P(b | x^n)
  std::vector<double> p_w_given_x;  // [x * nw + w]
};

TrialEntity evaluate(const EntityTables& t, const BinMap& m, std::size_t n, const std::vector<double>& px) {
  TrialEntity r;
  const std::size_t nb = m.helper_bins(), ns = m.sizes.s, nw = m.sizes.w, nc = m.sizes.c;
  r.error = decode_error(t, m, map_decoder(t, m));

  std::vector<double> p_sb(ns * nb, 0.0), p_s(ns, 0.0);
  std::vector<double> p_xb(t.nx * nb, 0.0), p_xw(t.nx * nw, 0.0);
  for (std::size_t x = 0; x < t.nx; ++x)
    for (std::size_t u = 0; u < t.nu; ++u) {
      const double v = t.p_xu[x * t.nu + u];
      if (v == 0.0) continue;
      p_sb[m.s[u] * nb + m.b[u]] += v;
      p_xb[x * nb + m.b[u]] += v;
      p_xw[x * nw + m.b[u] / nc] += v;
    }
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t b = 0; b < nb; ++b) p_s[s] += p_sb[s * nb + b];
  const double dn = static_cast<double>(n);
  r.key_rate = entropy(p_s) / dn;
  r.secrecy = mi_from(p_sb, ns, nb);
  r.privacy_rate = mi_from(p_xb, t.nx, nb) / dn;
  r.helper_x = mi_from(p_xw, t.nx, nw);
  r.p_b_given_x = std::move(p_xb);
  r.p_w_given_x = std::move(p_xw);
  for (std::size_t x = 0; x < t.nx; ++x) {
    if (px[x] <= 0.0) continue;
    for (std::size_t b = 0; b < nb; ++b) r.p_b_given_x[x * nb + b] /= px[x];
    for (std::size_t w = 0; w < nw; ++w) r.p_w_given_x[x * nw + w] /= px[x];
  }
  return r;
}

// I(X^n; A, B) and I(A; B) for A, B conditionally independent given X^n.
std::pair<double, double> pair_information(const std::vector<double>& px, const std::vector<double>& pa,
                                           std::size_t na, const std::vector<double>& pb, std::size_t nb) {
  std::vector<double> joint(na * nb, 0.0);
  double h_cond = 0.0;
  for (std::size_t x = 0; x < px.size(); ++x) {
    if (px[x] <= 0.0) continue;
    std::span<const double> ra(pa.data() + x * na, na), rb(pb.data() + x * nb, nb);
    h_cond += px[x] * (entropy(ra) + entropy(rb));
    for (std::size_t a = 0; a < na; ++a) {
      if (ra[a] == 0.0) continue;
      for (std::size_t b = 0; b < nb; ++b) joint[a * nb + b] += px[x] * ra[a] * rb[b];
    }
  }
  return {std::max(0.0, entropy(joint) - h_cond), mi_from(joint, na, nb)};
}

Stat aggregate(const std::vector<double>& v) {
  Stat s;
  if (v.empty()) return s;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stderr_mean = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return s;
}

void validate(const EntitySystem& sys, const BinningConfig& cfg) {
  if (cfg.n < 1) throw UsageError("binning: n must be >= 1");
  if (cfg.n > cfg.max_n) {
    std::ostringstream os;
    os << "binning: n = " << cfg.n << " exceeds the blocklength cap " << cfg.max_n;
    throw ResourceError(os.str());
  }
  if (cfg.trials < 1) throw UsageError("binning: trials must be >= 1");
  if (cfg.trials > cfg.max_trials) {
    std::ostringstream os;
    os << "binning: " << cfg.trials << " trials exceed the cap " << cfg.max_trials;
    throw ResourceError(os.str());
  }
  if (cfg.rates.size() != sys.entity_count()) throw UsageError("binning: one rate triple per entity is required");
  if (sys.entity_count() > 2) throw UsageError("binning: at most two entities are supported");
  for (const auto& r : cfg.rates) {
    for (double v : {r.rs, r.rw, r.rc}) {
      if (!std::isfinite(v) || v < 0.0) throw DomainError("binning: rates must be nonnegative and finite");
    }
  }
}

BinSizes checked_sizes(std::size_t n, const BinRates& r, std::size_t nu, bool injective) {
  const BinSizes sz = bin_sizes(n, r);
  const double prod = static_cast<double>(sz.s) * static_cast<double>(sz.w) * static_cast<double>(sz.c);
  if (prod > static_cast<double>(nu)) {
    std::ostringstream os;
    os << "binning: |S||W||C| = " << prod << " exceeds the " << nu << " sequences available";
    throw UsageError(os.str());
  }
  if (injective && prod != static_cast<double>(nu)) {
    std::ostringstream os;
    os << "binning: injective binning needs |S||W||C| = " << nu << ", got " << prod;
    throw UsageError(os.str());
  }
  return sz;
}

}  // namespace

OracleReport run_binning(const EntitySystem& sys, const BinningConfig& cfg) {
  validate(sys, cfg);
  const std::size_t J = sys.entity_count();
  std::vector<EntityTables> tables;
  std::vector<BinSizes> sizes;
  for (std::size_t j = 0; j < J; ++j) {
    tables.push_back(entity_tables(sys, j, cfg.n));
    sizes.push_back(checked_sizes(cfg.n, cfg.rates[j], tables[j].nu, cfg.injective));
  }
  std::vector<double> px(tables[0].nx, 0.0);
  for (std::size_t x = 0; x < px.size(); ++x)
    for (std::size_t u = 0; u < tables[0].nu; ++u) px[x] += tables[0].p_xu[x * tables[0].nu + u];
  if (J == 2) {
    const double cells = static_cast<double>(sizes[0].w * sizes[0].c) * static_cast<double>(sizes[1].w * sizes[1].c);
    if (cells > static_cast<double>(kMaxBinningCells)) throw ResourceError("binning: joint helper alphabet exceeds cap");
  }

  struct TrialResult {
    std::vector<TrialEntity> ent;
    double joint_privacy = 0.0, helper_mi = 0.0;
  };
  auto results = parallel_map(cfg.trials, [&](std::size_t trial) {
    TrialResult tr;
    for (std::size_t j = 0; j < J; ++j) {
      const auto m = draw_bins(tables[j].nu, sizes[j], cfg.injective, cfg.seed, trial, j);
      tr.ent.push_back(evaluate(tables[j], m, cfg.n, px));
    }
    if (J == 1) {
      tr.joint_privacy = tr.ent[0].privacy_rate;
    } else {
      const auto nb0 = sizes[0].w * sizes[0].c, nb1 = sizes[1].w * sizes[1].c;
      tr.joint_privacy = pair_information(px, tr.ent[0].p_b_given_x, nb0, tr.ent[1].p_b_given_x, nb1).first /
                         static_cast<double>(cfg.n);
      tr.helper_mi = pair_information(px, tr.ent[0].p_w_given_x, sizes[0].w, tr.ent[1].p_w_given_x, sizes[1].w).second;
    }
    for (auto& e : tr.ent) {
      e.p_b_given_x.clear();
      e.p_w_given_x.clear();
    }
    return tr;
  });

  OracleReport rep;
  rep.n = cfg.n;
  rep.trials = cfg.trials;
  rep.seed = cfg.seed;
  for (std::size_t j = 0; j < J; ++j) {
    std::vector<double> err, key, sec, priv, hx;
    for (const auto& r : results) {
      err.push_back(r.ent[j].error);
      key.push_back(r.ent[j].key_rate);
      sec.push_back(r.ent[j].secrecy);
      priv.push_back(r.ent[j].privacy_rate);
      hx.push_back(r.ent[j].helper_x);
    }
    rep.entities.push_back({sizes[j], aggregate(err), aggregate(key), aggregate(sec), aggregate(priv), aggregate(hx)});
  }
  std::vector<double> jp, hm;
  for (const auto& r : results) {
    jp.push_back(r.joint_privacy);
    hm.push_back(r.helper_mi);
  }
  rep.privacy_leakage_rate = aggregate(jp);
  rep.helper_mi = aggregate(hm);
  return rep;
}

OneTimePadCheck one_time_pad_check(const EntitySystem& sys, const BinningConfig& cfg) {
  validate(sys, cfg);
  if (sys.entity_count() != 1) throw UsageError("one_time_pad_check: a single entity is required");
  const auto t = entity_tables(sys, 0, cfg.n);
  const auto sz = checked_sizes(cfg.n, cfg.rates[0], t.nu, cfg.injective);
  const double work = static_cast<double>(t.nu) * static_cast<double>(t.ny) * static_cast<double>(sz.s);
  if (work > static_cast<double>(kMaxBinningCells) * 4.0) throw ResourceError("one_time_pad_check: enumeration exceeds cap");
  const auto m = draw_bins(t.nu, sz, cfg.injective, cfg.seed, 0, 0);
  const auto best = map_decoder(t, m);
  const std::size_t nb = m.helper_bins(), ns = sz.s;

  OneTimePadCheck out;
  out.gs_error = decode_error(t, m, best);
  const double pk = 1.0 / static_cast<double>(ns);
  double cs_err = 0.0;
  for (std::size_t u = 0; u < t.nu; ++u)
    for (std::size_t y = 0; y < t.ny; ++y) {
      const std::size_t s_hat = m.s[best[y * nb + m.b[u]]];
      for (std::size_t k = 0; k < ns; ++k) {
        const std::size_t sent = (m.s[u] + k) % ns;
        const std::size_t k_hat = (sent + ns - s_hat) % ns;
        if (k_hat != k) cs_err += t.p_uy[u * t.ny + y] * pk;
      }
    }
  out.cs_error = std::min(1.0, cs_err);

  // P(k, b, m) = P(s' = m - k, b) / |S|.
  std::vector<double> p_sb(ns * nb, 0.0);
  for (std::size_t u = 0; u < t.nu; ++u)
    for (std::size_t y = 0; y < t.ny; ++y) p_sb[m.s[u] * nb + m.b[u]] += t.p_uy[u * t.ny + y];
  std::vector<double> joint(ns * nb * ns, 0.0);
  for (std::size_t k = 0; k < ns; ++k)
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t sent = 0; sent < ns; ++sent)
        joint[k * nb * ns + b * ns + sent] = p_sb[((sent + ns - k) % ns) * nb + b] * pk;
  out.chosen_key_leakage = mi_from(joint, ns, nb * ns);
  std::vector<double> p_kb(ns * nb);
  std::vector<double> p_s(ns, 0.0), p_b(nb, 0.0);
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t b = 0; b < nb; ++b) {
      p_s[s] += p_sb[s * nb + b];
      p_b[b] += p_sb[s * nb + b];
    }
  for (std::size_t k = 0; k < ns; ++k)
    for (std::size_t b = 0; b < nb; ++b) p_kb[k * nb + b] = pk * p_b[b];
  out.chosen_key_helper_leakage = mi_from(p_kb, ns, nb);
  out.generated_key_entropy = entropy(p_s);
  out.generated_key_secrecy = mi_from(p_sb, ns, nb);
  return out;
}

namespace {

double ls_slope(const std::vector<TrendRow>& rows, double TrendRow::*field) {
  const double k = static_cast<double>(rows.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& r : rows) {
    const double x = static_cast<double>(r.n), y = r.*field;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = k * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (k * sxy - sx * sy) / den;
}

}  // namespace

TrendReport trend_check(const EntitySystem& sys, const BinRates& rates,
                        const std::vector<std::size_t>& n_list, std::size_t trials,
                        std::uint64_t seed) {
  if (sys.entity_count() != 1) throw UsageError("trend_check: a single entity is required");
  TrendReport rep;
  for (std::size_t n : n_list) {
    BinningConfig cfg;
    cfg.n = n;
    cfg.rates = {rates};
    cfg.seed = seed;
    cfg.trials = trials;
    const auto r = run_binning(sys, cfg);
    const auto& e = r.entities[0];
    const double dn = static_cast<double>(n);
    rep.rows.push_back({n, e.error_prob.mean, e.error_prob.stderr_mean, e.secrecy_leakage.mean / dn,
                        e.secrecy_leakage.stderr_mean / dn, e.key_entropy_rate.mean});
  }
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const auto& a = rep.rows[i - 1];
    const auto& b = rep.rows[i];
    const double err_noise = 2.0 * std::hypot(a.error_stderr, b.error_stderr) + 1e-12;
    const double leak_noise = 2.0 * std::hypot(a.leak_stderr, b.leak_stderr) + 1e-12;
    if (b.error_prob > a.error_prob + err_noise) rep.error_nonincreasing = false;
    if (b.leak_rate > a.leak_rate + leak_noise) rep.leak_nonincreasing = false;
  }
  if (rep.rows.size() >= 2) {
    rep.slopes = {ls_slope(rep.rows, &TrendRow::error_prob), ls_slope(rep.rows, &TrendRow::leak_rate),
                  ls_slope(rep.rows, &TrendRow::key_rate)};
    rep.leak_growing = rep.slopes[1] > 0.0 && rep.rows.back().leak_rate > rep.rows.front().leak_rate;
  }
  if (!rep.rows.empty()) rep.key_shortfall = rep.rows.back().key_rate < rates.rs - 0.05;
  return rep;
}

void write_trend_csv(const std::string& path, const TrendReport& rep) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f.precision(12);
  f << "n,error_prob,leak_rate,key_rate\n";
  for (const auto& r : rep.rows) f << r.n << ',' << r.error_prob << ',' << r.leak_rate << ',' << r.key_rate << '\n';
  if (!f) throw UsageError("failed writing '" + path + "'");
}

TrendReport read_trend_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(f, line) || line != "n,error_prob,leak_rate,key_rate") {
    throw UsageError("'" + path + "': unexpected trend CSV header");
  }
  TrendReport rep;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> cells;
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() != 4) throw UsageError("'" + path + "': row '" + line + "' needs 4 columns");
    TrendRow r;
    try {
      r.n = std::stoul(cells[0]);
      r.error_prob = std::stod(cells[1]);
      r.leak_rate = std::stod(cells[2]);
      r.key_rate = std::stod(cells[3]);
    } catch (const std::exception&) {
      throw UsageError("'" + path + "': non-numeric cell in row '" + line + "'");
    }
    rep.rows.push_back(r);
  }
  return rep;
}

}  // namespace kls
