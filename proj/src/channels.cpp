#include "kls/channels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kls/errors.hpp"
#include "kls/parallel.hpp"

namespace kls {

BroadcastChannel::BroadcastChannel(std::vector<std::vector<std::vector<double>>> table)
    : table_(std::move(table)) {
  if (table_.empty()) throw DistributionError("BroadcastChannel: empty source alphabet");
  nxt_ = table_.front().size();
  ny_ = nxt_ == 0 ? 0 : table_.front().front().size();
  if (nxt_ == 0 || ny_ == 0) throw DistributionError("BroadcastChannel: empty output alphabet");
  for (std::size_t x = 0; x < table_.size(); ++x) {
    if (table_[x].size() != nxt_) throw DistributionError("BroadcastChannel: ragged table");
    std::vector<double> flat;
    for (const auto& row : table_[x]) {
      if (row.size() != ny_) throw DistributionError("BroadcastChannel: ragged table");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    try {
      Pmf check(std::move(flat));
    } catch (const DistributionError& e) {
      std::ostringstream os;
      os << "BroadcastChannel: P(., . | x=" << x << ") invalid: " << e.what();
      throw DistributionError(os.str());
    }
  }
}

ConditionalPmf BroadcastChannel::measurement_marginal() const {
  std::vector<std::vector<double>> rows(table_.size(), std::vector<double>(nxt_, 0.0));
  for (std::size_t x = 0; x < table_.size(); ++x)
    for (std::size_t a = 0; a < nxt_; ++a)
      for (std::size_t y = 0; y < ny_; ++y) rows[x][a] += table_[x][a][y];
  return ConditionalPmf(rows);
}

ConditionalPmf BroadcastChannel::decoder_marginal() const {
  std::vector<std::vector<double>> rows(table_.size(), std::vector<double>(ny_, 0.0));
  for (std::size_t x = 0; x < table_.size(); ++x)
    for (std::size_t a = 0; a < nxt_; ++a)
      for (std::size_t y = 0; y < ny_; ++y) rows[x][y] += table_[x][a][y];
  return ConditionalPmf(rows);
}

EntitySystem::EntitySystem(Pmf source, std::vector<BroadcastChannel> entities)
    : source_(std::move(source)), entities_(std::move(entities)) {
  if (entities_.empty()) throw UsageError("EntitySystem: at least one entity is required");
  for (std::size_t j = 0; j < entities_.size(); ++j) {
    if (entities_[j].source_size() != source_.size()) {
      std::ostringstream os;
      os << "EntitySystem: entity " << j + 1 << " expects source alphabet "
         << entities_[j].source_size() << ", source has " << source_.size();
      throw UsageError(os.str());
    }
  }
}

const BroadcastChannel& EntitySystem::entity(std::size_t j) const {
  if (j >= entities_.size()) {
    std::ostringstream os;
    os << "entity index " << j << " out of range (J=" << entities_.size() << ")";
    throw UsageError(os.str());
  }
  return entities_[j];
}

std::string to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::physically_degraded:
      return "physically_degraded";
    case ChannelKind::less_noisy_strong_privacy:
      return "less_noisy_strong_privacy";
    case ChannelKind::neither:
      return "neither";
  }
  return "neither";
}

ConditionalPmf bsc(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bsc: crossover outside [0,1]");
  return ConditionalPmf(std::vector<std::vector<double>>{{1.0 - p, p}, {p, 1.0 - p}});
}

ConditionalPmf cascade(const ConditionalPmf& first, const ConditionalPmf& second) {
  if (first.output_size() != second.input_size()) {
    std::ostringstream os;
    os << "cascade: first channel outputs " << first.output_size()
       << " symbols, second expects " << second.input_size();
    throw UsageError(os.str());
  }
  std::vector<std::vector<double>> rows(first.input_size(),
                                        std::vector<double>(second.output_size(), 0.0));
  for (std::size_t a = 0; a < first.input_size(); ++a)
    for (std::size_t b = 0; b < first.output_size(); ++b)
      for (std::size_t c = 0; c < second.output_size(); ++c) rows[a][c] += first(a, b) * second(b, c);
  return ConditionalPmf(rows);
}

BroadcastChannel separate_bc(const ConditionalPmf& measure) {
  const std::size_t nx = measure.input_size();
  const std::size_t n = measure.output_size();
  std::vector<std::vector<std::vector<double>>> t(
      nx, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t y = 0; y < n; ++y) t[x][a][y] = measure(x, a) * measure(x, y);
  return BroadcastChannel(std::move(t));
}

double awgn_to_bsc(double snr_db) {
  if (std::isnan(snr_db)) throw DomainError("awgn_to_bsc: SNR is NaN");
  if (snr_db == -std::numeric_limits<double>::infinity()) return 0.5;
  return q_function(std::sqrt(std::pow(10.0, snr_db / 10.0)));
}

JointPmf entity_joint(const EntitySystem& sys, std::size_t j) {
  const auto& bc = sys.entity(j);
  const std::size_t nx = bc.source_size(), nxt = bc.measurement_size(), ny = bc.decoder_size();
  std::vector<double> mass;
  mass.reserve(nx * nxt * ny);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t a = 0; a < nxt; ++a)
      for (std::size_t y = 0; y < ny; ++y) mass.push_back(sys.source()[x] * bc(x, a, y));
  return JointPmf({{"X", nx}, {"Xt", nxt}, {"Y", ny}}, std::move(mass));
}

JointPmf entity_joint(const EntitySystem& sys, std::size_t j, const AuxiliaryChannel& aux) {
  const auto& bc = sys.entity(j);
  if (aux.cond.input_size() != bc.measurement_size()) {
    throw UsageError("aux channel input alphabet does not match the entity measurement alphabet");
  }
  const std::size_t nu = aux.aux_cardinality();
  const std::size_t nx = bc.source_size(), nxt = bc.measurement_size(), ny = bc.decoder_size();
  std::vector<double> mass;
  mass.reserve(nu * nx * nxt * ny);
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t a = 0; a < nxt; ++a)
        for (std::size_t y = 0; y < ny; ++y)
          mass.push_back(sys.source()[x] * bc(x, a, y) * aux.cond(a, u));
  return JointPmf({{"U", nu}, {"X", nx}, {"Xt", nxt}, {"Y", ny}}, std::move(mass));
}

bool is_physically_degraded(const EntitySystem& sys, std::size_t j, double tol) {
  const auto& bc = sys.entity(j);
  const std::size_t nx = bc.source_size(), nxt = bc.measurement_size(), ny = bc.decoder_size();
  for (std::size_t y = 0; y < ny; ++y) {
    double py = 0.0;
    std::vector<double> p_xt(nxt, 0.0), p_x(nx, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t a = 0; a < nxt; ++a) {
        double m = sys.source()[x] * bc(x, a, y);
        py += m;
        p_xt[a] += m;
        p_x[x] += m;
      }
    if (py <= tol) continue;
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t a = 0; a < nxt; ++a) {
        double joint = sys.source()[x] * bc(x, a, y) / py;
        double prod = (p_xt[a] / py) * (p_x[x] / py);
        if (std::abs(joint - prod) > tol) return false;
      }
  }
  return true;
}

namespace {

// I(U;Z) where P(x~, z) is given and U is drawn through `aux[x~][u]`.
double aux_information(const std::vector<std::vector<double>>& p_xt_z,
                       const std::vector<std::vector<double>>& aux) {
  const std::size_t nxt = p_xt_z.size();
  const std::size_t nz = p_xt_z.front().size();
  const std::size_t nu = aux.front().size();
  std::vector<double> p_uz(nu * nz, 0.0), p_u(nu, 0.0), p_z(nz, 0.0);
  for (std::size_t a = 0; a < nxt; ++a)
    for (std::size_t u = 0; u < nu; ++u) {
      const double w = aux[a][u];
      if (w == 0.0) continue;
      for (std::size_t z = 0; z < nz; ++z) p_uz[u * nz + z] += w * p_xt_z[a][z];
    }
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t z = 0; z < nz; ++z) {
      p_u[u] += p_uz[u * nz + z];
      p_z[z] += p_uz[u * nz + z];
    }
  return std::max(0.0, entropy(p_u) + entropy(p_z) - entropy(p_uz));
}

struct LnProblem {
  std::vector<std::vector<double>> p_xt_x;
  std::vector<std::vector<double>> p_xt_y;

  double gap(const std::vector<std::vector<double>>& aux) const {
    return aux_information(p_xt_y, aux) - aux_information(p_xt_x, aux);
  }
};

}  // namespace

std::vector<std::vector<double>> simplex_grid(std::size_t n, std::size_t r) {
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> parts(n, 0);
  auto rec = [&](auto&& self, std::size_t i, std::size_t left) -> void {
    if (i + 1 == n) {
      parts[i] = left;
      std::vector<double> v(n);
      for (std::size_t k = 0; k < n; ++k) v[k] = static_cast<double>(parts[k]) / static_cast<double>(r);
      out.push_back(std::move(v));
      return;
    }
    for (std::size_t k = 0; k <= left; ++k) {
      parts[i] = k;
      self(self, i + 1, left - k);
    }
  };
  rec(rec, 0, r);
  return out;
}

ChannelClass certify_less_noisy_strong_privacy(const EntitySystem& sys, std::size_t j,
                                               std::size_t grid_resolution,
                                               std::size_t aux_cardinality, double tol) {
  const auto& bc = sys.entity(j);
  const std::size_t nx = bc.source_size(), nxt = bc.measurement_size(), ny = bc.decoder_size();
  if (aux_cardinality == 0) aux_cardinality = nxt + 1;
  if (aux_cardinality < 2) throw UsageError("certify_less_noisy: aux cardinality must be >= 2");
  if (grid_resolution < 1) throw UsageError("certify_less_noisy: grid resolution must be >= 1");

  LnProblem prob;
  prob.p_xt_x.assign(nxt, std::vector<double>(nx, 0.0));
  prob.p_xt_y.assign(nxt, std::vector<double>(ny, 0.0));
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t a = 0; a < nxt; ++a)
      for (std::size_t y = 0; y < ny; ++y) {
        double m = sys.source()[x] * bc(x, a, y);
        prob.p_xt_x[a][x] += m;
        prob.p_xt_y[a][y] += m;
      }

  // C(r + n - 1, n - 1) rows per measurement symbol, checked before building the grid.
  double row_count = 1.0;
  for (std::size_t k = 1; k < aux_cardinality; ++k) {
    row_count *= static_cast<double>(grid_resolution + k) / static_cast<double>(k);
  }
  double total = std::pow(row_count, static_cast<double>(nxt));
  if (total > static_cast<double>(kMaxLnGridPoints)) {
    std::ostringstream os;
    os << "certify_less_noisy: grid has " << total << " aux channels, cap is " << kMaxLnGridPoints;
    throw ResourceError(os.str());
  }
  const auto rows = simplex_grid(aux_cardinality, grid_resolution);
  const std::size_t count = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(rows.size()), static_cast<double>(nxt))));

  auto decode = [&](std::size_t idx) {
    std::vector<std::vector<double>> aux(nxt);
    for (std::size_t a = nxt; a-- > 0;) {
      aux[a] = rows[idx % rows.size()];
      idx /= rows.size();
    }
    return aux;
  };

  // Chunked min-reduction; ties resolve to the lowest grid index.
  const std::size_t chunks = std::min<std::size_t>(count, 64);
  const std::size_t per = (count + chunks - 1) / chunks;
  auto partial = parallel_map(chunks, [&](std::size_t c) {
    std::pair<double, std::size_t> best{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t i = c * per; i < std::min(count, (c + 1) * per); ++i) {
      double g = prob.gap(decode(i));
      if (g < best.first) best = {g, i};
    }
    return best;
  });
  auto best = *std::min_element(partial.begin(), partial.end());

  // Local refinement: move mass between entries of one row, shrinking the step.
  auto aux = decode(best.second);
  double gap = best.first;
  for (double step = 0.5 / static_cast<double>(grid_resolution); step > 1e-7; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t a = 0; a < nxt; ++a)
        for (std::size_t from = 0; from < aux_cardinality; ++from)
          for (std::size_t to = 0; to < aux_cardinality; ++to) {
            if (from == to || aux[a][from] <= 0.0) continue;
            const double delta = std::min(step, aux[a][from]);
            auto trial = aux;
            trial[a][from] -= delta;
            trial[a][to] += delta;
            double g = prob.gap(trial);
            if (g < gap - 1e-15) {
              gap = g;
              aux = std::move(trial);
              improved = true;
            }
          }
    }
  }

  ChannelClass out;
  out.tolerance = tol;
  out.grid_resolution = grid_resolution;
  out.aux_cardinality = aux_cardinality;
  out.min_gap = gap;
  out.witness_info_x = aux_information(prob.p_xt_x, aux);
  out.witness_info_y = aux_information(prob.p_xt_y, aux);
  if (gap >= -tol) {
    out.kind = ChannelKind::less_noisy_strong_privacy;
  } else {
    // Renormalize rows against drift from the mass moves.
    for (auto& row : aux) {
      double s = 0.0;
      for (double v : row) s += v;
      for (double& v : row) v /= s;
    }
    out.kind = ChannelKind::neither;
    out.witness = AuxiliaryChannel{ConditionalPmf(aux)};
  }
  return out;
}

ChannelClass classify(const EntitySystem& sys, std::size_t j, std::size_t grid_resolution,
                      std::size_t aux_cardinality, double tol) {
  if (is_physically_degraded(sys, j, tol)) {
    ChannelClass c;
    c.kind = ChannelKind::physically_degraded;
    c.tolerance = tol;
    return c;
  }
  return certify_less_noisy_strong_privacy(sys, j, grid_resolution, aux_cardinality, tol);
}

}  // namespace kls
