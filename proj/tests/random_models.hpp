#pragma once

// Random distributions and channel systems shared by the test binaries.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "kls/channels.hpp"
#include "kls/probkit.hpp"

namespace kls::testing {

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n, bool sparse = false) {
  std::exponential_distribution<double> ex(1.0);
  std::bernoulli_distribution drop(0.25);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) {
    x = (sparse && drop(rng)) ? 0.0 : ex(rng);
    s += x;
  }
  if (s <= 0.0) {
    v[0] = 1.0;
    return v;
  }
  for (auto& x : v) x /= s;
  return v;
}

inline ConditionalPmf random_conditional(std::mt19937_64& rng, std::size_t in, std::size_t out) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < in; ++i) rows.push_back(random_simplex(rng, out));
  return ConditionalPmf(rows);
}

// X -> Y -> X~, so X~ is a degraded version of the decoder output.
inline BroadcastChannel random_pd_channel(std::mt19937_64& rng, std::size_t nx, std::size_t nxt,
                                          std::size_t ny) {
  const auto py = random_conditional(rng, nx, ny);
  const auto pxt = random_conditional(rng, ny, nxt);
  std::vector<std::vector<std::vector<double>>> t(nx, std::vector<std::vector<double>>(nxt, std::vector<double>(ny)));
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t a = 0; a < nxt; ++a)
      for (std::size_t y = 0; y < ny; ++y) t[x][a][y] = py(x, y) * pxt(y, a);
  return BroadcastChannel(t);
}

inline EntitySystem separate_bsc_system(double p, std::size_t entities) {
  return EntitySystem(Pmf::uniform(2), std::vector<BroadcastChannel>(entities, separate_bc(bsc(p))));
}

// Plain-loop entropy of a flat mass vector; kept independent of probkit.
inline double direct_entropy(const std::vector<double>& m) {
  double h = 0.0;
  for (double v : m)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

}  // namespace kls::testing
