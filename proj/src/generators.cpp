#include "evoter/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <absl/container/flat_hash_set.h>

#include "evoter/errors.hpp"

namespace evoter {

namespace {

std::uint64_t edge_key(Vertex u, Vertex v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

std::vector<Vertex> make_stubs(std::size_t n, std::size_t degree) {
  std::vector<Vertex> stubs;
  stubs.reserve(n * degree);
  for (Vertex v = 0; v < n; ++v) stubs.insert(stubs.end(), degree, v);
  return stubs;
}

std::optional<OpinionGraph> try_rejection(std::size_t n, std::size_t degree, Rng& rng) {
  std::vector<Vertex> stubs = make_stubs(n, degree);
  std::shuffle(stubs.begin(), stubs.end(), rng.engine());
  absl::flat_hash_set<std::uint64_t> seen;
  seen.reserve(stubs.size() / 2);
  for (std::size_t i = 0; i < stubs.size(); i += 2) {
    const Vertex u = stubs[i];
    const Vertex v = stubs[i + 1];
    if (u == v || !seen.insert(edge_key(u, v)).second) return std::nullopt;
  }
  OpinionGraph g(n);
  for (std::size_t i = 0; i < stubs.size(); i += 2) g.add_edge(stubs[i], stubs[i + 1]);
  return g;
}

bool any_valid_pair(const std::vector<Vertex>& stubs, std::size_t live, const OpinionGraph& g) {
  for (std::size_t i = 0; i < live; ++i) {
    for (std::size_t j = i + 1; j < live; ++j) {
      if (stubs[i] != stubs[j] && !g.has_edge(stubs[i], stubs[j])) return true;
    }
  }
  return false;
}

std::optional<OpinionGraph> try_sequential(std::size_t n, std::size_t degree, Rng& rng) {
  std::vector<Vertex> stubs = make_stubs(n, degree);
  OpinionGraph g(n);
  std::size_t live = stubs.size();
  std::size_t misses = 0;
  while (live > 0) {
    const std::size_t i = rng.below(live);
    std::size_t j = rng.below(live - 1);
    if (j >= i) ++j;
    const Vertex u = stubs[i];
    const Vertex v = stubs[j];
    if (u != v && !g.has_edge(u, v)) {
      g.add_edge(u, v);
      // remove the larger index first so the smaller stays valid
      const std::size_t hi = std::max(i, j);
      const std::size_t lo = std::min(i, j);
      stubs[hi] = stubs[--live];
      stubs[lo] = stubs[--live];
      misses = 0;
      continue;
    }
    if (++misses >= 64 + 4 * live) {
      if (live > 4096 || !any_valid_pair(stubs, live, g)) return std::nullopt;
      misses = 0;
    }
  }
  return g;
}

}  // namespace

OpinionGraph build_regular(std::size_t n, std::size_t degree, Rng& rng,
                           const RegularOptions& options) {
  if ((n * degree) % 2 != 0) {
    throw InvalidInput("regular graph needs n*L even (n=" + std::to_string(n) +
                       ", L=" + std::to_string(degree) + ")");
  }
  if (degree > 0 && degree >= n) {
    throw InvalidInput("regular graph needs L < n");
  }
  if (degree == 0) return OpinionGraph(n);

  RegularMethod method = options.method;
  if (method == RegularMethod::kAutomatic) {
    // a uniform pairing is simple with probability ~exp(-(L^2-1)/4)
    method = degree <= 4 ? RegularMethod::kRejection : RegularMethod::kSequential;
  }
  for (std::size_t attempt = 0; attempt < options.max_attempts; ++attempt) {
    auto g = method == RegularMethod::kRejection ? try_rejection(n, degree, rng)
                                                 : try_sequential(n, degree, rng);
    if (g) return std::move(*g);
  }
  throw RetryExhausted("no simple " + std::to_string(degree) + "-regular graph on " +
                       std::to_string(n) + " vertices after " +
                       std::to_string(options.max_attempts) + " attempts");
}

OpinionGraph build_er(std::size_t n, double mean_degree, Rng& rng) {
  if (n < 2) {
    if (mean_degree != 0.0) throw InvalidInput("G(n,p) with n < 2 has mean degree 0");
    return OpinionGraph(n);
  }
  const double max_mean = static_cast<double>(n - 1);
  if (!(mean_degree >= 0.0) || mean_degree > max_mean) {
    throw InvalidInput("mean degree must lie in [0, n-1]");
  }
  OpinionGraph g(n);
  const double p = mean_degree / max_mean;
  if (p <= 0.0) return g;
  if (p >= 1.0) {
    for (Vertex v = 1; v < n; ++v) {
      for (Vertex w = 0; w < v; ++w) g.add_edge(v, w);
    }
    return g;
  }
  // geometric skipping over the pairs (v, w), w < v
  const double log_q = std::log1p(-p);
  std::int64_t v = 1;
  std::int64_t w = -1;
  const auto nn = static_cast<std::int64_t>(n);
  while (v < nn) {
    const double r = rng.uniform();
    w += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
    while (w >= v && v < nn) {
      w -= v;
      ++v;
    }
    if (v < nn) g.add_edge(static_cast<Vertex>(v), static_cast<Vertex>(w));
  }
  return g;
}

void assign_opinions(OpinionGraph& g, double p, OpinionMode mode, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("density p must lie in [0, 1]");
  const std::size_t n = g.vertex_count();
  std::vector<Opinion> opinions(n, 0);
  if (mode == OpinionMode::kProduct) {
    for (auto& o : opinions) o = rng.bernoulli(p) ? 1 : 0;
  } else {
    const auto ones = static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), Vertex{0});
    for (std::size_t i = 0; i < ones; ++i) {
      const std::size_t j = i + rng.below(n - i);
      std::swap(order[i], order[j]);
      opinions[order[i]] = 1;
    }
  }
  g.set_opinions(opinions);
}

}  // namespace evoter
