#include "evoter/opinion_graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "evoter/errors.hpp"

namespace evoter {

std::int64_t TripleCounts::total() const {
  return std::accumulate(n.begin(), n.end(), std::int64_t{0});
}

OpinionGraph::OpinionGraph(std::size_t n)
    : opinion_(n, 0),
      adjacency_(n),
      ones_around_(n, 0),
      member_slot_(n),
      degree_histogram_(1, n) {
  members_[0].resize(n);
  std::iota(members_[0].begin(), members_[0].end(), Vertex{0});
  std::iota(member_slot_.begin(), member_slot_.end(), std::uint32_t{0});
  counts_.n0 = static_cast<std::int64_t>(n);
}

void OpinionGraph::check_vertex(Vertex v) const {
  if (v >= vertex_count()) {
    throw ContractError("vertex " + std::to_string(v) + " out of range");
  }
}

bool OpinionGraph::has_edge(Vertex u, Vertex v) const {
  if (u >= vertex_count() || v >= vertex_count()) return false;
  return adjacency_[u].contains(v);
}

std::vector<Vertex> OpinionGraph::neighbors(Vertex v) const {
  check_vertex(v);
  std::vector<Vertex> out;
  out.reserve(adjacency_[v].size());
  for (const auto& [w, slot] : adjacency_[v]) out.push_back(w);
  std::sort(out.begin(), out.end());
  return out;
}

void OpinionGraph::bump_degree(Vertex v, int delta) {
  const std::size_t new_degree = adjacency_[v].size();
  const std::size_t old_degree = delta > 0 ? new_degree - 1 : new_degree + 1;
  --degree_histogram_[old_degree];
  if (new_degree >= degree_histogram_.size()) degree_histogram_.resize(new_degree + 1, 0);
  ++degree_histogram_[new_degree];
  if (new_degree > max_degree_) {
    max_degree_ = new_degree;
  } else {
    while (max_degree_ > 0 && degree_histogram_[max_degree_] == 0) --max_degree_;
  }
}

void OpinionGraph::count_edge(Vertex u, Vertex v, int sign) {
  if (opinion_[u] != opinion_[v]) {
    counts_.n10 += sign;
  } else if (opinion_[u] == 1) {
    counts_.n11 += 2 * sign;
  } else {
    counts_.n00 += 2 * sign;
  }
}

void OpinionGraph::insert_discordant(Vertex u, Vertex v) {
  const auto slot = static_cast<std::uint32_t>(discordant_.size());
  discordant_.push_back({u, v});
  adjacency_[u][v] = slot;
  adjacency_[v][u] = slot;
}

void OpinionGraph::erase_discordant(std::uint32_t slot) {
  const auto last = static_cast<std::uint32_t>(discordant_.size() - 1);
  if (slot != last) {
    const Edge moved = discordant_[last];
    discordant_[slot] = moved;
    adjacency_[moved.a].find(moved.b)->second = slot;
    adjacency_[moved.b].find(moved.a)->second = slot;
  }
  discordant_.pop_back();
}

void OpinionGraph::link(Vertex u, Vertex v) {
  adjacency_[u].emplace(v, kConcordant);
  adjacency_[v].emplace(u, kConcordant);
  ones_around_[u] += opinion_[v];
  ones_around_[v] += opinion_[u];
  ++edge_count_;
  bump_degree(u, +1);
  bump_degree(v, +1);
  count_edge(u, v, +1);
  if (opinion_[u] != opinion_[v]) insert_discordant(u, v);
}

void OpinionGraph::unlink(Vertex u, Vertex v) {
  const std::uint32_t slot = adjacency_[u].find(v)->second;
  if (slot != kConcordant) erase_discordant(slot);
  count_edge(u, v, -1);
  adjacency_[u].erase(v);
  adjacency_[v].erase(u);
  ones_around_[u] -= opinion_[v];
  ones_around_[v] -= opinion_[u];
  --edge_count_;
  bump_degree(u, -1);
  bump_degree(v, -1);
}

void OpinionGraph::add_edge(Vertex u, Vertex v) {
  check_vertex(u);
  check_vertex(v);
  if (u == v) throw ContractError("self-loop at vertex " + std::to_string(u));
  if (adjacency_[u].contains(v)) {
    throw ContractError("parallel edge {" + std::to_string(u) + "," + std::to_string(v) + "}");
  }
  link(u, v);
}

void OpinionGraph::remove_edge(Vertex u, Vertex v) {
  check_vertex(u);
  check_vertex(v);
  if (!adjacency_[u].contains(v)) {
    throw ContractError("no edge {" + std::to_string(u) + "," + std::to_string(v) + "}");
  }
  unlink(u, v);
}

void OpinionGraph::rewire(Vertex u, Vertex v, Vertex z) {
  check_vertex(u);
  check_vertex(v);
  check_vertex(z);
  if (!adjacency_[u].contains(v)) throw ContractError("rewire: {u,v} is not an edge");
  if (z == u) throw ContractError("rewire: target equals source");
  if (z != v && adjacency_[u].contains(z)) throw ContractError("rewire: target already adjacent");
  if (z == v) return;
  unlink(u, v);
  link(u, z);
}

void OpinionGraph::flip(Vertex v) {
  check_vertex(v);
  const Opinion old = opinion_[v];
  const Opinion now = old ^ 1;

  // Hash-table iteration order depends on heap addresses; visit neighbors in
  // id order so the discordant array, and hence sampling, is reproducible.
  thread_local std::vector<Vertex> order;
  order.clear();
  for (const auto& [w, s] : adjacency_[v]) order.push_back(w);
  std::sort(order.begin(), order.end());
  auto& adj = adjacency_[v];
  for (const Vertex w : order) {
    std::uint32_t& slot = adj.find(w)->second;
    if (opinion_[w] == old) {
      // concordant -> discordant
      if (old == 1) {
        counts_.n11 -= 2;
      } else {
        counts_.n00 -= 2;
      }
      counts_.n10 += 1;
      slot = static_cast<std::uint32_t>(discordant_.size());
      discordant_.push_back({v, w});
      adjacency_[w].find(v)->second = slot;
    } else {
      counts_.n10 -= 1;
      if (now == 1) {
        counts_.n11 += 2;
      } else {
        counts_.n00 += 2;
      }
      const std::uint32_t gone = slot;
      slot = kConcordant;
      adjacency_[w].find(v)->second = kConcordant;
      // inline swap-delete; only map values change, never the structure
      const auto last = static_cast<std::uint32_t>(discordant_.size() - 1);
      if (gone != last) {
        const Edge moved = discordant_[last];
        discordant_[gone] = moved;
        adjacency_[moved.a].find(moved.b)->second = gone;
        adjacency_[moved.b].find(moved.a)->second = gone;
      }
      discordant_.pop_back();
    }
    if (now == 1) {
      ++ones_around_[w];
    } else {
      --ones_around_[w];
    }
  }

  // move v between opinion classes
  auto& from = members_[old];
  const std::uint32_t slot = member_slot_[v];
  from[slot] = from.back();
  member_slot_[from[slot]] = slot;
  from.pop_back();
  member_slot_[v] = static_cast<std::uint32_t>(members_[now].size());
  members_[now].push_back(v);

  opinion_[v] = now;
  if (now == 1) {
    ++counts_.n1;
    --counts_.n0;
  } else {
    --counts_.n1;
    ++counts_.n0;
  }
}

void OpinionGraph::set_opinions(std::span<const Opinion> opinions) {
  if (opinions.size() != vertex_count()) {
    throw ContractError("opinion vector has wrong length");
  }
  for (Vertex v = 0; v < vertex_count(); ++v) {
    if (opinions[v] > 1) throw ContractError("opinions must be 0 or 1");
    set_opinion(v, opinions[v]);
  }
}

std::optional<Edge> OpinionGraph::sample_discordant(Rng& rng) const {
  if (discordant_.empty()) return std::nullopt;
  return discordant_[rng.below(discordant_.size())];
}

std::vector<Edge> OpinionGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (Vertex u = 0; u < vertex_count(); ++u) {
    for (const auto& [w, slot] : adjacency_[u]) {
      if (u < w) out.push_back({u, w});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Edge& x, const Edge& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; });
  return out;
}

bool OpinionGraph::same_state(const OpinionGraph& other) const {
  return opinion_ == other.opinion_ && edges() == other.edges();
}

void OpinionGraph::check_consistency() const {
  auto fail = [](const std::string& what) { throw ContractError("inconsistent graph: " + what); };
  PairCounts recount;
  std::size_t degrees = 0;
  std::size_t max_deg = 0;
  std::size_t discordant = 0;
  for (Vertex u = 0; u < vertex_count(); ++u) {
    (opinion_[u] == 1 ? recount.n1 : recount.n0) += 1;
    std::size_t ones = 0;
    degrees += adjacency_[u].size();
    max_deg = std::max(max_deg, adjacency_[u].size());
    for (const auto& [w, slot] : adjacency_[u]) {
      if (w == u) fail("self-loop");
      auto back = adjacency_[w].find(u);
      if (back == adjacency_[w].end()) fail("asymmetric adjacency");
      if (back->second != slot) fail("slot mismatch");
      ones += opinion_[w];
      if (opinion_[u] != opinion_[w]) {
        if (slot >= discordant_.size()) fail("missing discordant slot");
        const Edge e = discordant_[slot];
        if (!((e.a == u && e.b == w) || (e.a == w && e.b == u))) fail("discordant slot points elsewhere");
        if (u < w) ++discordant;
        if (opinion_[u] == 1) ++recount.n10;
      } else {
        if (slot != kConcordant) fail("concordant edge in discordant index");
        (opinion_[u] == 1 ? recount.n11 : recount.n00) += 1;
      }
    }
    if (ones != ones_around_[u]) fail("ones_around");
  }
  if (degrees != 2 * edge_count_) fail("edge count");
  if (max_deg != max_degree_) fail("max degree");
  if (discordant != discordant_.size()) fail("discordant index size");
  if (!(recount == counts_)) fail("pair counts");
  if (counts_.n11 + 2 * counts_.n10 + counts_.n00 != static_cast<std::int64_t>(degrees)) {
    fail("sum identity");
  }
  for (int o = 0; o < 2; ++o) {
    for (std::size_t i = 0; i < members_[o].size(); ++i) {
      const Vertex v = members_[o][i];
      if (opinion_[v] != o || member_slot_[v] != i) fail("opinion classes");
    }
  }
}

TripleCounts triple_counts(const OpinionGraph& g) {
  TripleCounts t;
  for (Vertex y = 0; y < g.vertex_count(); ++y) {
    const int j = g.opinion(y);
    const std::array<std::int64_t, 2> around{static_cast<std::int64_t>(g.zeros_around(y)),
                                             static_cast<std::int64_t>(g.ones_around(y))};
    for (int i = 0; i < 2; ++i) {
      for (int k = 0; k < 2; ++k) {
        t.at(i, j, k) += around[i] * around[k] - (i == k ? around[i] : 0);
      }
    }
  }
  return t;
}

std::array<double, 8> triple_counts_sampled(const OpinionGraph& g, std::size_t samples,
                                            Rng& rng) {
  std::array<double, 8> est{};
  const std::size_t n = g.vertex_count();
  if (n == 0 || samples == 0) return est;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto y = static_cast<Vertex>(rng.below(n));
    const int j = g.opinion(y);
    const std::array<double, 2> around{static_cast<double>(g.zeros_around(y)),
                                       static_cast<double>(g.ones_around(y))};
    for (int i = 0; i < 2; ++i) {
      for (int k = 0; k < 2; ++k) {
        est[(i << 2) | (j << 1) | k] += around[i] * around[k] - (i == k ? around[i] : 0.0);
      }
    }
  }
  const double scale = static_cast<double>(n) / static_cast<double>(samples);
  for (double& x : est) x *= scale;
  return est;
}

}  // namespace evoter
