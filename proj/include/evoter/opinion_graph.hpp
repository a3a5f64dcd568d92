#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "evoter/rng.hpp"

namespace evoter {

using Vertex = std::uint32_t;
using Opinion = std::uint8_t;

struct Edge {
  Vertex a;
  Vertex b;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// N10 counts discordant unordered edges (= ordered (1,0) pairs); N11 and N00
// count ordered pairs, so each concordant edge contributes 2.
struct PairCounts {
  std::int64_t n1 = 0;
  std::int64_t n0 = 0;
  std::int64_t n10 = 0;
  std::int64_t n11 = 0;
  std::int64_t n00 = 0;

  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

// Ordered paths x~y~z with z != x, indexed by the opinions (i, j, k).
struct TripleCounts {
  std::array<std::int64_t, 8> n{};

  std::int64_t& at(int i, int j, int k) { return n[(i << 2) | (j << 1) | k]; }
  std::int64_t at(int i, int j, int k) const { return n[(i << 2) | (j << 1) | k]; }

  std::int64_t n000() const { return at(0, 0, 0); }
  std::int64_t n001() const { return at(0, 0, 1); }
  std::int64_t n010() const { return at(0, 1, 0); }
  std::int64_t n011() const { return at(0, 1, 1); }
  std::int64_t n100() const { return at(1, 0, 0); }
  std::int64_t n101() const { return at(1, 0, 1); }
  std::int64_t n110() const { return at(1, 1, 0); }
  std::int64_t n111() const { return at(1, 1, 1); }
  std::int64_t total() const;

  friend bool operator==(const TripleCounts&, const TripleCounts&) = default;
};

// Simple undirected graph with binary opinions. Pair counts, per-vertex
// 1-neighbor counts, the max degree, and an index of discordant edges are
// maintained incrementally; the discordant index supports O(1) uniform
// sampling and swap-delete.
class OpinionGraph {
 public:
  explicit OpinionGraph(std::size_t n = 0);

  std::size_t vertex_count() const { return opinion_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t degree_sum() const { return 2 * edge_count_; }

  Opinion opinion(Vertex v) const { return opinion_[v]; }
  std::span<const Opinion> opinions() const { return opinion_; }
  std::size_t degree(Vertex v) const { return adjacency_[v].size(); }
  // Number of neighbors in state 1 (j) and state 0 (k).
  std::size_t ones_around(Vertex v) const { return ones_around_[v]; }
  std::size_t zeros_around(Vertex v) const { return degree(v) - ones_around_[v]; }
  std::size_t max_degree() const { return max_degree_; }

  bool has_edge(Vertex u, Vertex v) const;
  std::vector<Vertex> neighbors(Vertex v) const;  // sorted
  template <class F>
  void for_each_neighbor(Vertex v, F&& f) const {
    for (const auto& [w, slot] : adjacency_[v]) f(w);
  }

  void add_edge(Vertex u, Vertex v);
  void remove_edge(Vertex u, Vertex v);

  // Replace {u,v} by {u,z}.
  void rewire(Vertex u, Vertex v, Vertex z);
  void flip(Vertex v);
  void set_opinion(Vertex v, Opinion o) {
    if (opinion_[v] != o) flip(v);
  }
  void set_opinions(std::span<const Opinion> opinions);

  std::optional<Edge> sample_discordant(Rng& rng) const;
  std::span<const Edge> discordant_edges() const { return discordant_; }
  const PairCounts& pair_counts() const { return counts_; }

  std::size_t class_size(Opinion o) const { return members_[o].size(); }
  Vertex class_member(Opinion o, std::size_t i) const { return members_[o][i]; }

  // Unordered edges with a < b, sorted.
  std::vector<Edge> edges() const;

  // Recounts everything from scratch and throws ContractError on mismatch.
  void check_consistency() const;

  // Same vertex count, opinions, and edge set.
  bool same_state(const OpinionGraph& other) const;

 private:
  static constexpr std::uint32_t kConcordant = UINT32_MAX;

  void check_vertex(Vertex v) const;
  void link(Vertex u, Vertex v);
  void unlink(Vertex u, Vertex v);
  void insert_discordant(Vertex u, Vertex v);
  void erase_discordant(std::uint32_t slot);
  void bump_degree(Vertex v, int delta);
  void count_edge(Vertex u, Vertex v, int sign);

  std::vector<Opinion> opinion_;
  // neighbor -> slot in discordant_ (kConcordant when the edge is concordant)
  std::vector<absl::flat_hash_map<Vertex, std::uint32_t>> adjacency_;
  std::vector<std::uint32_t> ones_around_;
  std::vector<Edge> discordant_;
  std::array<std::vector<Vertex>, 2> members_;
  std::vector<std::uint32_t> member_slot_;
  std::vector<std::size_t> degree_histogram_;
  std::size_t max_degree_ = 0;
  std::size_t edge_count_ = 0;
  PairCounts counts_;
};

// Exact counts from per-vertex neighbor tallies, O(n + edges).
TripleCounts triple_counts(const OpinionGraph& g);

// Unbiased estimate from `samples` middle vertices drawn uniformly with
// replacement, scaled up by n / samples. Same (i,j,k) indexing as TripleCounts.
std::array<double, 8> triple_counts_sampled(const OpinionGraph& g, std::size_t samples,
                                            Rng& rng);

}  // namespace evoter
