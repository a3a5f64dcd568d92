#pragma once

#include <vector>

#include "evoter/opinion_graph.hpp"

namespace evoter::testing {

inline OpinionGraph cycle(std::size_t n, const std::vector<Opinion>& ops) {
  OpinionGraph g(n);
  for (Vertex v = 0; v < n; ++v) g.add_edge(v, static_cast<Vertex>((v + 1) % n));
  g.set_opinions(ops);
  return g;
}

// 4-cycle 0-1-2-3-0 with opinions (1,0,1,0)
inline OpinionGraph alternating_square() { return cycle(4, {1, 0, 1, 0}); }

// Ordered paths x~y~z, z != x, by brute force.
inline TripleCounts brute_triples(const OpinionGraph& g) {
  TripleCounts t;
  const auto n = static_cast<Vertex>(g.vertex_count());
  for (Vertex x = 0; x < n; ++x)
    for (Vertex y = 0; y < n; ++y)
      for (Vertex z = 0; z < n; ++z)
        if (z != x && g.has_edge(x, y) && g.has_edge(y, z))
          ++t.at(g.opinion(x), g.opinion(y), g.opinion(z));
  return t;
}

}  // namespace evoter::testing
