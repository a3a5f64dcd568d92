#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evoter/opinion_graph.hpp"

namespace evoter {

struct TrajectoryRow {
  std::uint64_t updates = 0;
  double time = 0.0;
  std::int64_t n1 = 0;
  std::int64_t n10 = 0;
  std::int64_t n11 = 0;
  std::int64_t n00 = 0;
  std::uint64_t dmax = 0;
  std::optional<TripleCounts> triples;
};

struct Trajectory {
  std::size_t n = 0;
  double mean_degree = 0.0;
  std::vector<TrajectoryRow> rows;

  bool has_triples() const { return !rows.empty() && rows.front().triples.has_value(); }
};

TrajectoryRow snapshot_row(const OpinionGraph& g, std::uint64_t updates, double time,
                           bool with_triples);

}  // namespace evoter
