#pragma once

#include <filesystem>
#include <iosfwd>

#include "evoter/opinion_graph.hpp"

namespace evoter {

// Snapshot text format:
//   line 1: "N L_mean"
//   line 2: N characters in {0,1}, the opinion of each vertex
//   then one "u v" line per unordered edge (u < v, sorted)
void write_snapshot(std::ostream& out, const OpinionGraph& g);
OpinionGraph read_snapshot(std::istream& in);

void save_snapshot(const std::filesystem::path& path, const OpinionGraph& g);
OpinionGraph load_snapshot(const std::filesystem::path& path);

}  // namespace evoter
