#pragma once

#include <cstddef>

#include "evoter/opinion_graph.hpp"
#include "evoter/rng.hpp"

namespace evoter {

enum class RegularMethod {
  // Whole-graph rejection when its success probability is reasonable,
  // otherwise sequential stub matching.
  kAutomatic,
  // Configuration-model pairing; any self-loop or parallel edge rejects the
  // whole pairing.
  kRejection,
  // Sequential matching of random stub pairs, skipping pairs that would
  // create a loop or a parallel edge; restarts on dead ends.
  kSequential,
};

struct RegularOptions {
  RegularMethod method = RegularMethod::kAutomatic;
  std::size_t max_attempts = 1000;
};

// Simple L-regular graph on n vertices, all opinions 0.
OpinionGraph build_regular(std::size_t n, std::size_t degree, Rng& rng,
                           const RegularOptions& options = {});

// G(n, mean_degree / (n - 1)), all opinions 0.
OpinionGraph build_er(std::size_t n, double mean_degree, Rng& rng);

enum class OpinionMode {
  kProduct,     // i.i.d. Bernoulli(p)
  kExactCount,  // exactly round(p n) ones at uniform positions
};

void assign_opinions(OpinionGraph& g, double p, OpinionMode mode, Rng& rng);

}  // namespace evoter
