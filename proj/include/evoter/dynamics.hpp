#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "evoter/generators.hpp"
#include "evoter/opinion_graph.hpp"
#include "evoter/rng.hpp"
#include "evoter/trajectory.hpp"

namespace evoter {

enum class RewireMode { kToRandom, kToSame };

// Which vertices may receive the rewired end of an edge.
enum class TargetRule {
  // Uniform over the candidate pool (all vertices, or x's opinion class);
  // hitting x itself or a current neighbor turns the event into a blocked no-op.
  kUniformAll,
  // Uniform over candidates that are neither x nor a neighbor of x.
  kExcludeNeighbors,
};

enum class Clock {
  // Oriented discordant edges fire at rate 1; exponential holding times.
  kCtmc,
  // Every update acts on a uniformly chosen discordant edge.
  kDiscreteEfficient,
  // Every update picks a uniform oriented edge; concordant picks are no-ops
  // that only advance the update counter.
  kDiscreteUniformEdge,
  // Each oriented edge chosen at rate 1, vote w.p. nu/L; same kernel and
  // time scale as kCtmc.
  kSilk,
};

enum class InitialGraph { kRegular, kErdosRenyi };

struct ModelParams {
  std::size_t n = 1000;
  double L = 20.0;  // regular degree, or the G(n,p) mean degree
  double nu = 1.0;
  double p = 0.5;
  RewireMode rewire_mode = RewireMode::kToRandom;
  TargetRule target_rule = TargetRule::kExcludeNeighbors;
  Clock clock = Clock::kDiscreteEfficient;
  // Vote probability (nu/L)/(1+nu/L) instead of nu/L, i.e. voting at rate
  // nu/L on top of rewiring at rate 1.
  bool legacy_rates = false;
  InitialGraph initial_graph = InitialGraph::kRegular;
  OpinionMode opinion_mode = OpinionMode::kProduct;

  std::uint64_t max_updates = std::numeric_limits<std::uint64_t>::max();
  double max_time = std::numeric_limits<double>::infinity();

  std::uint64_t stride = 0;  // trajectory sampling stride in updates; 0 means n
  bool record_triples = false;
  // Additional update counts at which D_max is recorded.
  std::vector<std::uint64_t> dmax_checkpoints;

  void validate() const;
  double vote_probability() const;
  std::uint64_t effective_stride() const { return stride == 0 ? n : stride; }
};

enum class EventKind {
  kVote,
  kRewire,
  kBlocked,
  // the continuous-time holding time overshot the horizon; nothing changed
  kCensored,
};

struct StepEvent {
  EventKind kind = EventKind::kBlocked;
  Vertex actor = 0;    // x: imitates or rewires
  Vertex partner = 0;  // y: the other end of the chosen discordant edge
  Vertex target = 0;   // z, for rewires
  double dt = 0.0;
  std::uint64_t updates = 1;  // updates consumed, including concordant no-ops
};

// One update. Randomness is consumed in a fixed order: clock draw (ctmc
// holding time or uniform-edge skip count), discordant edge index,
// orientation coin (true: the endpoint in state 1 acts), event uniform,
// then rewiring target draws.
// With a finite horizon and a continuous clock, a holding time beyond it
// returns kCensored without touching the graph (exact by memorylessness).
// Pre: g has at least one discordant edge.
StepEvent step(OpinionGraph& g, const ModelParams& params, Rng& rng,
               double horizon = std::numeric_limits<double>::infinity());

struct DmaxSample {
  std::uint64_t updates = 0;
  std::uint64_t dmax = 0;
};

struct RunResult {
  bool absorbed = false;
  std::uint64_t updates = 0;
  double time = 0.0;
  std::int64_t final_n1 = 0;
  std::int64_t final_n10 = 0;
  std::size_t n = 0;
  double mean_degree = 0.0;
  Trajectory trajectory;
  std::vector<DmaxSample> dmax_history;
  std::uint64_t votes = 0;
  std::uint64_t rewires = 0;
  std::uint64_t blocked = 0;

  // counter construction only
  std::uint64_t stubborn = 0;
  std::uint64_t x_pool_draws = 0;
  std::uint64_t x_prime_pool_draws = 0;
  std::uint64_t vertex_stream_used = 0;
};

OpinionGraph initial_graph(const ModelParams& params, Seed seed, std::uint64_t replica = 0);

// Builds the initial graph from the (seed, replica) streams and runs to the
// stop condition. Reproducible per (seed, replica).
RunResult run(const ModelParams& params, Seed seed, std::uint64_t replica = 0);

// Runs an existing graph in place.
RunResult run_from(OpinionGraph& g, const ModelParams& params, Rng& rng);

struct CounterConfig {
  double stubborn_factor = 20.0;  // X > stubborn_factor * L is stubborn
  double s_degree_factor = 11.0;  // S = {v : initial degree <= s_degree_factor * L}
  bool skip_rule = true;          // skip stream vertices equal or adjacent to v
};

// The counter-based construction: per-vertex geometric(nu/L) counters decide
// vote vs rewire, rewiring targets come from a uniform vertex stream.
RunResult run_counter_construction(const ModelParams& params, const CounterConfig& config,
                                   Seed seed, std::uint64_t replica = 0);

// True iff D_max(floor(t n L)) <= (1 + eps + t) L.
// Throws InsufficientHistory if that update count was not recorded.
bool d_max_check(const RunResult& result, double t, double eps);

// (nu/60) exp(-21 nu)
double p_threshold(double nu);

std::string to_string(Clock clock);
std::string to_string(RewireMode mode);
std::string to_string(TargetRule rule);
Clock parse_clock(const std::string& s);
RewireMode parse_rewire_mode(const std::string& s);
TargetRule parse_target_rule(const std::string& s);

}  // namespace evoter
