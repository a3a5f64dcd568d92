#include "evoter/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evoter/errors.hpp"

namespace evoter {

TrajectoryRow snapshot_row(const OpinionGraph& g, std::uint64_t updates, double time,
                           bool with_triples) {
  const PairCounts& c = g.pair_counts();
  TrajectoryRow row;
  row.updates = updates;
  row.time = time;
  row.n1 = c.n1;
  row.n10 = c.n10;
  row.n11 = c.n11;
  row.n00 = c.n00;
  row.dmax = g.max_degree();
  if (with_triples) row.triples = triple_counts(g);
  return row;
}

void ModelParams::validate() const {
  if (n == 0) throw InvalidInput("n must be positive");
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidInput("L must be positive");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw InvalidInput("nu must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("p must lie in [0, 1]");
  if (nu / L > 1.0) throw InvalidInput("nu/L must be <= 1");
  if (initial_graph == InitialGraph::kRegular) {
    if (L != std::floor(L)) throw InvalidInput("regular graphs need an integer L");
    const auto deg = static_cast<std::size_t>(L);
    if (deg >= n) throw InvalidInput("regular graphs need L < n");
    if ((n * deg) % 2 != 0) throw InvalidInput("regular graphs need n*L even");
  } else if (L > static_cast<double>(n - 1)) {
    throw InvalidInput("mean degree must be <= n-1");
  }
  if (!(max_time > 0.0)) throw InvalidInput("max_time must be positive");
}

double ModelParams::vote_probability() const {
  const double r = nu / L;
  return legacy_rates ? r / (1.0 + r) : r;
}

namespace {

// Rejection pays off while at least a quarter of the pool is eligible.
constexpr std::size_t kRejectionRatio = 4;

std::optional<Vertex> target_to_random(const OpinionGraph& g, Vertex x, TargetRule rule,
                                       Rng& rng) {
  const std::size_t n = g.vertex_count();
  if (rule == TargetRule::kUniformAll) {
    const auto z = static_cast<Vertex>(rng.below(n));
    if (z == x || g.has_edge(x, z)) return std::nullopt;
    return z;
  }
  const std::size_t eligible = n - 1 - g.degree(x);
  if (eligible == 0) return std::nullopt;
  if (eligible * kRejectionRatio >= n) {
    for (;;) {
      const auto z = static_cast<Vertex>(rng.below(n));
      if (z != x && !g.has_edge(x, z)) return z;
    }
  }
  std::uint64_t k = rng.below(eligible);
  for (Vertex z = 0; z < n; ++z) {
    if (z == x || g.has_edge(x, z)) continue;
    if (k-- == 0) return z;
  }
  throw ContractError("eligible target count out of sync");
}

std::optional<Vertex> target_to_same(const OpinionGraph& g, Vertex x, TargetRule rule,
                                     Rng& rng) {
  const Opinion o = g.opinion(x);
  const std::size_t size = g.class_size(o);
  if (rule == TargetRule::kUniformAll) {
    const Vertex z = g.class_member(o, rng.below(size));
    if (z == x || g.has_edge(x, z)) return std::nullopt;
    return z;
  }
  const std::size_t same_nbrs = o == 1 ? g.ones_around(x) : g.zeros_around(x);
  const std::size_t eligible = size - 1 - same_nbrs;
  if (eligible == 0) return std::nullopt;
  if (eligible * kRejectionRatio >= size) {
    for (;;) {
      const Vertex z = g.class_member(o, rng.below(size));
      if (z != x && !g.has_edge(x, z)) return z;
    }
  }
  std::uint64_t k = rng.below(eligible);
  for (std::size_t i = 0; i < size; ++i) {
    const Vertex z = g.class_member(o, i);
    if (z == x || g.has_edge(x, z)) continue;
    if (k-- == 0) return z;
  }
  throw ContractError("eligible target count out of sync");
}

std::optional<Vertex> pick_target(const OpinionGraph& g, Vertex x, const ModelParams& params,
                                  Rng& rng) {
  return params.rewire_mode == RewireMode::kToRandom
             ? target_to_random(g, x, params.target_rule, rng)
             : target_to_same(g, x, params.target_rule, rng);
}

}  // namespace

StepEvent step(OpinionGraph& g, const ModelParams& params, Rng& rng, double horizon) {
  const PairCounts& c = g.pair_counts();
  if (c.n10 == 0) throw ContractError("step: no discordant edges");

  StepEvent ev;
  switch (params.clock) {
    case Clock::kCtmc:
    case Clock::kSilk:
      ev.dt = rng.exponential(2.0 * static_cast<double>(c.n10));
      if (ev.dt > horizon) {
        ev.kind = EventKind::kCensored;
        return ev;
      }
      break;
    case Clock::kDiscreteEfficient:
      ev.dt = 1.0 / static_cast<double>(g.degree_sum());
      break;
    case Clock::kDiscreteUniformEdge: {
      const double hit = static_cast<double>(c.n10) / static_cast<double>(g.edge_count());
      ev.updates = 1 + rng.geometric(hit);
      ev.dt = static_cast<double>(ev.updates) / static_cast<double>(g.degree_sum());
      break;
    }
  }

  const Edge e = g.discordant_edges()[rng.below(static_cast<std::uint64_t>(c.n10))];
  const bool ones_act = rng.coin();
  const bool a_is_one = g.opinion(e.a) == 1;
  ev.actor = (ones_act == a_is_one) ? e.a : e.b;
  ev.partner = ev.actor == e.a ? e.b : e.a;

  if (rng.uniform() < params.vote_probability()) {
    g.flip(ev.actor);
    ev.kind = EventKind::kVote;
    return ev;
  }
  const auto z = pick_target(g, ev.actor, params, rng);
  if (!z) {
    ev.kind = EventKind::kBlocked;
    return ev;
  }
  g.rewire(ev.actor, ev.partner, *z);
  ev.target = *z;
  ev.kind = EventKind::kRewire;
  return ev;
}

OpinionGraph initial_graph(const ModelParams& params, Seed seed, std::uint64_t replica) {
  params.validate();
  Rng graph_rng(seed, replica, Stream::kGraph);
  OpinionGraph g = params.initial_graph == InitialGraph::kRegular
                       ? build_regular(params.n, static_cast<std::size_t>(params.L), graph_rng)
                       : build_er(params.n, params.L, graph_rng);
  Rng opinion_rng(seed, replica, Stream::kOpinions);
  assign_opinions(g, params.p, params.opinion_mode, opinion_rng);
  return g;
}

namespace {

// Shared bookkeeping for trajectory rows and D_max checkpoints.
class Recorder {
 public:
  Recorder(const OpinionGraph& g, const ModelParams& params, RunResult& out)
      : g_(g), params_(params), out_(out), stride_(params.effective_stride()) {
    checkpoints_ = params.dmax_checkpoints;
    std::sort(checkpoints_.begin(), checkpoints_.end());
    checkpoints_.erase(std::unique(checkpoints_.begin(), checkpoints_.end()), checkpoints_.end());
    out_.n = g.vertex_count();
    out_.mean_degree = g.vertex_count() == 0 ? 0.0
                                             : static_cast<double>(g.degree_sum()) /
                                                   static_cast<double>(g.vertex_count());
    out_.trajectory.n = out_.n;
    out_.trajectory.mean_degree = out_.mean_degree;
    record(0, 0.0);
  }

  // Called before an update that would take the counter past `updates`.
  void before_advance(std::uint64_t updates, std::uint64_t next) {
    while (next_checkpoint_ < checkpoints_.size() && checkpoints_[next_checkpoint_] < next) {
      if (checkpoints_[next_checkpoint_] >= updates) push_dmax(checkpoints_[next_checkpoint_]);
      ++next_checkpoint_;
    }
  }

  void after_advance(std::uint64_t updates, double time) {
    if (updates >= next_row_) record(updates, time);
  }

  void finish(std::uint64_t updates, double time) {
    if (out_.trajectory.rows.back().updates != updates) record(updates, time);
    // the graph no longer changes, so later checkpoints share the final D_max
    if (out_.absorbed) {
      for (; next_checkpoint_ < checkpoints_.size(); ++next_checkpoint_) {
        push_dmax(checkpoints_[next_checkpoint_]);
      }
    }
  }

 private:
  void record(std::uint64_t updates, double time) {
    out_.trajectory.rows.push_back(snapshot_row(g_, updates, time, params_.record_triples));
    push_dmax(updates);
    next_row_ = (updates / stride_ + 1) * stride_;
  }

  void push_dmax(std::uint64_t updates) {
    auto& h = out_.dmax_history;
    if (!h.empty() && h.back().updates == updates) return;
    h.push_back({updates, g_.max_degree()});
  }

  const OpinionGraph& g_;
  const ModelParams& params_;
  RunResult& out_;
  std::uint64_t stride_;
  std::uint64_t next_row_ = 0;
  std::vector<std::uint64_t> checkpoints_;
  std::size_t next_checkpoint_ = 0;
};

void finalize(RunResult& out, const OpinionGraph& g, std::uint64_t updates, double time) {
  out.updates = updates;
  out.time = time;
  out.final_n1 = g.pair_counts().n1;
  out.final_n10 = g.pair_counts().n10;
}

}  // namespace

RunResult run_from(OpinionGraph& g, const ModelParams& params, Rng& rng) {
  RunResult out;
  Recorder rec(g, params, out);
  std::uint64_t updates = 0;
  double time = 0.0;
  while (g.pair_counts().n10 > 0 && updates < params.max_updates && time < params.max_time) {
    // checkpoints falling on the next update see the state before it
    rec.before_advance(updates, updates + 1);
    const StepEvent ev = step(g, params, rng, params.max_time - time);
    if (ev.kind == EventKind::kCensored) {
      time = params.max_time;
      break;
    }
    if (ev.updates > 1) {
      // concordant no-ops precede the acting update; checkpoints inside the
      // skipped stretch see the state prior to it, which we no longer have,
      // so only clock conventions without skips give exact checkpoints
      rec.before_advance(updates + 1, updates + ev.updates);
    }
    updates += ev.updates;
    time += ev.dt;
    switch (ev.kind) {
      case EventKind::kVote: ++out.votes; break;
      case EventKind::kRewire: ++out.rewires; break;
      case EventKind::kBlocked: ++out.blocked; break;
      case EventKind::kCensored: break;
    }
    rec.after_advance(updates, time);
  }
  out.absorbed = g.pair_counts().n10 == 0;
  rec.finish(updates, time);
  finalize(out, g, updates, time);
  return out;
}

RunResult run(const ModelParams& params, Seed seed, std::uint64_t replica) {
  OpinionGraph g = initial_graph(params, seed, replica);
  Rng rng(seed, replica, Stream::kDynamics);
  return run_from(g, params, rng);
}

RunResult run_counter_construction(const ModelParams& params, const CounterConfig& config,
                                   Seed seed, std::uint64_t replica) {
  params.validate();
  if (params.clock != Clock::kDiscreteEfficient) {
    throw InvalidInput("counter construction runs on the discrete efficient clock");
  }
  if (!(config.stubborn_factor > 0.0) || !(config.s_degree_factor > 0.0)) {
    throw InvalidInput("counter thresholds must be positive");
  }
  OpinionGraph g = initial_graph(params, seed, replica);
  const std::size_t n = g.vertex_count();
  const double q = params.nu / params.L;
  const double stubborn_cut = config.stubborn_factor * params.L;
  const double s_cut = config.s_degree_factor * params.L;

  Rng dyn(seed, replica, Stream::kDynamics);
  Rng x_pool(seed, replica, Stream::kCounterX);
  Rng x_prime_pool(seed, replica, Stream::kCounterXPrime);
  Rng w_stream(seed, replica, Stream::kVertexStream);

  RunResult out;
  std::vector<char> in_s(n);
  for (Vertex v = 0; v < n; ++v) in_s[v] = static_cast<double>(g.degree(v)) <= s_cut;
  std::vector<std::uint64_t> counter(n);
  for (auto& k : counter) {
    k = x_prime_pool.geometric(q);
    ++out.x_prime_pool_draws;
  }

  Recorder rec(g, params, out);
  std::uint64_t updates = 0;
  double time = 0.0;
  const double dt = n == 0 || g.degree_sum() == 0 ? 0.0 : 1.0 / static_cast<double>(g.degree_sum());
  while (g.pair_counts().n10 > 0 && updates < params.max_updates && time < params.max_time) {
    rec.before_advance(updates, updates + 1);
    const Edge e = g.discordant_edges()[dyn.below(static_cast<std::uint64_t>(g.pair_counts().n10))];
    const bool ones_act = dyn.coin();
    const Vertex v = (ones_act == (g.opinion(e.a) == 1)) ? e.a : e.b;
    const Vertex u = v == e.a ? e.b : e.a;

    if (counter[v] == 0) {
      const bool from_x = in_s[v] && g.opinion(v) == 0;
      g.flip(v);
      ++out.votes;
      if (from_x) {
        counter[v] = x_pool.geometric(q);
        ++out.x_pool_draws;
        if (static_cast<double>(counter[v]) > stubborn_cut) ++out.stubborn;
      } else {
        counter[v] = x_prime_pool.geometric(q);
        ++out.x_prime_pool_draws;
      }
    } else {
      --counter[v];
      std::optional<Vertex> target;
      if (config.skip_rule) {
        if (g.degree(v) + 1 < n) {
          for (;;) {
            const auto w = static_cast<Vertex>(w_stream.below(n));
            ++out.vertex_stream_used;
            if (w != v && !g.has_edge(v, w)) {
              target = w;
              break;
            }
          }
        }
      } else {
        const auto w = static_cast<Vertex>(w_stream.below(n));
        ++out.vertex_stream_used;
        if (w != v && !g.has_edge(v, w)) target = w;
      }
      if (target) {
        g.rewire(v, u, *target);
        ++out.rewires;
      } else {
        ++out.blocked;
      }
    }
    ++updates;
    time += dt;
    rec.after_advance(updates, time);
  }
  out.absorbed = g.pair_counts().n10 == 0;
  rec.finish(updates, time);
  finalize(out, g, updates, time);
  return out;
}

bool d_max_check(const RunResult& result, double t, double eps) {
  if (!(t >= 0.0) || !(eps >= 0.0)) throw InvalidInput("t and eps must be >= 0");
  const double L = result.mean_degree;
  const auto m = static_cast<std::uint64_t>(
      std::floor(t * static_cast<double>(result.n) * L));
  std::optional<std::uint64_t> dmax;
  for (const DmaxSample& s : result.dmax_history) {
    if (s.updates == m) dmax = s.dmax;
  }
  if (!dmax && result.absorbed && result.updates <= m && !result.dmax_history.empty()) {
    dmax = result.dmax_history.back().dmax;
  }
  if (!dmax) {
    throw InsufficientHistory("D_max was not recorded at update " + std::to_string(m));
  }
  return static_cast<double>(*dmax) <= (1.0 + eps + t) * L;
}

double p_threshold(double nu) {
  if (!(nu > 0.0)) throw InvalidInput("p_threshold needs nu > 0");
  return nu / 60.0 * std::exp(-21.0 * nu);
}

std::string to_string(Clock clock) {
  switch (clock) {
    case Clock::kCtmc: return "ctmc";
    case Clock::kDiscreteEfficient: return "discrete_efficient";
    case Clock::kDiscreteUniformEdge: return "discrete_uniform_edge";
    case Clock::kSilk: return "silk";
  }
  return "?";
}

std::string to_string(RewireMode mode) {
  return mode == RewireMode::kToRandom ? "to_random" : "to_same";
}

std::string to_string(TargetRule rule) {
  return rule == TargetRule::kUniformAll ? "uniform_all" : "exclude_neighbors";
}

Clock parse_clock(const std::string& s) {
  if (s == "ctmc") return Clock::kCtmc;
  if (s == "discrete_efficient") return Clock::kDiscreteEfficient;
  if (s == "discrete_uniform_edge") return Clock::kDiscreteUniformEdge;
  if (s == "silk") return Clock::kSilk;
  throw InvalidInput("unknown clock '" + s + "'");
}

RewireMode parse_rewire_mode(const std::string& s) {
  if (s == "to_random") return RewireMode::kToRandom;
  if (s == "to_same") return RewireMode::kToSame;
  throw InvalidInput("unknown rewire mode '" + s + "'");
}

TargetRule parse_target_rule(const std::string& s) {
  if (s == "uniform_all") return TargetRule::kUniformAll;
  if (s == "exclude_neighbors") return TargetRule::kExcludeNeighbors;
  throw InvalidInput("unknown target rule '" + s + "'");
}

}  // namespace evoter
