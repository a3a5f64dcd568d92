#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "evoter/ame.hpp"
#include "evoter/dynamics.hpp"
#include "evoter/errors.hpp"
#include "evoter/generators.hpp"
#include "evoter/graph_io.hpp"
#include "evoter/moments.hpp"
#include "evoter/oracle.hpp"
#include "evoter/pair_approx.hpp"
#include "evoter/stats.hpp"

namespace evoter::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Options every subcommand accepts.
struct Common {
  Seed seed = 1;
  int replicas = 1;
  int jobs = 1;
  std::string out;  // output prefix; empty prints the main table to stdout
  std::string config;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "64-bit seed");
  app->add_option("--replicas", c.replicas, "independent replicas")->check(CLI::PositiveNumber);
  app->add_option("--jobs", c.jobs, "parallel workers")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output path prefix");
  app->add_option("--config", c.config, "JSON config file; flags override its values");
}

struct ModelFlags {
  ModelParams p;
  std::string clock = "discrete_efficient";
  std::string rewire = "to_random";
  std::string target = "exclude_neighbors";
  std::string initial = "regular";
  std::string opinions = "product";
  double max_updates = -1.0;  // negative: unlimited
  double max_time = std::numeric_limits<double>::infinity();
  double stride = 0.0;

  ModelParams resolve() const {
    ModelParams m = p;
    m.clock = parse_clock(clock);
    m.rewire_mode = parse_rewire_mode(rewire);
    m.target_rule = parse_target_rule(target);
    if (initial == "regular") m.initial_graph = InitialGraph::kRegular;
    else if (initial == "er") m.initial_graph = InitialGraph::kErdosRenyi;
    else throw InvalidInput("unknown initial graph '" + initial + "'");
    if (opinions == "product") m.opinion_mode = OpinionMode::kProduct;
    else if (opinions == "exact") m.opinion_mode = OpinionMode::kExactCount;
    else throw InvalidInput("unknown opinion mode '" + opinions + "'");
    if (max_updates >= 0.0) {
      if (!(max_updates < 1.8e19)) throw InvalidInput("--max-updates out of range");
      m.max_updates = static_cast<std::uint64_t>(max_updates);
    }
    m.max_time = max_time;
    if (!(stride >= 0.0)) throw InvalidInput("--stride must be >= 0");
    m.stride = static_cast<std::uint64_t>(stride);
    m.validate();
    return m;
  }
};

void add_model(CLI::App* app, ModelFlags& f) {
  app->add_option("--n", f.p.n, "vertices");
  app->add_option("--L", f.p.L, "mean degree");
  app->add_option("--nu", f.p.nu, "vote parameter");
  app->add_option("--p", f.p.p, "initial density of opinion 1");
  app->add_option("--clock", f.clock, "ctmc | discrete_efficient | discrete_uniform_edge | silk");
  app->add_option("--rewire", f.rewire, "to_random | to_same");
  app->add_option("--target", f.target, "exclude_neighbors | uniform_all");
  app->add_option("--initial", f.initial, "regular | er");
  app->add_option("--opinions", f.opinions, "product | exact");
  app->add_option("--max-updates", f.max_updates, "update budget (accepts 2e8)");
  app->add_option("--max-time", f.max_time, "continuous-time budget");
  app->add_option("--stride", f.stride, "trajectory stride in updates (0: n)");
  app->add_flag("--triples", f.p.record_triples, "record triple counts");
  app->add_flag("--legacy-rates", f.p.legacy_rates, "vote w.p. (nu/L)/(1+nu/L)");
}

// Runs f(replica) for every replica on up to `jobs` threads; results are
// ordered by replica index.
template <class F>
auto for_replicas(int replicas, int jobs, F&& f) {
  using T = decltype(f(0));
  std::vector<T> results(static_cast<std::size_t>(replicas));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    for (int i = next++; i < replicas; i = next++) {
      try {
        results[static_cast<std::size_t>(i)] = f(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min(jobs, replicas));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

void write_json(const std::string& path, const json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

json fit_json(const ArchFit& fit) {
  json j{{"A", fit.A}, {"B", fit.B}, {"rms", fit.rms}, {"points", fit.points}};
  if (fit.roots) j["roots"] = {fit.roots->first, fit.roots->second};
  else j["roots"] = nullptr;
  return j;
}

json run_json(const RunResult& r) {
  return {{"absorbed", r.absorbed},   {"updates", r.updates},     {"time", r.time},
          {"final_n1", r.final_n1},   {"final_n10", r.final_n10}, {"n", r.n},
          {"mean_degree", r.mean_degree}, {"votes", r.votes},     {"rewires", r.rewires},
          {"blocked", r.blocked},     {"rows", r.trajectory.rows.size()}};
}

json params_json(const ModelParams& p) {
  return {{"n", p.n},
          {"L", p.L},
          {"nu", p.nu},
          {"p", p.p},
          {"clock", to_string(p.clock)},
          {"rewire", to_string(p.rewire_mode)},
          {"target", to_string(p.target_rule)},
          {"initial", p.initial_graph == InitialGraph::kRegular ? "regular" : "er"},
          {"legacy_rates", p.legacy_rates}};
}

std::string replica_path(const std::string& prefix, int replicas, int k, const std::string& ext) {
  if (replicas == 1) return prefix + ext;
  return prefix + ".r" + std::to_string(k) + ext;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Common& c, const ModelFlags& f, std::ostream& out) {
  const ModelParams p = f.resolve();
  if (c.out.empty() && c.replicas > 1) throw InvalidInput("--replicas > 1 needs --out");
  auto runs = for_replicas(c.replicas, c.jobs, [&](int k) {
    return run(p, c.seed, static_cast<std::uint64_t>(k));
  });
  if (c.out.empty()) {
    write_trajectory_csv(out, runs[0].trajectory);
    return kExitOk;
  }
  json j{{"schema_version", kSchemaVersion}, {"command", "simulate"}, {"seed", c.seed},
         {"params", params_json(p)}, {"replicas", json::array()}};
  for (int k = 0; k < c.replicas; ++k) {
    auto csv = open_out(replica_path(c.out, c.replicas, k, ".csv"));
    write_trajectory_csv(csv, runs[static_cast<std::size_t>(k)].trajectory);
    j["replicas"].push_back(run_json(runs[static_cast<std::size_t>(k)]));
  }
  write_json(c.out + ".json", j);
  return kExitOk;
}

// -------------------------------------------------------------------- arch

struct ArchFlags {
  std::string trajectory;  // fit a saved trajectory CSV
  std::string points;      // fit raw x,y points
  std::string scale = "edge_fraction";
  double burn_in = 0.1;
};

std::vector<Point> read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path);
  std::vector<Point> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Point pt;
    if (std::sscanf(line.c_str(), "%lf,%lf", &pt.x, &pt.y) != 2) continue;  // header
    pts.push_back(pt);
  }
  return pts;
}

int cmd_arch(const Common& c, const ModelFlags& f, const ArchFlags& a, std::ostream& out) {
  ArchScale scale;
  if (a.scale == "edge_fraction") scale = ArchScale::kEdgeFraction;
  else if (a.scale == "per_degree") scale = ArchScale::kPerDegree;
  else throw InvalidInput("unknown arch scale '" + a.scale + "'");
  if (!(a.burn_in >= 0.0 && a.burn_in < 1.0)) throw InvalidInput("--burn-in must lie in [0, 1)");

  json j{{"schema_version", kSchemaVersion}, {"command", "arch"}, {"scale", a.scale}};
  if (!a.points.empty()) {
    j["source"] = a.points;
    j["fit"] = fit_json(fit_arch(read_points_csv(a.points)));
  } else if (!a.trajectory.empty()) {
    std::ifstream in(a.trajectory);
    if (!in) throw InvalidInput("cannot read " + a.trajectory);
    const auto t = read_trajectory_csv(in, f.p.n, f.p.L);
    j["source"] = a.trajectory;
    j["fit"] = fit_json(fit_arch(arch_points(t, scale, a.burn_in)));
  } else {
    const ModelParams p = f.resolve();
    auto pts = for_replicas(c.replicas, c.jobs, [&](int k) {
      return arch_points(run(p, c.seed, static_cast<std::uint64_t>(k)).trajectory, scale,
                         a.burn_in);
    });
    j["seed"] = c.seed;
    j["params"] = params_json(p);
    j["replicas"] = json::array();
    std::vector<Point> pooled;
    for (const auto& v : pts) {
      try {
        j["replicas"].push_back(fit_json(fit_arch(v)));
      } catch (const FitError& e) {
        j["replicas"].push_back({{"error", e.what()}});
      }
      pooled.insert(pooled.end(), v.begin(), v.end());
    }
    j["fit"] = fit_json(fit_arch(pooled));
  }
  if (c.out.empty()) out << j.dump(2) << '\n';
  else write_json(c.out + ".json", j);
  return kExitOk;
}

// ------------------------------------------------------------------ table1

struct Table1Flags {
  bool use_paper_ub = false;
  bool resimulate = false;
  std::string nu_list;  // comma separated; "all" means the six table values
  std::size_t n = 1600;
  double L = 40;
  double burn = 10.0;      // in units of n L updates
  int samples = 20;        // snapshots, spacing n L updates apart
  double spacing = 0.25;   // in units of n L updates
  double window = 0.05;    // keep snapshots with |N1/n - 1/2| <= window
};

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw InvalidInput("bad number '" + tok + "'");
    }
  }
  return v;
}

// Quasi-stationary moments at p = 1/2, sampled while the magnetization stays
// near 1/2 (the walk along the arch lowers N10 away from the middle); empty
// if no snapshot qualified.
std::optional<Table1Row> simulate_moments(double nu, const Table1Flags& t, const Common& c) {
  ModelParams p;
  p.n = t.n;
  p.L = t.L;
  p.nu = nu;
  p.p = 0.5;
  p.opinion_mode = OpinionMode::kExactCount;
  p.stride = std::numeric_limits<std::uint32_t>::max();
  p.validate();
  const auto nL = static_cast<std::uint64_t>(static_cast<double>(p.n) * p.L);
  using Acc = std::pair<int, Table1Row>;
  auto acc = for_replicas(c.replicas, c.jobs, [&](int k) {
    OpinionGraph g = initial_graph(p, c.seed, static_cast<std::uint64_t>(k));
    Rng rng(c.seed, static_cast<std::uint64_t>(k), Stream::kDynamics);
    ModelParams q = p;
    q.max_updates = static_cast<std::uint64_t>(t.burn * static_cast<double>(nL));
    Acc a{0, Table1Row{nu, 0, 0, 0, 0}};
    if (run_from(g, q, rng).absorbed) return a;
    q.max_updates = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(t.spacing * double(nL)));
    for (int s = 0; s < t.samples; ++s) {
      if (run_from(g, q, rng).absorbed) break;
      const double x = static_cast<double>(g.class_size(1)) / static_cast<double>(p.n);
      if (std::abs(x - 0.5) > t.window) continue;
      const MomentState m = symmetrized_moments(g, p.L, nu);
      ++a.first;
      a.second.Ub += m.Ub;
      a.second.Uab += m.Uab;
      a.second.Ubb += m.Ubb;
      a.second.Uaa += m.Uaa;
    }
    return a;
  });
  Table1Row row{nu, 0, 0, 0, 0};
  int count = 0;
  for (const auto& [k, r] : acc) {
    count += k;
    row.Ub += r.Ub;
    row.Uab += r.Uab;
    row.Ubb += r.Ubb;
    row.Uaa += r.Uaa;
  }
  if (count == 0) return std::nullopt;
  row.Ub /= count;
  row.Uab /= count;
  row.Ubb /= count;
  row.Uaa /= count;
  return row;
}

int cmd_table1(const Common& c, const Table1Flags& t, std::ostream& out) {
  if (t.use_paper_ub == t.resimulate) {
    throw InvalidInput("choose exactly one of --use-paper-ub and --resimulate");
  }
  const auto& ref = table1_reference();
  std::vector<double> nus;
  if (t.nu_list == "all") {
    for (const auto& r : ref) nus.push_back(r.nu);
  } else {
    nus = parse_list(t.nu_list);
  }
  std::vector<Table1Prediction> rows;
  json skipped = json::array();
  for (double nu : nus) {
    if (t.use_paper_ub) {
      auto it = std::find_if(ref.begin(), ref.end(),
                             [&](const Table1Row& r) { return std::abs(r.nu - nu) < 1e-9; });
      if (it == ref.end()) {
        throw InvalidInput("no reference Ub for nu = " + std::to_string(nu));
      }
      rows.push_back({*it, derive_from_Ub(it->Ub, it->nu)});
    } else {
      auto sim = simulate_moments(nu, t, c);
      if (!sim) {
        skipped.push_back(nu);
        continue;
      }
      rows.push_back({*sim, derive_from_Ub(sim->Ub, nu)});
    }
  }
  if (c.out.empty()) {
    write_table1_csv(out, rows);
  } else {
    auto csv = open_out(c.out + ".csv");
    write_table1_csv(csv, rows);
    write_json(c.out + ".json", {{"schema_version", kSchemaVersion},
                                 {"command", "table1"},
                                 {"mode", t.use_paper_ub ? "paper_ub" : "resimulate"},
                                 {"seed", c.seed},
                                 {"replicas", c.replicas},
                                 {"rows", rows.size()},
                                 {"absorbed_nu", skipped}});
  }
  return kExitOk;
}

// --------------------------------------------------------------------- ame

struct AmeFlags {
  AmeParams p;
  bool has_delta = false;
  bool has_eps = false;
  std::string mode = "fixed";  // fixed | forward | backward | stationary
  double T = 100.0;
  std::vector<double> z0{0.5, 0.5};
  std::vector<double> w0{2.0, 2.0};
  int plane = 1;
  int cycles = 50;
  double record_dt = 0.0;
  int bins = 100;
  std::string method = "time_average";
  double budget = 1000.0;
};

json plane_json(const PlaneSystem& s) {
  return {{"plane", s.plane},
          {"A", {{s.A(0, 0), s.A(0, 1)}, {s.A(1, 0), s.A(1, 1)}}},
          {"c", {s.c(0), s.c(1)}},
          {"eigenvalues", {s.lambda1, s.lambda2}},
          {"fixed_point", {s.fixed_point(0), s.fixed_point(1)}}};
}

Vec2 vec_of(const std::vector<double>& v, const char* name) {
  if (v.size() != 2) throw InvalidInput(std::string(name) + " needs two values");
  return Vec2(v[0], v[1]);
}

void write_or_print(const Common& c, std::ostream& out, const json& j) {
  if (c.out.empty()) out << j.dump(2) << '\n';
  else write_json(c.out + ".json", j);
}

int cmd_ame(const Common& c, AmeFlags a, std::ostream& out) {
  if (!a.has_delta) a.p.bar_delta = a.p.bar_alpha;
  if (!a.has_eps) a.p.bar_eps = a.p.bar_beta;
  a.p.validate();
  json j{{"schema_version", kSchemaVersion},
         {"command", "ame"},
         {"mode", a.mode},
         {"params",
          {{"alpha", a.p.bar_alpha}, {"beta", a.p.bar_beta}, {"delta", a.p.bar_delta},
           {"eps", a.p.bar_eps}, {"eta", a.p.bar_eta}, {"nu", a.p.nu}, {"p", a.p.p}}},
         {"planes", {plane_json(plane_system(0, a.p)), plane_json(plane_system(1, a.p))}}};
  if (a.mode == "fixed") {
    write_or_print(c, out, j);
    return kExitOk;
  }
  if (a.mode == "forward") {
    if (a.plane != 0 && a.plane != 1) throw InvalidInput("--plane must be 0 or 1");
    ForwardOptions opt;
    opt.record_dt = a.record_dt;
    opt.bins = a.bins;
    const auto res = for_replicas(c.replicas, c.jobs, [&](int k) {
      return forward_simulate(a.p, vec_of(a.z0, "--z0"), a.plane, a.T, c.seed, opt,
                              static_cast<std::uint64_t>(k));
    });
    j["replicas"] = json::array();
    for (int k = 0; k < c.replicas; ++k) {
      const auto& r = res[static_cast<std::size_t>(k)];
      j["replicas"].push_back({{"jumps", r.jumps},
                               {"time_in_plane", r.time_in_plane},
                               {"mean_sojourn", r.mean_sojourn},
                               {"final_plane", r.final_plane},
                               {"final_position", {r.final_position(0), r.final_position(1)}}});
      if (!c.out.empty()) {
        if (a.record_dt > 0.0) {
          auto f = open_out(replica_path(c.out, c.replicas, k, ".path.csv"));
          write_path_csv(f, r.path);
        }
        if (a.bins > 0) {
          auto f = open_out(replica_path(c.out, c.replicas, k, ".hist.csv"));
          write_histogram_csv(f, r.histogram);
        }
      }
    }
    write_or_print(c, out, j);
    return kExitOk;
  }
  if (a.mode == "backward") {
    if (a.plane != 0 && a.plane != 1) throw InvalidInput("--plane must be 0 or 1");
    if (a.cycles <= 0) throw InvalidInput("--cycles must be positive");
    const auto res = for_replicas(c.replicas, c.jobs, [&](int k) {
      return backward_iterate(a.p, c.seed, a.cycles, vec_of(a.z0, "--z0"), vec_of(a.w0, "--w0"),
                              a.plane == 1 ? 1 : 0, static_cast<std::uint64_t>(k));
    });
    j["replicas"] = json::array();
    for (const auto& r : res) {
      j["replicas"].push_back({{"y_z", {r.y_z(0), r.y_z(1)}},
                               {"y_w", {r.y_w(0), r.y_w(1)}},
                               {"distance", r.distance}});
    }
    write_or_print(c, out, j);
    return kExitOk;
  }
  if (a.mode == "stationary") {
    StationaryMode mode;
    if (a.method == "time_average") mode = StationaryMode::kTimeAverage;
    else if (a.method == "renewal_weighted") mode = StationaryMode::kRenewalWeighted;
    else throw InvalidInput("unknown stationary method '" + a.method + "'");
    StationaryOptions opt;
    opt.bins = a.bins;
    opt.cycles = a.cycles;
    const auto est = stationary_estimate(a.p, mode, a.budget, c.seed, opt);
    j["method"] = a.method;
    j["plane1_fraction"] = est.plane1_fraction;
    j["plane1_fraction_se"] = est.plane1_fraction_se;
    j["mean_sojourn"] = est.mean_sojourn;
    j["mean_sojourn_se"] = est.mean_sojourn_se;
    j["mean_position"] = {{est.mean_position[0](0), est.mean_position[0](1)},
                          {est.mean_position[1](0), est.mean_position[1](1)}};
    if (!c.out.empty() && a.bins > 0) {
      auto f = open_out(c.out + ".hist.csv");
      write_histogram_csv(f, est.density);
    }
    write_or_print(c, out, j);
    return kExitOk;
  }
  throw InvalidInput("unknown ame mode '" + a.mode + "'");
}

// ---------------------------------------------------------------------- pa

struct PaFlags {
  double p = 0.5;
  double nu = 1.0;
  double L = 20.0;
  double T = 0.0;  // > 0 integrates the pair system
  double dt = 0.01;
  std::vector<double> init;  // n10,n11,n00 per capita; default: regular graph at p
};

int cmd_pa(const Common& c, const PaFlags& f, std::ostream& out) {
  const PaEquilibrium eq = pa_equilibrium(f.p, f.nu, f.L);
  json j{{"schema_version", kSchemaVersion},
         {"command", "pa"},
         {"p", f.p},
         {"nu", f.nu},
         {"L", f.L},
         {"nu_c", pa_nu_c(f.p)},
         {"feasible", eq.feasible},
         {"J0", eq.J0},
         {"J1", eq.J1},
         {"K0", eq.K0},
         {"K1", eq.K1}};
  if (f.T > 0.0) {
    PaState init;
    if (f.init.empty()) {
      // regular graph, product opinions
      const double q = 1.0 - f.p;
      init = {f.L * f.p * q, 0.5 * f.L * f.p * f.p, 0.5 * f.L * q * q};
    } else if (f.init.size() == 3) {
      init = {f.init[0], f.init[1], f.init[2]};
    } else {
      throw InvalidInput("--init needs n10,n11,n00");
    }
    const auto traj = pa_integrate(f.p, f.nu, f.L, init, f.T, f.dt);
    j["absorbed"] = traj.absorbed;
    const auto& last = traj.samples.back();
    j["final"] = {{"t", last.t}, {"n10", last.s.n10}, {"n11", last.s.n11}, {"n00", last.s.n00}};
    if (!c.out.empty()) {
      auto csv = open_out(c.out + ".csv");
      csv << "t,n10,n11,n00\n";
      for (const auto& s : traj.samples) {
        csv << s.t << ',' << s.s.n10 << ',' << s.s.n11 << ',' << s.s.n00 << '\n';
      }
    }
  }
  write_or_print(c, out, j);
  return kExitOk;
}

// ------------------------------------------------------------------ oracle

struct OracleFlags {
  std::string fixtures;
  std::string write_fixtures;
  std::string snapshot;
  int random = 0;
  int count = 8;  // graphs written by --write-fixtures
  std::size_t max_n = 40;
  double nu = 1.0;
  double L = 0.0;  // 0: the snapshot's mean degree
  std::string mode = "idealized_target";
};

double default_L(const OpinionGraph& g) {
  return std::max(1.0, 2.0 * static_cast<double>(g.edge_count()) /
                           static_cast<double>(g.vertex_count()));
}

json report_json(const DriftReport& r) {
  json j{{"mode", to_string(r.mode)},
         {"nu", r.nu},
         {"L", r.L},
         {"components", {"dN10", "dN11/2", "dN00/2"}},
         {"formula", r.formula},
         {"enumerated", r.enumerated},
         {"omitted", r.omitted},
         {"truncated", {r.formula[0] - r.omitted[0], r.formula[1] - r.omitted[1],
                        r.formula[2] - r.omitted[2]}},
         {"max_relative_gap", r.max_relative_gap},
         {"identity_sum_ok", verify_identity_sum(r)}};
  if (r.exact) j["exact_match"] = r.enumerated_exact == r.formula_exact;
  return j;
}

// Exact checks on one graph: formula vs sidecar (when given) and vs the
// idealized enumeration.
bool exact_checks(const OpinionGraph& g, double nu, const RationalDrift* expected) {
  const double L = default_L(g);
  const auto rep = enumerate_drift(g, std::min(nu, L), L, DriftMode::kIdealizedTarget);
  bool ok = rep.enumerated_exact == rep.formula_exact && verify_identity_sum(rep);
  if (expected) ok = ok && rep.formula_exact == *expected;
  return ok;
}

OpinionGraph random_fixture(std::size_t max_n, Rng& rng) {
  const std::size_t n = 5 + rng.below(max_n - 4);
  const double L = std::min(2.0 + static_cast<double>(rng.below(5)), double(n - 1));
  OpinionGraph g = build_er(n, L, rng);
  assign_opinions(g, 0.2 + 0.6 * rng.uniform(), OpinionMode::kProduct, rng);
  return g;
}

int cmd_oracle(const Common& c, const OracleFlags& f, std::ostream& out, std::ostream& err) {
  const int chosen = !f.fixtures.empty() + !f.write_fixtures.empty() + !f.snapshot.empty() +
                     (f.random > 0);
  if (chosen != 1) {
    throw InvalidInput("choose one of --fixtures, --write-fixtures, --snapshot, --random");
  }
  json j{{"schema_version", kSchemaVersion}, {"command", "oracle"}};
  if (!f.snapshot.empty()) {
    const OpinionGraph g = load_snapshot(f.snapshot);
    const double L = f.L > 0.0 ? f.L : default_L(g);
    j["report"] = report_json(enumerate_drift(g, f.nu, L, parse_drift_mode(f.mode)));
    write_or_print(c, out, j);
    return kExitOk;
  }
  if (!f.write_fixtures.empty()) {
    if (f.max_n < 5) throw InvalidInput("--max-n must be >= 5");
    fs::create_directories(f.write_fixtures);
    Rng rng(c.seed);
    if (f.count <= 0) throw InvalidInput("--count must be positive");
    const int count = f.count;
    for (int k = 0; k < count; ++k) {
      const OpinionGraph g = random_fixture(f.max_n, rng);
      char name[32];
      std::snprintf(name, sizeof name, "er_%02d", k);
      const fs::path base = fs::path(f.write_fixtures) / name;
      save_snapshot(fs::path(base).replace_extension(".snap"), g);
      write_drift_sidecar(fs::path(base).replace_extension(".json"), drift_formula(g));
    }
    j["written"] = count;
    write_or_print(c, out, j);
    return kExitOk;
  }
  int checked = 0;
  json failed = json::array();
  if (!f.fixtures.empty()) {
    if (!fs::is_directory(f.fixtures)) throw InvalidInput("no directory " + f.fixtures);
    std::vector<fs::path> snaps;
    for (const auto& e : fs::directory_iterator(f.fixtures)) {
      if (e.path().extension() == ".snap") snaps.push_back(e.path());
    }
    std::sort(snaps.begin(), snaps.end());
    for (const auto& s : snaps) {
      const auto expected = read_drift_sidecar(fs::path(s).replace_extension(".json"));
      ++checked;
      if (!exact_checks(load_snapshot(s), f.nu, &expected)) {
        failed.push_back(s.filename().string());
      }
    }
  } else {
    if (f.max_n < 5) throw InvalidInput("--max-n must be >= 5");
    Rng rng(c.seed);
    for (int k = 0; k < f.random; ++k) {
      ++checked;
      if (!exact_checks(random_fixture(f.max_n, rng), f.nu, nullptr)) failed.push_back(k);
    }
  }
  j["checked"] = checked;
  j["failed"] = failed;
  write_or_print(c, out, j);
  if (!failed.empty()) {
    err << failed.size() << " of " << checked << " exact drift checks failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// ------------------------------------------------------------------ nuscan

struct NuscanFlags {
  std::string grid = "0.4:2.6:0.2";
  double c_rapid = 10.0;
  double c_prolonged = 200.0;
};

std::vector<double> parse_grid(const std::string& s) {
  double lo, hi, step;
  char tail;
  if (std::sscanf(s.c_str(), "%lf:%lf:%lf%c", &lo, &hi, &step, &tail) != 3) {
    throw InvalidInput("--nu-grid wants lo:hi:step");
  }
  if (!(step > 0.0) || !(hi >= lo)) throw InvalidInput("--nu-grid needs step > 0 and hi >= lo");
  std::vector<double> v;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= count; ++i) {
    // round away accumulated binary noise so grid keys print cleanly
    v.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return v;
}

int cmd_nuscan(const Common& c, const ModelFlags& f, const NuscanFlags& s, std::ostream& out) {
  const auto grid = parse_grid(s.grid);
  ModelParams base = f.resolve();
  ClassifyConfig cc{s.c_rapid, s.c_prolonged};
  const double nL = static_cast<double>(base.n) * base.L;
  if (f.max_updates < 0.0) {
    // enough to call a run prolonged
    base.max_updates = static_cast<std::uint64_t>(std::ceil(cc.c_prolonged * nL));
  }
  struct Row {
    RunClass cls;
    RunResult res;
  };
  std::ostringstream csv;
  csv << "nu,replica,class,absorbed,updates,final_minority\n";
  std::ostringstream summary;
  summary << "nu,replicas,rapid,prolonged,indeterminate,arch_lo,arch_hi\n";
  std::map<double, std::optional<std::pair<double, double>>> arches;
  json per_nu = json::array();
  for (double nu : grid) {
    ModelParams p = base;
    p.nu = nu;
    p.validate();
    // replica streams are shared across grid points on purpose: common
    // random numbers make neighboring nu values comparable
    auto rows = for_replicas(c.replicas, c.jobs, [&](int k) {
      Row r;
      r.res = run(p, c.seed, static_cast<std::uint64_t>(k));
      r.cls = classify_run(r.res, p.n, p.L, cc);
      return r;
    });
    int counts[3] = {0, 0, 0};
    std::vector<Point> pooled;
    for (int k = 0; k < c.replicas; ++k) {
      const auto& r = rows[static_cast<std::size_t>(k)];
      const double n1 = static_cast<double>(r.res.final_n1) / static_cast<double>(p.n);
      char line[160];
      std::snprintf(line, sizeof line, "%.12g,%d,%s,%d,%llu,%.6f\n", nu, k,
                    to_string(r.cls).c_str(), r.res.absorbed ? 1 : 0,
                    static_cast<unsigned long long>(r.res.updates), std::min(n1, 1.0 - n1));
      csv << line;
      ++counts[static_cast<int>(r.cls)];
      if (r.cls == RunClass::kProlonged) {
        const auto pts = arch_points(r.res.trajectory);
        pooled.insert(pooled.end(), pts.begin(), pts.end());
      }
    }
    std::optional<std::pair<double, double>> roots;
    if (pooled.size() >= 3) {
      try {
        roots = fit_arch(pooled).roots;
      } catch (const FitError&) {
      }
    }
    arches[nu] = roots;
    char line[200];
    std::snprintf(line, sizeof line, "%.12g,%d,%d,%d,%d,", nu, c.replicas, counts[0], counts[1],
                  counts[2]);
    summary << line;
    if (roots) {
      std::snprintf(line, sizeof line, "%.6f,%.6f\n", roots->first, roots->second);
      summary << line;
    } else {
      summary << ",\n";
    }
    per_nu.push_back({{"nu", nu},
                      {"rapid", counts[0]},
                      {"prolonged", counts[1]},
                      {"indeterminate", counts[2]},
                      {"arch", roots ? json{roots->first, roots->second} : json(nullptr)}});
  }
  if (c.out.empty()) {
    out << csv.str();
    return kExitOk;
  }
  auto f1 = open_out(c.out + ".csv");
  f1 << csv.str();
  auto f2 = open_out(c.out + ".summary.csv");
  f2 << summary.str();
  const auto est = arch_endpoints_to_nu_c(base.p, arches);
  write_json(c.out + ".json", {{"schema_version", kSchemaVersion},
                               {"command", "nuscan"},
                               {"seed", c.seed},
                               {"params", params_json(base)},
                               {"grid", per_nu},
                               {"nu_c", est.nu_c ? json(*est.nu_c) : json(nullptr)},
                               {"censored", est.censored}});
  return kExitOk;
}

// ------------------------------------------------------------------ config

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Splices values from a JSON config file into the argument list. Keys may be
// top level or nested under the subcommand name; explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput("bad config " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw InvalidInput("config must be a JSON object");
  const std::string& sub = args[0];
  json merged = json::object();
  for (auto& [k, v] : cfg.items()) {
    if (!v.is_object()) merged[k] = v;
  }
  if (cfg.contains(sub) && cfg[sub].is_object()) {
    for (auto& [k, v] : cfg[sub].items()) merged[k] = v;
  }
  std::vector<std::string> extra;
  for (auto& [k, v] : merged.items()) {
    const std::string flag = flag_name(k);
    if (flag == "--config" || given(args, flag)) continue;
    if (v.is_boolean()) {
      if (v.get<bool>()) extra.push_back(flag);
    } else if (v.is_array()) {
      extra.push_back(flag);
      for (const auto& e : v) extra.push_back(scalar_text(e));
    } else if (!v.is_null()) {
      extra.push_back(flag);
      extra.push_back(scalar_text(v));
    }
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evolving voter model simulator and analysis toolkit", "evoter"};
  app.require_subcommand(1);

  Common common;
  ModelFlags model;
  ArchFlags arch;
  Table1Flags table;
  AmeFlags ame;
  PaFlags pa;
  OracleFlags oracle;
  NuscanFlags nuscan;

  auto* sim = app.add_subcommand("simulate", "run the dynamics; trajectory CSV + run JSON");
  add_common(sim, common);
  add_model(sim, model);

  auto* arc = app.add_subcommand("arch", "fit the arch to a fresh or saved trajectory");
  add_common(arc, common);
  add_model(arc, model);
  arc->add_option("--trajectory", arch.trajectory, "trajectory CSV (with --n and --L)");
  arc->add_option("--points", arch.points, "CSV of x,y points");
  arc->add_option("--scale", arch.scale, "edge_fraction | per_degree");
  arc->add_option("--burn-in", arch.burn_in, "fraction of rows dropped");

  auto* tab = app.add_subcommand("table1", "moment predictions against the reference table");
  add_common(tab, common);
  tab->add_flag("--use-paper-ub", table.use_paper_ub, "predict from the reference Ub column");
  tab->add_flag("--resimulate", table.resimulate, "measure the moments by simulation");
  table.nu_list = "all";
  tab->add_option("--nu", table.nu_list, "comma-separated nu values, or 'all'");
  tab->add_option("--n", table.n, "vertices for --resimulate");
  tab->add_option("--L", table.L, "degree for --resimulate");
  tab->add_option("--burn", table.burn, "burn-in in units of nL updates");
  tab->add_option("--samples", table.samples, "snapshots per replica");
  tab->add_option("--spacing", table.spacing, "snapshot spacing in units of nL updates");
  tab->add_option("--window", table.window, "keep snapshots with |N1/n - 1/2| <= window");

  auto* am = app.add_subcommand("ame", "two-plane system: fixed points, paths, coupling");
  add_common(am, common);
  am->add_option("--alpha", ame.p.bar_alpha);
  am->add_option("--beta", ame.p.bar_beta);
  auto* od = am->add_option("--delta", ame.p.bar_delta, "plane 0 alpha (default: --alpha)");
  auto* oe = am->add_option("--eps", ame.p.bar_eps, "plane 0 beta (default: --beta)");
  am->add_option("--eta", ame.p.bar_eta);
  am->add_option("--nu", ame.p.nu);
  am->add_option("--p", ame.p.p);
  am->add_option("--mode", ame.mode, "fixed | forward | backward | stationary");
  am->add_option("--T", ame.T, "forward horizon");
  am->add_option("--z0", ame.z0, "start point x y")->expected(2);
  am->add_option("--w0", ame.w0, "second start point for backward coupling")->expected(2);
  am->add_option("--plane", ame.plane, "start plane");
  am->add_option("--cycles", ame.cycles, "backward depth");
  am->add_option("--record-dt", ame.record_dt, "path grid for forward runs (0: none)");
  am->add_option("--bins", ame.bins, "histogram bins (0: none)");
  am->add_option("--method", ame.method, "time_average | renewal_weighted");
  am->add_option("--budget", ame.budget, "time or backward samples per plane");

  auto* pac = app.add_subcommand("pa", "pair approximation equilibrium and integration");
  add_common(pac, common);
  pac->add_option("--p", pa.p);
  pac->add_option("--nu", pa.nu);
  pac->add_option("--L", pa.L);
  pac->add_option("--T", pa.T, "integrate to this time (0: equilibrium only)");
  pac->add_option("--dt", pa.dt);
  pac->add_option("--init", pa.init, "n10 n11 n00 per capita")->expected(3);

  auto* orc = app.add_subcommand("oracle", "exact drift checks");
  add_common(orc, common);
  orc->add_option("--fixtures", oracle.fixtures, "check a fixture directory");
  orc->add_option("--write-fixtures", oracle.write_fixtures, "generate a fixture directory");
  orc->add_option("--snapshot", oracle.snapshot, "drift report for one snapshot");
  orc->add_option("--random", oracle.random, "check this many random graphs");
  orc->add_option("--count", oracle.count, "graphs written by --write-fixtures");
  orc->add_option("--max-n", oracle.max_n, "largest random graph");
  orc->add_option("--nu", oracle.nu);
  orc->add_option("--L", oracle.L, "rate scale (0: mean degree)");
  orc->add_option("--mode", oracle.mode, "idealized_target | exclude_neighbors");

  auto* nus = app.add_subcommand("nuscan", "classify runs over a nu grid");
  add_common(nus, common);
  add_model(nus, model);
  nus->add_option("--nu-grid", nuscan.grid, "lo:hi:step");
  nus->add_option("--c-rapid", nuscan.c_rapid);
  nus->add_option("--c-prolonged", nuscan.c_prolonged);

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
    ame.has_delta = od->count() > 0;
    ame.has_eps = oe->count() > 0;
    if (sim->parsed()) return cmd_simulate(common, model, out);
    if (arc->parsed()) return cmd_arch(common, model, arch, out);
    if (tab->parsed()) return cmd_table1(common, table, out);
    if (am->parsed()) return cmd_ame(common, ame, out);
    if (pac->parsed()) return cmd_pa(common, pa, out);
    if (orc->parsed()) return cmd_oracle(common, oracle, out, err);
    if (nus->parsed()) return cmd_nuscan(common, model, nuscan, out);
    return kExitValidation;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace evoter::cli
