// One line per acceptance criterion: "[PASS] <id> <name>: <detail>".
// Usage: acceptance [criterion ids...]; no ids runs all. Exit 1 on any FAIL.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli.hpp"
#include "evoter/ame.hpp"
#include "evoter/dynamics.hpp"
#include "evoter/generators.hpp"
#include "evoter/moments.hpp"
#include "evoter/oracle.hpp"
#include "evoter/pair_approx.hpp"
#include "evoter/stats.hpp"
#include "stat_tests.hpp"

using namespace evoter;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int jobs() {
  if (const char* e = std::getenv("EVOTER_JOBS")) return std::max(1, std::atoi(e));
  return std::max(1u, std::thread::hardware_concurrency());
}

// f(k) for k in [0, count) on up to jobs() threads, results in index order.
template <class T>
std::vector<T> parallel(int count, const std::function<T(int)>& f) {
  std::vector<T> out(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) out[static_cast<std::size_t>(i)] = f(i);
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < std::min(jobs(), count); ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

// ---------------------------------------------------------------- 1

Outcome table1_exact() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream out, err;
  const int code = cli::run({"table1", "--use-paper-ub"}, out, err);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (code != 0) return {false, "exit " + std::to_string(code) + ": " + err.str()};
  // printed predictions (Uab, Ubb, Uaa) per nu
  const double printed[6][4] = {{2, .1041, .0625, .2208},   {1.6, .0900, .0471, .2574},
                                {1.44, .0819, .0397, .2810}, {1.32, .0754, .0340, .3047},
                                {1.2, .0635, .0261, .3351},  {1, .0341, .0113, .4129}};
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  int row = 0, ok = 0;
  double worst = 0.0;
  while (std::getline(in, line) && row < 6) {
    double v[8];
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3],
                    &v[4], &v[5], &v[6], &v[7]) != 8 ||
        v[0] != printed[row][0]) {
      return {false, "unexpected row: " + line};
    }
    const double got[3] = {v[3], v[5], v[7]};
    for (int k = 0; k < 3; ++k) {
      const double d = std::abs(got[k] - printed[row][k + 1]);
      worst = std::max(worst, d);
      ok += d <= 5e-4 + 1e-12;
    }
    ++row;
  }
  return {ok == 18 && secs < 1.0,
          fmt("%d/18 cells within 5e-4 (worst %.2e), %.3f s", ok, worst, secs)};
}

// ---------------------------------------------------------------- 2, 3

struct ArchRun {
  ArchFit fit;
  std::uint64_t updates = 0;
  int replicas = 0;
  int absorbed = 0;
};

// Pools arch points over replicas (in index order) until the total update
// count reaches `budget`; each replica runs to absorption or the cap.
ArchRun arch_run(double L, double nu, double budget, int min_replicas, Seed seed) {
  ModelParams p;
  p.n = 2500;
  p.L = L;
  p.nu = nu;
  p.p = 0.5;
  p.clock = Clock::kCtmc;
  p.max_updates = 200'000'000;
  ArchRun out;
  std::vector<Point> pooled;
  for (int base = 0;; base += jobs()) {
    auto runs = parallel<RunResult>(jobs(), [&](int k) {
      return run(p, seed, static_cast<std::uint64_t>(base + k));
    });
    for (const auto& r : runs) {
      if (out.replicas >= min_replicas && static_cast<double>(out.updates) >= budget) break;
      const auto pts = arch_points(r.trajectory);
      pooled.insert(pooled.end(), pts.begin(), pts.end());
      out.updates += r.updates;
      out.absorbed += r.absorbed;
      ++out.replicas;
    }
    if (out.replicas >= min_replicas && static_cast<double>(out.updates) >= budget) break;
  }
  out.fit = fit_arch(pooled);
  return out;
}

Outcome arch_nu25() {
  const ArchRun a = arch_run(50, 2.5, 1e8, 1, 2);
  const ArchRun b = arch_run(25, 2.5, 1e8, 1, 3);
  if (!a.fit.roots) return {false, "L=50 fit has no roots"};
  const auto [lo, hi] = *a.fit.roots;
  const bool roots_ok = std::abs(lo - 0.0737) <= 0.01 && std::abs(hi - 0.9263) <= 0.01;
  const bool a_ok = std::abs(a.fit.A - 1.92) <= 0.10;
  const bool b_ok = std::abs(b.fit.A - 1.906) <= 0.10;
  return {roots_ok && a_ok && b_ok,
          fmt("L=50: roots (%.4f, %.4f), A=%.3f over %.3g updates in %d runs (%d absorbed); "
              "L=25: A=%.3f over %.3g updates",
              lo, hi, a.fit.A, double(a.updates), a.replicas, a.absorbed, b.fit.A,
              double(b.updates))};
}

Outcome arch_nu1() {
  const ArchRun a = arch_run(50, 1.0, 5e7, 4, 4);
  if (!a.fit.roots) return {false, "fit has no roots"};
  const auto [lo, hi] = *a.fit.roots;
  return {std::abs(lo - 0.3) <= 0.05 && std::abs(hi - 0.7) <= 0.05,
          fmt("endpoints (%.4f, %.4f), A=%.3f from %d runs, %.3g updates", lo, hi, a.fit.A,
              a.replicas, double(a.updates))};
}

// ---------------------------------------------------------------- 4

Outcome pa_refutation() {
  ModelParams p;
  p.n = 1600;
  p.L = 40;
  p.nu = 0.8;
  p.p = 0.5;
  const double nL = 1600.0 * 40.0;
  p.max_updates = static_cast<std::uint64_t>(std::ceil(10.0 * nL * std::log(nL))) + 1;
  p.stride = p.max_updates;
  auto runs = parallel<RunResult>(10, [&](int k) { return run(p, 5, k); });
  int rapid = 0, good = 0;
  double min_minority = 1.0;
  for (const auto& r : runs) {
    const bool is_rapid = classify_run(r, p.n, p.L) == RunClass::kRapid;
    const double x = static_cast<double>(r.final_n1) / 1600.0;
    const double minority = std::min(x, 1.0 - x);
    rapid += is_rapid;
    if (is_rapid) min_minority = std::min(min_minority, minority);
    good += is_rapid && minority >= 0.45;
  }
  return {good >= 7 && 0.8 > pa_nu_c(0.5),
          fmt("%d/10 rapid, %d/10 rapid with minority >= 0.45 (lowest %.3f); pa_nu_c = %.2f",
              rapid, good, min_minority, pa_nu_c(0.5))};
}

// ---------------------------------------------------------------- 5

Outcome small_nu_consensus() {
  ModelParams p;
  p.n = 2000;
  p.L = 45;
  p.nu = 0.06;
  p.p = 0.5;
  p.opinion_mode = OpinionMode::kExactCount;
  const auto nL = static_cast<std::uint64_t>(2000 * 45);
  p.max_updates = 3 * nL;
  p.stride = p.max_updates;
  p.dmax_checkpoints = {nL};
  auto runs = parallel<RunResult>(20, [&](int k) { return run(p, 6, k); });
  int fast = 0, dense = 0, dmax = 0;
  double worst_tau = 0.0;
  for (const auto& r : runs) {
    const double tau = static_cast<double>(r.updates) / static_cast<double>(nL);
    worst_tau = std::max(worst_tau, r.absorbed ? tau : INFINITY);
    fast += r.absorbed && tau < 1.5;
    dense += std::abs(static_cast<double>(r.final_n1) / 2000.0 - 0.5) <= 0.02;
    dmax += d_max_check(r, 1.0, 0.1);
  }
  return {fast >= 19 && dense >= 19 && dmax >= 19,
          fmt("tau < 1.5nL in %d/20 (max tau %.3f nL), density within 0.02 in %d/20, "
              "D_max check in %d/20",
              fast, worst_tau, dense, dmax)};
}

// ---------------------------------------------------------------- 6

Outcome drift_oracle() {
  std::mt19937_64 gen(2024);
  int exact = 0, identity = 0;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 5 + gen() % 36;
    const double L = std::min<double>(2 + static_cast<double>(gen() % 5), double(n - 1));
    Rng rng(7000 + k);
    OpinionGraph g = build_er(n, L, rng);
    assign_opinions(g, 0.2 + 0.6 * rng.uniform(), OpinionMode::kProduct, rng);
    const double nu = 0.1 + static_cast<double>(gen() % 10) / 10.0;
    const auto rep = enumerate_drift(g, std::min(nu, L), L, DriftMode::kIdealizedTarget);
    exact += rep.exact && rep.enumerated_exact == rep.formula_exact;
    identity += verify_identity_sum(rep);
    worst = std::max(worst, rep.max_relative_gap);
  }
  return {exact == 50 && identity == 50 && worst < 1e-12,
          fmt("%d/50 rational matches, float gap %.1e, identity %d/50", exact, worst, identity)};
}

// ---------------------------------------------------------------- 7

Outcome martingale() {
  ModelParams p;
  p.n = 500;
  p.L = 20;
  p.nu = 1.0;
  p.p = 0.5;
  p.clock = Clock::kCtmc;
  p.opinion_mode = OpinionMode::kExactCount;
  const int R = 200, steps = 10;
  const double dt = 500.0 / 10.0 / steps;  // up to t = n / 10
  auto sq = parallel<std::vector<double>>(R, [&](int k) {
    OpinionGraph g = initial_graph(p, 8, k);
    Rng rng(8, k, Stream::kDynamics);
    ModelParams q = p;
    q.max_time = dt;
    q.stride = std::numeric_limits<std::uint32_t>::max();
    std::vector<double> out;
    for (int s = 0; s < steps; ++s) {
      if (g.pair_counts().n10 > 0) run_from(g, q, rng);
      out.push_back(static_cast<double>(g.class_size(1)) / 500.0 - 0.5);
    }
    return out;
  });
  int ok = 0, mean_ok = 0;
  double worst = -INFINITY;
  for (int s = 0; s < steps; ++s) {
    std::vector<double> dev, dev2;
    for (const auto& v : sq) {
      dev.push_back(v[static_cast<std::size_t>(s)]);
      dev2.push_back(v[static_cast<std::size_t>(s)] * v[static_cast<std::size_t>(s)]);
    }
    const double t = dt * (s + 1);
    const double m2 = testing::mean(dev2);
    const double se2 = testing::stddev(dev2) / std::sqrt(double(R));
    const double bound = p.nu * t / 500.0;
    ok += m2 <= bound + 3 * se2;
    worst = std::max(worst, (m2 - bound) / std::max(se2, 1e-300));
    mean_ok += std::abs(testing::mean(dev)) <= 3 * testing::stddev(dev) / std::sqrt(double(R));
  }
  return {ok == steps && mean_ok == steps,
          fmt("E[(N1/n-p)^2] <= nu t/n + 3 s.e. at %d/%d times up to t=n/10 (worst %+.2f s.e.); "
              "mean within 3 s.e. at %d/%d",
              ok, steps, worst, mean_ok, steps)};
}

// ---------------------------------------------------------------- 8

double thinning_jump(const PlaneSystem& s, const Vec2& z0, std::mt19937_64& gen) {
  const JumpRate jr = jump_rate(s, z0);
  const double bound = s.nu * jr.sup();
  std::exponential_distribution<double> E(bound);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double t = 0.0;
  for (;;) {
    t += E(gen);
    if (U(gen) * bound <= s.nu * std::max(flow(s, z0, t)(s.jump_coordinate()), 0.0)) return t;
  }
}

Outcome ame_convergence() {
  std::vector<std::string> notes;
  bool pass = true;
  // eta = Ub(nu=2) and half of it: the two readings of the scaling
  for (double eta : {0.1666, 0.0833}) {
    const auto params = AmeParams::symmetric(0.3625, 0.3074, eta, 2.0);
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> U(0.0, 1.5);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const Vec2 z(U(gen), U(gen)), w(U(gen), U(gen));
      worst = std::max(worst, backward_iterate(params, 500 + k, 50, z, w).distance.back());
    }
    StationaryOptions o;
    o.bins = 40;
    const auto ta = stationary_estimate(params, StationaryMode::kTimeAverage, 20000, 21, o);
    o.cycles = 40;
    const auto rw = stationary_estimate(params, StationaryMode::kRenewalWeighted, 3000, 22, o);
    const double se = std::hypot(ta.plane1_fraction_se, rw.plane1_fraction_se);
    const double gap = std::abs(ta.plane1_fraction - rw.plane1_fraction);

    double min_p = 1.0;
    std::uniform_real_distribution<double> V(0.0, 1.0);
    const std::vector<std::pair<int, Vec2>> starts{
        {1, fixed_point(1, params)}, {1, Vec2(0.05, 0.6)}, {0, Vec2(1.2, 0.02)}};
    for (const auto& [plane, z0] : starts) {
      const auto s = plane_system(plane, params);
      std::vector<double> a, b;
      for (int k = 0; k < 100000; ++k) {
        double u;
        do u = V(gen);
        while (u == 0.0);
        a.push_back(jump_time_sample(s, z0, u));
        b.push_back(thinning_jump(s, z0, gen));
      }
      min_p = std::min(min_p, testing::ks_two_sample(a, b).p_value);
    }
    const bool ok = worst < 1e-8 && gap <= 2 * se && min_p > 0.01;
    pass = pass && ok;
    notes.push_back(fmt("eta=%.4f: backward %.1e, occupancy gap %.4f vs 2 s.e. %.4f, KS p>=%.3f",
                        eta, worst, gap, 2 * se, min_p));
  }
  // eigenvalue invariants on a 10 x 10 x 5 grid, both planes
  int cells = 0, good = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      for (int k = 0; k < 5; ++k) {
        const double a = 1e-3 * std::pow(1e4, i / 9.0);
        const double b = 1e-3 * std::pow(1e4, j / 9.0);
        const double p = k / 4.0;
        for (int plane : {0, 1}) {
          const auto s = make_plane(plane, a, b, p, 0.1);
          const double tr = s.trace(), det = s.det();
          bool ok = tr * tr - 4 * det >= 0 && s.lambda1 <= s.lambda2 && s.lambda2 < 0;
          for (double l : {s.lambda1, s.lambda2}) {
            const double scale = l * l + std::abs(tr * l) + std::abs(det);
            ok = ok && std::abs(l * l - tr * l + det) < 1e-12 * scale;
          }
          ++cells;
          good += ok;
        }
      }
    }
  }
  pass = pass && good == cells;
  notes.push_back(fmt("eigenvalues real, negative, residual < 1e-12 on %d/%d", good, cells));
  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return {pass, detail};
}

// ---------------------------------------------------------------- 9

Outcome desk_scale_limits() {
  // The p(nu) regime needs n around 1e12; checked instead through the
  // threshold formula and the stubborn-counter tail it rests on.
  const double p1 = p_threshold(1.0);
  const bool formula_ok = std::abs(p1 - 1.26e-11) <= 0.005e-11;
  ModelParams p;
  p.n = 2000;
  p.L = 20;
  p.nu = 0.05;
  p.p = 0.5;
  p.max_updates = 2000000;
  p.stride = p.max_updates;
  // small nu absorbs within about nL updates, so pool many short runs
  auto runs = parallel<RunResult>(
      500, [&](int k) { return run_counter_construction(p, {}, 9, static_cast<std::uint64_t>(k)); });
  std::uint64_t stubborn = 0, draws = 0;
  for (const auto& r : runs) {
    stubborn += r.stubborn;
    draws += r.x_pool_draws;
  }
  const double q = p.nu / p.L;
  const double expect = std::pow(1 - q, 20 * p.L);
  const double frac = draws ? double(stubborn) / double(draws) : 0.0;
  const bool tail_ok = draws > 5000 && std::abs(frac - expect) <= 0.01;
  return {formula_ok && tail_ok,
          fmt("not reproducible at desk scale (p(1) = %.3e needs n ~ 1e12); substitutes: "
              "p_threshold ok=%d, stubborn fraction %.4f vs %.4f over %llu draws",
              p1, formula_ok, frac, expect, static_cast<unsigned long long>(draws))};
}

struct Criterion {
  const char* id;
  const char* name;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {"1", "table1-exact", table1_exact},
    {"2", "arch-nu2.5", arch_nu25},
    {"3", "arch-nu1", arch_nu1},
    {"4", "pa-refutation", pa_refutation},
    {"5", "small-nu-consensus", small_nu_consensus},
    {"6", "drift-oracle", drift_oracle},
    {"7", "martingale-bound", martingale},
    {"8", "ame-convergence", ame_convergence},
    {"9", "desk-scale-limits", desk_scale_limits},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  bool all_pass = true;
  for (const auto& c : kCriteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) {
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all_pass = all_pass && o.pass;
    std::printf("[%s] %s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
