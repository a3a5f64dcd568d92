#include "evoter/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>

#include "json.hpp"

#include "evoter/errors.hpp"

namespace evoter {

std::string to_string(DriftMode m) {
  return m == DriftMode::kIdealizedTarget ? "idealized_target" : "exclude_neighbors";
}

DriftMode parse_drift_mode(const std::string& s) {
  if (s == "idealized_target") return DriftMode::kIdealizedTarget;
  if (s == "exclude_neighbors") return DriftMode::kExcludeNeighbors;
  throw InvalidInput("unknown drift mode '" + s + "'");
}

std::array<double, 3> RationalDrift::at(double r) const {
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] = (static_cast<double>(c0[i]) + static_cast<double>(c1[i]) * r) /
             static_cast<double>(den);
  }
  return out;
}

namespace {

// (N10, N11/2, N00/2) recounted from the edge list
std::array<std::int64_t, 3> recount(const OpinionGraph& g) {
  std::array<std::int64_t, 3> c{};
  for (const auto& [a, b] : g.edges()) {
    const Opinion oa = g.opinion(a);
    const Opinion ob = g.opinion(b);
    if (oa != ob) ++c[0];
    else if (oa == 1) ++c[1];
    else ++c[2];
  }
  return c;
}

std::array<std::int64_t, 3> minus(const std::array<std::int64_t, 3>& a,
                                  const std::array<std::int64_t, 3>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

}  // namespace

RationalDrift drift_formula(const OpinionGraph& g) {
  const TripleCounts t = triple_counts(g);
  const PairCounts& pc = g.pair_counts();
  const auto n = static_cast<std::int64_t>(g.vertex_count());
  if (n == 0) throw InvalidInput("empty graph");
  const std::int64_t n1 = pc.n1;
  const std::int64_t n0 = n - n1;
  const std::int64_t n10 = pc.n10;
  const std::int64_t mix = t.n100() - t.n010() + t.n110() - t.n101();
  RationalDrift d;
  d.den = n;
  // rewiring carries weight 1 - r, voting weight r
  d.c0 = {-n10 * n, n1 * n10, n0 * n10};
  d.c1 = {n10 * n + (-2 * n10 + mix) * n, -n1 * n10 + (n10 + t.n101() - t.n011()) * n,
          -n0 * n10 + (n10 + t.n010() - t.n100()) * n};
  return d;
}

DriftReport enumerate_drift(const OpinionGraph& g, double nu, double L, DriftMode mode) {
  if (!(L > 0.0) || !(nu >= 0.0) || nu > L) throw InvalidInput("need L > 0 and 0 <= nu <= L");
  const auto n = static_cast<std::int64_t>(g.vertex_count());
  if (n == 0) throw InvalidInput("empty graph");
  const double r = nu / L;
  const auto base = recount(g);
  const std::int64_t n1 = static_cast<std::int64_t>(g.class_size(1));
  const std::array<std::int64_t, 2> class_size{n - n1, n1};

  DriftReport rep;
  rep.mode = mode;
  rep.nu = nu;
  rep.L = L;
  rep.formula_exact = drift_formula(g);
  rep.formula = rep.formula_exact.at(r);
  const double n10 = static_cast<double>(g.pair_counts().n10);
  const double p = static_cast<double>(n1) / static_cast<double>(n);
  rep.omitted = {-r * n10, r * (1 - p) * n10, r * p * n10};

  RationalDrift ex;
  ex.den = n;
  std::array<double, 3> approx{};  // exclude-neighbors rewiring, floating point
  OpinionGraph work = g;
  for (const auto& [a, b] : g.edges()) {
    if (g.opinion(a) == g.opinion(b)) continue;
    for (const auto& [u, v] : {std::pair{a, b}, std::pair{b, a}}) {
      // vote: u copies v
      work.set_opinion(u, g.opinion(v));
      const auto dv = minus(recount(work), base);
      work.set_opinion(u, g.opinion(u));
      for (std::size_t i = 0; i < 3; ++i) ex.c1[i] += dv[i] * n;

      const Opinion ou = g.opinion(u);
      if (mode == DriftMode::kIdealizedTarget) {
        // -1 discordant edge, then a new edge to a state-s vertex w.p. N_s / n
        const std::int64_t same = class_size[ou];
        const std::int64_t other = class_size[1 - ou];
        std::array<std::int64_t, 3> x{-n + other, 0, 0};
        x[ou == 1 ? 1 : 2] = same;
        for (std::size_t i = 0; i < 3; ++i) {
          ex.c0[i] += x[i];
          ex.c1[i] -= x[i];
        }
        continue;
      }
      // the change depends only on the target's state: one representative each
      std::array<std::int64_t, 2> eligible{class_size[0], class_size[1]};
      eligible[ou] -= 1;
      std::array<std::optional<Vertex>, 2> rep_target;
      std::vector<bool> is_nbr(static_cast<std::size_t>(n), false);
      g.for_each_neighbor(u, [&](Vertex w) {
        is_nbr[w] = true;
        eligible[g.opinion(w)] -= 1;
      });
      for (Vertex w = 0; w < static_cast<Vertex>(n); ++w) {
        if (w == u || is_nbr[w]) continue;
        if (!rep_target[g.opinion(w)]) rep_target[g.opinion(w)] = w;
      }
      const double total = static_cast<double>(eligible[0] + eligible[1]);
      if (total == 0.0) continue;  // blocked
      for (int s = 0; s < 2; ++s) {
        if (eligible[s] == 0) continue;
        OpinionGraph moved = g;
        moved.rewire(u, v, *rep_target[s]);
        const auto dr = minus(recount(moved), base);
        const double w = (1.0 - r) * static_cast<double>(eligible[s]) / total;
        for (std::size_t i = 0; i < 3; ++i) approx[i] += w * static_cast<double>(dr[i]);
      }
    }
  }

  const auto votes = ex.at(r);
  if (mode == DriftMode::kIdealizedTarget) {
    rep.enumerated_exact = ex;
    rep.exact = true;
    rep.enumerated = votes;
  } else {
    for (std::size_t i = 0; i < 3; ++i) rep.enumerated[i] = votes[i] + approx[i];
  }
  double scale = 0.0;
  for (double f : rep.formula) scale = std::max(scale, std::abs(f));
  for (std::size_t i = 0; i < 3; ++i) {
    const double gap = std::abs(rep.enumerated[i] - rep.formula[i]);
    rep.max_relative_gap = std::max(rep.max_relative_gap, scale > 0.0 ? gap / scale : gap);
  }
  return rep;
}

bool verify_identity_sum(const DriftReport& report) {
  auto ok = [](const std::array<double, 3>& d) {
    const double scale = std::max({1.0, std::abs(d[0]), std::abs(d[1]), std::abs(d[2])});
    return std::abs(d[0] + d[1] + d[2]) < 1e-9 * scale;
  };
  if (!ok(report.formula) || !ok(report.enumerated)) return false;
  if (report.exact) {
    const auto& e = report.enumerated_exact;
    if (e.c0[0] + e.c0[1] + e.c0[2] != 0 || e.c1[0] + e.c1[1] + e.c1[2] != 0) return false;
  }
  return true;
}

void write_drift_sidecar(const std::filesystem::path& path, const RationalDrift& d) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["components"] = {"dN10", "dN11/2", "dN00/2"};
  j["denominator"] = d.den;
  j["constant"] = d.c0;
  j["nu_over_L"] = d.c1;
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

RationalDrift read_drift_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  const auto j = nlohmann::json::parse(in);
  RationalDrift d;
  d.den = j.at("denominator").get<std::int64_t>();
  d.c0 = j.at("constant").get<std::array<std::int64_t, 3>>();
  d.c1 = j.at("nu_over_L").get<std::array<std::int64_t, 3>>();
  return d;
}

}  // namespace evoter
