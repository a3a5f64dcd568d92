#include "evoter/moments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "evoter/errors.hpp"

namespace evoter {

CoefficientGrid::CoefficientGrid(int order, double nu_, double alpha, double beta, double eta)
    : nu(nu_), bar_alpha(alpha), bar_beta(beta), bar_eta(eta), order_(order) {
  if (order < 0) throw InvalidInput("grid order must be >= 0");
  c_.assign(static_cast<std::size_t>((order + 1) * (order + 1)), 0.0);
}

double CoefficientGrid::c(int m, int n) const {
  if (m < 0 || n < 0) return 0.0;
  if (m + n > order_) throw ContractError("coefficient beyond the grid order");
  return c_[static_cast<std::size_t>(m * (order_ + 1) + n)];
}

double& CoefficientGrid::at(int m, int n) {
  if (m < 0 || n < 0 || m + n > order_) throw ContractError("coefficient index out of range");
  return c_[static_cast<std::size_t>(m * (order_ + 1) + n)];
}

CoefficientGrid CoefficientGrid::from_state(const MomentState& s, int order,
                                            const std::optional<FourthOrder>& fourth) {
  CoefficientGrid g(order, s.nu, s.bar_alpha, s.bar_beta, s.bar_eta);
  auto set = [&](int m, int n, double v) {
    if (m + n <= order) g.at(m, n) = v;
  };
  set(0, 0, s.U);
  set(1, 0, s.Ua);
  set(0, 1, s.Ub);
  set(2, 0, s.Uaa / 2);
  set(1, 1, s.Uab);
  set(0, 2, s.Ubb / 2);
  if (s.third) {
    set(3, 0, s.third->Uaaa / 6);
    set(2, 1, s.third->Uaab / 2);
    set(1, 2, s.third->Uabb / 2);
    set(0, 3, s.third->Ubbb / 6);
  }
  if (fourth) {
    set(3, 1, fourth->Uaaab / 6);
    set(2, 2, fourth->Uaabb / 4);
    set(1, 3, fourth->Uabbb / 6);
    set(0, 4, fourth->Ubbbb / 24);
  }
  return g;
}

double recr_residual(const CoefficientGrid& g, int m, int n) {
  if (m < 0 || n < 0) throw InvalidInput("recursion indices must be >= 0");
  if (m + n + 1 > g.order()) throw InvalidInput("recursion needs order m + n + 1 coefficients");
  const double nb = g.nu * g.bar_beta;
  const double na = g.nu * g.bar_alpha;
  const double dm = m;
  const double dn = n;
  // c_{n, m+1} is the transposed (plane 0) coefficient
  return g.bar_eta * g.c(m - 1, n) + g.bar_eta * g.c(m, n - 1) +
         nb * g.c(m + 1, n - 1) * (dm + 1) - (nb * dm + (1.5 + na) * dn) * g.c(m, n) +
         (0.5 + na) * g.c(m - 1, n + 1) * (dn + 1) + g.nu * g.c(n, m + 1) * (dm + 1) -
         g.nu * g.c(m, n + 1) * (dn + 1);
}

MomentState derive_from_Ub(double Ub, double nu) {
  if (!(Ub > 0.0 && Ub < 0.25)) throw InvalidInput("Ub must lie in (0, 1/4)");
  if (!(nu > 0.0)) throw InvalidInput("nu must be positive");
  MomentState s;
  s.nu = nu;
  s.U = 0.5;
  s.Ub = Ub;
  s.Ua = 0.5 - Ub;
  const double h = 1.0 / (2.0 * nu);
  s.Uab = 0.5 * (1.0 + h) * Ub;
  s.Ubb = 0.5 * (1.0 - h) * Ub;
  s.bar_beta = (1.0 + h) * Ub / (1.0 - 2.0 * Ub);
  s.bar_alpha = 0.5 * (1.0 - h);
  s.bar_eta = Ub;
  const double k = 2.0 * nu * s.bar_beta;
  s.Uaa = (1.0 + 3.0 / k) * s.Uab - s.bar_eta / k;
  s.negative_Ubb = s.Ubb <= 0.0;
  return s;
}

double RelationReport::max() const { return std::max({e1r, e20r, e0, e1gen}); }

RelationReport check_relations(const MomentState& s) {
  RelationReport r;
  r.e1r = std::abs(s.Ub - 2.0 * s.nu * (s.Uab - s.Ubb));
  r.e20r = std::abs(s.Uab + s.Ubb - s.Ub);
  r.e0 = std::abs(s.Ua + s.Ub - 0.5);
  r.e1gen = std::abs(-s.nu * s.bar_beta * s.Ua + (1.0 + s.nu * s.bar_alpha) * s.Ub +
                     s.nu * (s.Ubb - s.Uab));
  return r;
}

Order3Report order3_residuals(const MomentState& s, const FourthOrder& f) {
  if (!s.third) throw InvalidInput("order-3 residuals need third partials");
  const ThirdOrder& t = *s.third;
  const double eta = s.bar_eta;
  const double nb = s.nu * s.bar_beta;
  const double r1 = 0.5 + s.nu * s.bar_alpha;
  const double r2 = 1.5 + s.nu * s.bar_alpha;
  Order3Report out;
  out.residual[0] = eta * s.Uaa / 2 - nb * t.Uaaa / 2 + r1 * t.Uaab / 2 -
                    s.nu / 6 * (f.Uaaab - f.Ubbbb);
  out.residual[1] = eta * s.Uab + eta * s.Uaa / 2 + nb * t.Uaaa / 2 - nb * t.Uaab -
                    r2 * t.Uaab / 2 + r1 * t.Uabb - s.nu / 2 * (f.Uaabb - f.Uabbb);
  out.residual[2] = eta * s.Ubb / 2 + eta * s.Uab + nb * t.Uaab - nb * t.Uabb / 2 -
                    r2 * t.Uabb + r1 * t.Ubbb / 2 - s.nu / 2 * (f.Uabbb - f.Uaabb);
  out.residual[3] = eta * s.Ubb / 2 + nb * t.Uabb / 2 - r2 * t.Ubbb / 2 -
                    s.nu / 6 * (f.Ubbbb - f.Uaaab);
  out.aggregate_scale = eta * (s.Uaa + 2 * s.Uab + s.Ubb);
  out.aggregate = out.aggregate_scale - t.Uaab / 2 - t.Uabb - t.Ubbb / 2;
  return out;
}

namespace {

// Moments with the focal vertex in state `focal`: a counts same-state
// neighbors, b the others.
MomentState focal_moments(const OpinionGraph& g, double L, double nu, Opinion focal) {
  if (!(L > 0.0)) throw InvalidInput("L must be positive");
  const double n = static_cast<double>(g.vertex_count());
  if (n == 0) throw InvalidInput("empty graph");
  MomentState s;
  ThirdOrder t;
  s.nu = nu;
  for (std::size_t i = 0; i < g.class_size(focal); ++i) {
    const Vertex v = g.class_member(focal, i);
    double j = static_cast<double>(g.ones_around(v)) / L;
    double k = static_cast<double>(g.zeros_around(v)) / L;
    if (focal == 0) std::swap(j, k);
    s.Ua += j;
    s.Ub += k;
    s.Uaa += j * j;
    s.Uab += j * k;
    s.Ubb += k * k;
    t.Uaaa += j * j * j;
    t.Uaab += j * j * k;
    t.Uabb += j * k * k;
    t.Ubbb += k * k * k;
  }
  s.U = static_cast<double>(g.class_size(focal)) / n;
  for (double* x : {&s.Ua, &s.Ub, &s.Uaa, &s.Uab, &s.Ubb, &t.Uaaa, &t.Uaab, &t.Uabb, &t.Ubbb}) {
    *x /= n;
  }
  s.third = t;
  s.bar_eta = static_cast<double>(g.pair_counts().n10) / (n * L);
  return s;
}

void self_consistent_bars(MomentState& s) {
  if (s.Ub > 0.0) s.bar_alpha = s.Ubb / s.Ub;
  if (s.Ua > 0.0) s.bar_beta = s.Uab / s.Ua;
}

}  // namespace

MomentState empirical_moments(const OpinionGraph& g, double L, double nu) {
  MomentState s = focal_moments(g, L, nu, 1);
  self_consistent_bars(s);
  return s;
}

MomentState symmetrized_moments(const OpinionGraph& g, double L, double nu) {
  MomentState s = focal_moments(g, L, nu, 1);
  const MomentState z = focal_moments(g, L, nu, 0);
  auto mid = [](double& a, double b) { a = 0.5 * (a + b); };
  mid(s.U, z.U);
  mid(s.Ua, z.Ua);
  mid(s.Ub, z.Ub);
  mid(s.Uaa, z.Uaa);
  mid(s.Uab, z.Uab);
  mid(s.Ubb, z.Ubb);
  mid(s.third->Uaaa, z.third->Uaaa);
  mid(s.third->Uaab, z.third->Uaab);
  mid(s.third->Uabb, z.third->Uabb);
  mid(s.third->Ubbb, z.third->Ubbb);
  self_consistent_bars(s);
  return s;
}

bool SecondMomentGap::holds() const {
  // N0 (S2 - S1) >= S1^2 - N0 S1  <=>  N0 S2 >= S1^2
  const __int128 lhs = static_cast<__int128>(n0) * (sum_j2 - sum_j);
  const __int128 rhs = static_cast<__int128>(sum_j) * sum_j - static_cast<__int128>(n0) * sum_j;
  return lhs >= rhs;
}

SecondMomentGap second_moment_gap(const OpinionGraph& g) {
  SecondMomentGap out;
  out.n0 = static_cast<std::int64_t>(g.class_size(0));
  for (std::size_t i = 0; i < g.class_size(0); ++i) {
    const auto j = static_cast<std::int64_t>(g.ones_around(g.class_member(0, i)));
    out.sum_j += j;
    out.sum_j2 += j * j;
  }
  return out;
}

const std::array<Table1Row, 6>& table1_reference() {
  // simulated moments at p = 1/2
  static const std::array<Table1Row, 6> rows{{
      {2.0, 0.1666, 0.1025, 0.0604, 0.2336},
      {1.6, 0.1371, 0.0907, 0.0466, 0.2859},
      {1.44, 0.1216, 0.0827, 0.0394, 0.3115},
      {1.32, 0.1094, 0.0757, 0.0343, 0.3310},
      {1.2, 0.0896, 0.0641, 0.0264, 0.3735},
      {1.0, 0.0454, 0.0339, 0.0132, 0.4690},
  }};
  return rows;
}

std::vector<Table1Prediction> table1(const std::optional<std::vector<double>>& Ub) {
  const auto& ref = table1_reference();
  if (Ub && Ub->size() != ref.size()) throw InvalidInput("need one Ub per table row");
  std::vector<Table1Prediction> out;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    Table1Row sim = ref[i];
    if (Ub) sim.Ub = (*Ub)[i];
    out.push_back({sim, derive_from_Ub(sim.Ub, sim.nu)});
  }
  return out;
}

void write_table1_csv(std::ostream& out, const std::vector<Table1Prediction>& rows) {
  out << "nu,Ub_sim,Uab_sim,Uab_pred,Ubb_sim,Ubb_pred,Uaa_sim,Uaa_pred\n";
  auto f4 = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    out << r.sim.nu << ',' << f4(r.sim.Ub) << ',' << f4(r.sim.Uab) << ',' << f4(r.pred.Uab) << ','
        << f4(r.sim.Ubb) << ',' << f4(r.pred.Ubb) << ',' << f4(r.sim.Uaa) << ','
        << f4(r.pred.Uaa) << '\n';
  }
}

}  // namespace evoter
