#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "evoter/opinion_graph.hpp"

namespace evoter {

// Third partials of U at the origin.
struct ThirdOrder {
  double Uaaa = 0.0;
  double Uaab = 0.0;
  double Uabb = 0.0;
  double Ubbb = 0.0;
};

// Fourth partials; they only enter the order-3 equations through the
// antisymmetric left sides.
struct FourthOrder {
  double Uaaab = 0.0;
  double Ubbbb = 0.0;
  double Uaabb = 0.0;
  double Uabbb = 0.0;
};

// Partials of U(a, b) = p E exp(a J/L + b K/L) at the origin for a focal
// vertex in state 1, plus the bars they were paired with.
struct MomentState {
  double U = 0.5;
  double Ua = 0.0;
  double Ub = 0.0;
  double Uaa = 0.0;
  double Uab = 0.0;
  double Ubb = 0.0;
  std::optional<ThirdOrder> third;
  double bar_alpha = 0.0;
  double bar_beta = 0.0;
  double bar_eta = 0.0;
  double nu = 0.0;
  // set by derive_from_Ub when Ubb <= 0 (nu <= 1/2)
  bool negative_Ubb = false;
};

// Power-series coefficients c[m][n] = d^m_a d^n_b U(0,0) / (m! n!), m + n <= M.
class CoefficientGrid {
 public:
  CoefficientGrid(int order, double nu, double bar_alpha, double bar_beta, double bar_eta);

  // Fill orders 0..3 (as available) from a moment state; higher orders are 0.
  static CoefficientGrid from_state(const MomentState& s, int order = 3,
                                    const std::optional<FourthOrder>& fourth = std::nullopt);

  int order() const { return order_; }
  // 0 for negative indices
  double c(int m, int n) const;
  double& at(int m, int n);

  double nu;
  double bar_alpha;
  double bar_beta;
  double bar_eta;

 private:
  int order_;
  std::vector<double> c_;  // (order+1)^2, row-major in m
};

// Right side of the coefficient recursion at (m, n); needs m + n + 1 <= order.
double recr_residual(const CoefficientGrid& grid, int m, int n);

// Closed-form first and second order state from Ub alone, with eta = Ub.
MomentState derive_from_Ub(double Ub, double nu);

struct RelationReport {
  double e1r = 0.0;     // |Ub - 2 nu (Uab - Ubb)|
  double e20r = 0.0;    // |Uab + Ubb - Ub|
  double e0 = 0.0;      // |Ua + Ub - 1/2|
  double e1gen = 0.0;   // |-nu beta Ua + (1 + nu alpha) Ub + nu (Ubb - Uab)|
  double max() const;
};

RelationReport check_relations(const MomentState& s);

struct Order3Report {
  std::array<double, 4> residual{};  // right minus left side, m = 3, 2, 1, 0
  double aggregate = 0.0;            // eta (Uaa + 2 Uab + Ubb) - Uaab/2 - Uabb - Ubbb/2
  double aggregate_scale = 0.0;      // eta (Uaa + 2 Uab + Ubb)
};

// Needs s.third. Fourth partials default to 0.
Order3Report order3_residuals(const MomentState& s, const FourthOrder& fourth = {});

// Raw moments of the scaled neighbor counts (j/L, k/L) over state-1
// vertices, each weighted 1/n; also fills third order and sets
// eta = N10 / (n L), nu from the argument.
MomentState empirical_moments(const OpinionGraph& g, double L, double nu = 0.0);

// Average of the state-1 moments above and the state-0 moments with a and b
// counting same-state and other-state neighbors; at p = 1/2 both estimate
// the same symmetric state and the average cancels the linear drift in N1/n.
MomentState symmetrized_moments(const OpinionGraph& g, double L, double nu = 0.0);

// Sum over state-0 vertices of j0 (j0 - 1) against (sum j0)^2 / N0 - sum j0,
// j0 the number of 1-neighbors. Compared exactly after multiplying by N0.
struct SecondMomentGap {
  std::int64_t n0 = 0;
  std::int64_t sum_j = 0;
  std::int64_t sum_j2 = 0;
  bool holds() const;           // N0 sum j(j-1) >= (sum j)^2 - N0 sum j
  std::int64_t paths_101() const { return sum_j2 - sum_j; }
};

SecondMomentGap second_moment_gap(const OpinionGraph& g);

// Reference simulated values at p = 1/2 for the six nu of the table.
struct Table1Row {
  double nu;
  double Ub;
  double Uab;
  double Ubb;
  double Uaa;
};

const std::array<Table1Row, 6>& table1_reference();

struct Table1Prediction {
  Table1Row sim;
  MomentState pred;
};

// Predictions from each row's Ub (or the supplied override, same order).
std::vector<Table1Prediction> table1(const std::optional<std::vector<double>>& Ub = std::nullopt);

// nu,Ub_sim,Uab_sim,Uab_pred,Ubb_sim,Ubb_pred,Uaa_sim,Uaa_pred
void write_table1_csv(std::ostream& out, const std::vector<Table1Prediction>& rows);

}  // namespace evoter
