#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evoter/dynamics.hpp"
#include "evoter/trajectory.hpp"

namespace evoter {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Vertical scale of the arch. Fitted roots do not depend on it, A and B do.
enum class ArchScale {
  kEdgeFraction,  // y = N10 / edges = 2 N10 / (n L), the fraction of discordant edges
  kPerDegree,     // y = N10 / (n L)
};

// Points (N1/n, y) from the trajectory, dropping the first `burn_in` fraction
// of rows.
std::vector<Point> arch_points(const Trajectory& t, ArchScale scale = ArchScale::kEdgeFraction,
                               double burn_in = 0.1);

// Points (N1/n, N100 / (n L^2)); needs recorded triples.
std::vector<Point> cubic_points(const Trajectory& t, double burn_in = 0.1);

// y = A x(1-x) - B
struct ArchFit {
  double A = 0.0;
  double B = 0.0;
  std::optional<std::pair<double, double>> roots;  // r- <= r+, both in [0, 1]
  double rms = 0.0;
  std::size_t points = 0;

  double operator()(double x) const { return A * x * (1.0 - x) - B; }
};

ArchFit fit_arch(std::span<const Point> points);

// y = c0 + c1 x + c2 x^2 + c3 x^3
struct CubicFit {
  std::array<double, 4> coef{};
  std::vector<double> roots;  // real roots in [0, 1], ascending
  double rms = 0.0;
  std::size_t points = 0;

  double operator()(double x) const {
    return coef[0] + x * (coef[1] + x * (coef[2] + x * coef[3]));
  }
};

CubicFit fit_cubic(std::span<const Point> points);

// Real roots of c0 + c1 x + ... + ck x^k (trailing zero coefficients
// dropped), ascending.
std::vector<double> real_polynomial_roots(std::span<const double> coef);

struct NuCEstimate {
  std::optional<double> nu_c;  // empty when censored
  bool censored = false;
};

// Smallest grid nu whose arch (a, 1-a) strictly contains p, linearly
// interpolated in the endpoint against the previous grid point when that one
// also has an arch. Grid entries with no arch map to std::nullopt.
NuCEstimate arch_endpoints_to_nu_c(
    double p, const std::map<double, std::optional<std::pair<double, double>>>& arch_by_nu);

enum class RunClass { kRapid, kProlonged, kIndeterminate };

struct ClassifyConfig {
  double c_rapid = 10.0;
  double c_prolonged = 200.0;
};

// Rapid: absorbed within c_rapid n L ln(n L) updates. Prolonged: not absorbed
// and the run went at least c_prolonged n L updates.
RunClass classify_run(const RunResult& result, std::size_t n, double L,
                      const ClassifyConfig& config = {});

std::string to_string(RunClass c);

// CSV with header updates,time,N1,N10,N11,N00,Dmax[,N100,N101,N110,N010].
void write_trajectory_csv(std::ostream& out, const Trajectory& t);
// n and L are not part of the file; pass them to restore the scale.
Trajectory read_trajectory_csv(std::istream& in, std::size_t n = 0, double mean_degree = 0.0);

}  // namespace evoter
