#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "evoter/rng.hpp"

namespace evoter {

// Scaled parameters of the two-plane system. Plane 1 (focal vertex in state
// 1) uses alpha, beta; plane 0 uses delta, eps; both share eta.
struct AmeParams {
  double bar_alpha = 0.0;
  double bar_beta = 0.0;
  double bar_delta = 0.0;
  double bar_eps = 0.0;
  double bar_eta = 0.0;
  double nu = 1.0;
  double p = 0.5;

  double q() const { return 1.0 - p; }
  // Same parameters in both planes.
  static AmeParams symmetric(double alpha, double beta, double eta, double nu, double p = 0.5);
  void validate() const;
};

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// dz/dt = A z + c on one plane, z = (x, y) = scaled (1-neighbors, 0-neighbors).
// Plane 1: A = [-a, p+b; a, -(1+p+b)], a = nu*beta, b = nu*alpha.
// Plane 0 mirrors it with x <-> y, p -> q, alpha -> delta, beta -> eps.
struct PlaneSystem {
  int plane = 1;
  Mat2 A = Mat2::Zero();
  Vec2 c = Vec2::Zero();
  double lambda1 = 0.0;  // lambda1 <= lambda2 < 0
  double lambda2 = 0.0;
  Vec2 fixed_point = Vec2::Zero();
  double nu = 1.0;  // jump rate per unit of the jump coordinate

  bool repeated() const { return lambda2 - lambda1 < 1e-9; }
  // Coordinate driving jumps out of this plane: y on plane 1, x on plane 0.
  int jump_coordinate() const { return plane == 1 ? 1 : 0; }
  double trace() const { return A.trace(); }
  double det() const { return A.determinant(); }
};

// Direct constructor from (a, b, p) for plane 1 semantics; plane 0 applies
// the coordinate swap. p may be any value in [0, 1] here.
PlaneSystem make_plane(int plane, double a, double b, double p, double eta, double nu = 1.0);

PlaneSystem plane_system(int plane, const AmeParams& params);

// Closed forms; plane 1: y* = 2 eta, x* = eta (1 + 2p + 2 nu alpha) / (nu beta).
Vec2 fixed_point(int plane, const AmeParams& params);

// e^{At}
Mat2 exp_at(const PlaneSystem& s, double t);

// z* + e^{At} (z0 - z*)
Vec2 flow(const PlaneSystem& s, const Vec2& z0, double t);

// integral_0^t flow(z0, s) ds
Vec2 flow_integral(const PlaneSystem& s, const Vec2& z0, double t);

// The jump coordinate along the flow, r(t) = r* + u1 e^{l1 t} + u2 e^{l2 t}
// (or (u1 + u2 t) e^{l t} for a repeated root).
struct JumpRate {
  double limit = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  bool repeated = false;
  double nu = 1.0;

  double r(double t) const;
  // nu * integral_0^t max(r, 0)
  double hazard(double t) const;
  // sup_{t >= 0} r(t)
  double sup() const;

  // sign changes of r on (0, inf), ascending; r > 0 between them per r(0)
  std::vector<double> zeros;
  double primitive(double t) const;  // integral_0^t r
};

JumpRate jump_rate(const PlaneSystem& s, const Vec2& z0);

inline constexpr double kJumpCensor = 1e6;

// Inverse of the survival function: t with hazard(t) = -ln(1-u).
// Returns +inf when the total hazard is finite and below the target (the
// particle never leaves); throws CensoredJump if t would exceed kJumpCensor.
double jump_time_sample(const PlaneSystem& s, const Vec2& z0, double u);

struct Histogram2D {
  int bins = 100;
  double x_max = 1.0;
  double y_max = 1.0;
  std::vector<double> mass;  // bins * bins, row-major in x
  double outside = 0.0;      // mass that fell outside the window

  Histogram2D() = default;
  Histogram2D(int bins_, double x_max_, double y_max_)
      : bins(bins_), x_max(x_max_), y_max(y_max_), mass(static_cast<std::size_t>(bins_ * bins_)) {}
  void add(double x, double y, double w);
  double total() const;
  double& at(int ix, int iy) { return mass[static_cast<std::size_t>(ix * bins + iy)]; }
  double at(int ix, int iy) const { return mass[static_cast<std::size_t>(ix * bins + iy)]; }
  void merge(const Histogram2D& other);
};

struct PathSample {
  double t = 0.0;
  int plane = 1;
  double x = 0.0;
  double y = 0.0;
};

struct ForwardOptions {
  double record_dt = 0.0;  // path grid; 0 disables the path
  double hist_dt = 0.01;   // occupation sampling step
  int bins = 100;          // 0 disables the histogram
  double burn_in = 0.0;    // statistics ignore t < burn_in
  // window upper limits; <= 0 means 3 * the largest fixed-point coordinate
  double x_max = 0.0;
  double y_max = 0.0;
};

struct ForwardResult {
  std::vector<PathSample> path;
  std::array<Histogram2D, 2> histogram;  // indexed by plane
  std::array<double, 2> time_in_plane{};
  std::array<std::vector<double>, 2> sojourns;  // completed sojourn lengths
  std::array<double, 2> mean_sojourn{};         // nu_0, nu_1 estimates
  // exact integral of the position over the time spent in each plane
  std::array<Vec2, 2> position_integral{Vec2::Zero(), Vec2::Zero()};
  std::uint64_t jumps = 0;
  int final_plane = 1;
  Vec2 final_position = Vec2::Zero();
  double T = 0.0;
};

ForwardResult forward_simulate(const AmeParams& params, const Vec2& z0, int start_plane, double T,
                               Seed seed, const ForwardOptions& options = {},
                               std::uint64_t replica = 0);

// One cycle starting in `first` plane: flow there for tau(u_first), jump,
// flow in the other plane for tau(u_second), jump back. G starts in plane 0,
// H in plane 1. Returns the entry point back into the first plane.
Vec2 cycle_map(const PlaneSystem& first, const PlaneSystem& second, const Vec2& z, double u_first,
               double u_second);

struct BackwardResult {
  Vec2 y_z = Vec2::Zero();
  Vec2 y_w = Vec2::Zero();
  std::vector<double> distance;  // |phi^{-n}(z) - phi^{-n}(w)|, n = 1..n_cycles
};

// Backward composition phi^{-n} = G^1 o ... o G^n (start_plane 0) or
// gamma^{-n} = H^1 o ... o H^n (start_plane 1), with the cycle-k uniforms
// shared by both starting points.
BackwardResult backward_iterate(const AmeParams& params, Seed seed, int n_cycles, const Vec2& z,
                                const Vec2& w, int start_plane = 0, std::uint64_t replica = 0);

// Forward composition phi^n(z) with the same uniforms as backward_iterate.
Vec2 forward_iterate(const AmeParams& params, Seed seed, int n_cycles, const Vec2& z,
                     int start_plane = 0, std::uint64_t replica = 0);

enum class StationaryMode { kTimeAverage, kRenewalWeighted };

struct StationaryEstimate {
  std::array<Histogram2D, 2> density;  // normalized to total mass 1 over both planes
  std::array<double, 2> mean_sojourn{};
  std::array<double, 2> mean_sojourn_se{};
  double plane1_fraction = 0.0;
  double plane1_fraction_se = 0.0;
  std::array<Vec2, 2> mean_position{Vec2::Zero(), Vec2::Zero()};
};

struct StationaryOptions {
  int bins = 100;
  int cycles = 60;        // backward depth for the renewal mode
  double hist_dt = 0.01;  // path sampling inside sojourns / forward run
  int batches = 20;       // batch means for the time-average s.e.
};

// budget: total simulated time (time_average) or number of backward samples
// per plane (renewal_weighted).
StationaryEstimate stationary_estimate(const AmeParams& params, StationaryMode mode, double budget,
                                       Seed seed, const StationaryOptions& options = {});

// Unscaled pre-limit parameters; the within-plane drift is the continuum ODE
// at scale L and jumps occur at rate nu * k / L (plane 1) or nu * j / L.
struct UnscaledAmeParams {
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double eps = 0.0;
  double eta = 0.0;
  double nu = 1.0;
  double L = 1.0;
  double p = 0.5;
};

struct FiniteLMoments {
  std::array<double, 2> occupancy{};  // time fractions, sum to 1
  std::array<Vec2, 2> mean_scaled{Vec2::Zero(), Vec2::Zero()};  // mean (j, k) / L per plane
  std::array<Vec2, 2> mean_scaled_se{Vec2::Zero(), Vec2::Zero()};
  std::array<double, 2> mean_sojourn{};
};

FiniteLMoments finite_L_two_plane(const UnscaledAmeParams& params, std::size_t n_particles,
                                  double T, Seed seed, double burn_in = 0.0);

void write_histogram_csv(std::ostream& out, const std::array<Histogram2D, 2>& h);
void write_path_csv(std::ostream& out, const std::vector<PathSample>& path);

}  // namespace evoter
