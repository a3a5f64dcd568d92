#include "evoter/ame.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include <boost/math/tools/toms748_solve.hpp>

#include "evoter/errors.hpp"

namespace evoter {

AmeParams AmeParams::symmetric(double alpha, double beta, double eta, double nu, double p) {
  AmeParams a;
  a.bar_alpha = alpha;
  a.bar_beta = beta;
  a.bar_delta = alpha;
  a.bar_eps = beta;
  a.bar_eta = eta;
  a.nu = nu;
  a.p = p;
  return a;
}

void AmeParams::validate() const {
  if (!(nu > 0.0)) throw InvalidInput("ame: nu must be positive");
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("ame: p must lie in (0, 1)");
  if (!(bar_alpha >= 0.0 && bar_delta >= 0.0 && bar_eta >= 0.0)) {
    throw InvalidInput("ame: alpha, delta, eta must be >= 0");
  }
  if (!(bar_beta > 0.0 && bar_eps > 0.0)) throw InvalidInput("ame: beta and eps must be > 0");
}

PlaneSystem make_plane(int plane, double a, double b, double p, double eta, double nu) {
  if (plane != 0 && plane != 1) throw InvalidInput("plane must be 0 or 1");
  if (!(a > 0.0)) throw InvalidInput("plane system needs a > 0");
  PlaneSystem s;
  s.plane = plane;
  s.nu = nu;
  if (plane == 1) {
    s.A << -a, p + b, a, -(1.0 + p + b);
  } else {
    s.A << -(1.0 + p + b), a, p + b, -a;
  }
  s.c = Vec2(eta, eta);
  const double tr = -(1.0 + p + a + b);
  const double disc = tr * tr - 4.0 * a;
  if (disc < -1e-12) throw ContractError("plane system: complex eigenvalues");
  const double root = std::sqrt(std::max(disc, 0.0));
  s.lambda1 = (tr - root) / 2.0;
  // the smaller-magnitude root from Vieta avoids cancellation
  s.lambda2 = root > 0.0 ? a / s.lambda1 : tr / 2.0;
  if (plane == 1) {
    s.fixed_point = Vec2(eta * (1.0 + 2.0 * p + 2.0 * b) / a, 2.0 * eta);
  } else {
    s.fixed_point = Vec2(2.0 * eta, eta * (1.0 + 2.0 * p + 2.0 * b) / a);
  }
  return s;
}

PlaneSystem plane_system(int plane, const AmeParams& params) {
  params.validate();
  if (plane == 1) {
    return make_plane(1, params.nu * params.bar_beta, params.nu * params.bar_alpha, params.p,
                      params.bar_eta, params.nu);
  }
  return make_plane(0, params.nu * params.bar_eps, params.nu * params.bar_delta, params.q(),
                    params.bar_eta, params.nu);
}

Vec2 fixed_point(int plane, const AmeParams& params) {
  params.validate();
  const double eta = params.bar_eta;
  if (plane == 1) {
    return {eta * (1.0 + 2.0 * params.p + 2.0 * params.nu * params.bar_alpha) /
                (params.nu * params.bar_beta),
            2.0 * eta};
  }
  if (plane != 0) throw InvalidInput("plane must be 0 or 1");
  return {2.0 * eta, eta * (1.0 + 2.0 * params.q() + 2.0 * params.nu * params.bar_delta) /
                         (params.nu * params.bar_eps)};
}

Mat2 exp_at(const PlaneSystem& s, double t) {
  const Mat2 I = Mat2::Identity();
  if (s.repeated()) {
    const double l = (s.lambda1 + s.lambda2) / 2.0;
    return std::exp(l * t) * (I + (s.A - l * I) * t);
  }
  const double e1 = std::exp(s.lambda1 * t);
  const double e2 = std::exp(s.lambda2 * t);
  return (e1 * (s.A - s.lambda2 * I) - e2 * (s.A - s.lambda1 * I)) / (s.lambda1 - s.lambda2);
}

Vec2 flow(const PlaneSystem& s, const Vec2& z0, double t) {
  if (t < 0.0) throw InvalidInput("flow needs t >= 0");
  return s.fixed_point + exp_at(s, t) * (z0 - s.fixed_point);
}

Vec2 flow_integral(const PlaneSystem& s, const Vec2& z0, double t) {
  // integral of e^{As} = A^{-1}(e^{At} - I)
  const Mat2 I = Mat2::Identity();
  return s.fixed_point * t + s.A.inverse() * (exp_at(s, t) - I) * (z0 - s.fixed_point);
}

namespace {

// (e^{l t} - 1) / l, stable near l t = 0
double expm1_over(double l, double t) {
  if (l == 0.0) return t;
  return std::expm1(l * t) / l;
}

template <class F>
double bracketed_root(F f, double lo, double hi) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) {
    return std::abs(b - a) <= 1e-12 * std::max({std::abs(a), std::abs(b), 1e-300});
  };
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return (a + b) / 2.0;
}

}  // namespace

double JumpRate::r(double t) const {
  if (repeated) return limit + (u1 + u2 * t) * std::exp(l1 * t);
  return limit + u1 * std::exp(l1 * t) + u2 * std::exp(l2 * t);
}

double JumpRate::primitive(double t) const {
  if (repeated) {
    // integral of (u1 + u2 s) e^{l s}
    const double e = std::exp(l1 * t);
    return limit * t + u1 * expm1_over(l1, t) + u2 * (t * e - expm1_over(l1, t)) / l1;
  }
  return limit * t + u1 * expm1_over(l1, t) + u2 * expm1_over(l2, t);
}

double JumpRate::hazard(double t) const {
  if (t <= 0.0) return 0.0;
  // r keeps its sign between consecutive zeros
  double total = 0.0;
  double start = 0.0;
  // probe near the piece start: far-out midpoints can underflow to 0
  const double reach = 1.0 / std::abs(l2);
  auto piece = [&](double end) {
    if (r(start + std::min(0.5 * (end - start), reach)) > 0.0) {
      total += primitive(end) - primitive(start);
    }
    start = end;
  };
  for (double z : zeros) {
    if (z >= t) break;
    piece(z);
  }
  piece(t);
  return nu * std::max(total, 0.0);
}

double JumpRate::sup() const {
  double best = std::max(r(0.0), limit);
  double sc = -1.0;
  if (repeated) {
    if (u2 != 0.0) sc = -(u2 + l1 * u1) / (l1 * u2);
  } else if (u1 != 0.0 && u2 != 0.0) {
    const double ratio = -(u2 * l2) / (u1 * l1);
    if (ratio > 0.0) sc = std::log(ratio) / (l1 - l2);
  }
  if (sc > 0.0) best = std::max(best, r(sc));
  return best;
}

JumpRate jump_rate(const PlaneSystem& s, const Vec2& z0) {
  const int k = s.jump_coordinate();
  const Vec2 d = z0 - s.fixed_point;
  const Mat2 I = Mat2::Identity();
  JumpRate jr;
  jr.limit = s.fixed_point(k);
  jr.nu = s.nu;
  jr.repeated = s.repeated();
  if (jr.repeated) {
    const double l = (s.lambda1 + s.lambda2) / 2.0;
    jr.l1 = jr.l2 = l;
    jr.u1 = d(k);
    jr.u2 = ((s.A - l * I) * d)(k);
  } else {
    jr.l1 = s.lambda1;
    jr.l2 = s.lambda2;
    const double gap = s.lambda1 - s.lambda2;
    jr.u1 = ((s.A - s.lambda2 * I) * d)(k) / gap;
    jr.u2 = -((s.A - s.lambda1 * I) * d)(k) / gap;
  }

  // r' has at most one zero, so r is monotone on [0, sc] and [sc, inf)
  double sc = -1.0;
  if (jr.repeated) {
    if (jr.u2 != 0.0) sc = -(jr.u2 + jr.l1 * jr.u1) / (jr.l1 * jr.u2);
  } else if (jr.u1 != 0.0 && jr.u2 != 0.0) {
    const double ratio = -(jr.u2 * jr.l2) / (jr.u1 * jr.l1);
    if (ratio > 0.0) sc = std::log(ratio) / (jr.l1 - jr.l2);
  }
  std::vector<double> knots{0.0};
  if (sc > 0.0) knots.push_back(sc);
  // far enough out that the transients are below rounding
  const double far = std::max(knots.back() * 2.0 + 1.0, 60.0 / std::abs(jr.l2));
  knots.push_back(far);
  auto f = [&jr](double t) { return jr.r(t); };
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i];
    const double b = knots[i + 1];
    const double fa = f(a);
    const double fb = f(b);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      jr.zeros.push_back(bracketed_root(f, a, b));
    }
  }
  return jr;
}

double jump_time_sample(const PlaneSystem& s, const Vec2& z0, double u) {
  if (!(u > 0.0 && u < 1.0)) throw InvalidInput("jump_time_sample needs u in (0, 1)");
  const JumpRate jr = jump_rate(s, z0);
  const double target = -std::log1p(-u);
  const double at_censor = jr.hazard(kJumpCensor);
  if (at_censor < target) {
    if (jr.limit > 0.0) {
      throw CensoredJump("jump time beyond " + std::to_string(kJumpCensor) + " time units");
    }
    return std::numeric_limits<double>::infinity();
  }
  const double base = jr.nu * std::max(jr.limit, 1e-12);
  double hi = std::min(1.0 / base, kJumpCensor);
  while (jr.hazard(hi) < target && hi < kJumpCensor) hi = std::min(hi * 2.0, kJumpCensor);
  auto f = [&](double t) { return jr.hazard(t) - target; };
  double fhi = f(hi);
  if (fhi == 0.0) return hi;
  double flo = -target;
  std::uintmax_t iters = 300;
  auto tol = [](double a, double b) {
    return std::abs(b - a) <= 1e-10 * std::max(std::abs(a), std::abs(b));
  };
  auto [a, b] = boost::math::tools::toms748_solve(f, 0.0, hi, flo, fhi, tol, iters);
  return (a + b) / 2.0;
}

void Histogram2D::add(double x, double y, double w) {
  if (x < 0.0 || y < 0.0 || x >= x_max || y >= y_max) {
    outside += w;
    return;
  }
  const int ix = std::min(bins - 1, static_cast<int>(x / x_max * bins));
  const int iy = std::min(bins - 1, static_cast<int>(y / y_max * bins));
  at(ix, iy) += w;
}

double Histogram2D::total() const {
  return std::accumulate(mass.begin(), mass.end(), outside);
}

void Histogram2D::merge(const Histogram2D& other) {
  if (other.bins != bins || other.x_max != x_max || other.y_max != y_max) {
    throw InvalidInput("histogram windows differ");
  }
  for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += other.mass[i];
  outside += other.outside;
}

namespace {

std::pair<double, double> default_window(const AmeParams& params) {
  const Vec2 f1 = fixed_point(1, params);
  const Vec2 f0 = fixed_point(0, params);
  double xm = 3.0 * std::max(f1.x(), f0.x());
  double ym = 3.0 * std::max(f1.y(), f0.y());
  if (!(xm > 0.0)) xm = 1.0;
  if (!(ym > 0.0)) ym = 1.0;
  return {xm, ym};
}

std::array<Histogram2D, 2> make_histograms(const AmeParams& params, int bins, double x_max,
                                           double y_max) {
  auto [xm, ym] = default_window(params);
  if (x_max > 0.0) xm = x_max;
  if (y_max > 0.0) ym = y_max;
  const int b = std::max(bins, 1);
  return {Histogram2D(b, xm, ym), Histogram2D(b, xm, ym)};
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

ForwardResult forward_simulate(const AmeParams& params, const Vec2& z0, int start_plane, double T,
                               Seed seed, const ForwardOptions& options, std::uint64_t replica) {
  if (!(T > 0.0)) throw InvalidInput("forward_simulate needs T > 0");
  if (start_plane != 0 && start_plane != 1) throw InvalidInput("plane must be 0 or 1");
  const std::array<PlaneSystem, 2> sys{plane_system(0, params), plane_system(1, params)};
  Rng rng(seed, replica, Stream::kAme);

  ForwardResult out;
  out.T = T;
  const bool with_hist = options.bins > 0;
  if (with_hist) out.histogram = make_histograms(params, options.bins, options.x_max, options.y_max);
  const double burn = options.burn_in;

  int plane = start_plane;
  Vec2 z = z0;
  double t = 0.0;
  std::uint64_t next_rec = 0;
  std::uint64_t next_hist = 0;
  while (t < T) {
    const PlaneSystem& s = sys[static_cast<std::size_t>(plane)];
    const double tau = jump_time_sample(s, z, rng.uniform_open());
    const double end = std::min(t + tau, T);

    if (options.record_dt > 0.0) {
      for (;; ++next_rec) {
        const double tg = static_cast<double>(next_rec) * options.record_dt;
        if (tg > T || (tg >= end && end < T)) break;
        out.path.push_back({tg, plane, 0.0, 0.0});
        const Vec2 zz = flow(s, z, std::max(tg - t, 0.0));
        out.path.back().x = zz.x();
        out.path.back().y = zz.y();
      }
    }
    if (with_hist) {
      for (;; ++next_hist) {
        const double tg = static_cast<double>(next_hist) * options.hist_dt;
        if (tg >= end) break;
        if (tg < burn) continue;
        const Vec2 zz = flow(s, z, tg - t);
        out.histogram[static_cast<std::size_t>(plane)].add(zz.x(), zz.y(), options.hist_dt);
      }
    }
    // statistics over [max(t, burn), end]
    if (end > burn) {
      const double from = std::max(t, burn);
      const Vec2 zf = from > t ? flow(s, z, from - t) : z;
      out.time_in_plane[static_cast<std::size_t>(plane)] += end - from;
      out.position_integral[static_cast<std::size_t>(plane)] += flow_integral(s, zf, end - from);
    }
    if (t + tau <= T) {
      if (t >= burn) out.sojourns[static_cast<std::size_t>(plane)].push_back(tau);
      z = flow(s, z, tau);
      plane = 1 - plane;
      ++out.jumps;
      t += tau;
    } else {
      z = flow(s, z, T - t);
      t = T;
    }
  }
  out.final_plane = plane;
  out.final_position = z;
  for (int i = 0; i < 2; ++i) out.mean_sojourn[static_cast<std::size_t>(i)] = mean_of(out.sojourns[static_cast<std::size_t>(i)]);
  return out;
}

Vec2 cycle_map(const PlaneSystem& first, const PlaneSystem& second, const Vec2& z, double u_first,
               double u_second) {
  // a particle that never leaves converges to the plane's fixed point
  auto leave = [](const PlaneSystem& s, const Vec2& from, double u) -> Vec2 {
    const double tau = jump_time_sample(s, from, u);
    return std::isfinite(tau) ? flow(s, from, tau) : s.fixed_point;
  };
  const Vec2 w = leave(first, z, u_first);
  return leave(second, w, u_second);
}

namespace {

struct CycleUniforms {
  std::vector<double> u0;  // plane-0 sojourns
  std::vector<double> u1;  // plane-1 sojourns
};

CycleUniforms draw_uniforms(Seed seed, std::uint64_t replica, int n) {
  Rng rng(seed, replica, Stream::kAme);
  CycleUniforms cu;
  for (int k = 0; k < n; ++k) {
    cu.u0.push_back(rng.uniform_open());
    cu.u1.push_back(rng.uniform_open());
  }
  return cu;
}

// G^k (start plane 0) or H^k (start plane 1), k zero-based
Vec2 apply_cycle(const std::array<PlaneSystem, 2>& sys, int start_plane, const CycleUniforms& cu,
                 int k, const Vec2& z) {
  const auto kk = static_cast<std::size_t>(k);
  if (start_plane == 0) return cycle_map(sys[0], sys[1], z, cu.u0[kk], cu.u1[kk]);
  return cycle_map(sys[1], sys[0], z, cu.u1[kk], cu.u0[kk]);
}

Vec2 backward_point(const std::array<PlaneSystem, 2>& sys, int start_plane,
                    const CycleUniforms& cu, int n, Vec2 z) {
  for (int k = n - 1; k >= 0; --k) z = apply_cycle(sys, start_plane, cu, k, z);
  return z;
}

}  // namespace

BackwardResult backward_iterate(const AmeParams& params, Seed seed, int n_cycles, const Vec2& z,
                                const Vec2& w, int start_plane, std::uint64_t replica) {
  if (n_cycles < 1) throw InvalidInput("backward_iterate needs n_cycles >= 1");
  if (start_plane != 0 && start_plane != 1) throw InvalidInput("plane must be 0 or 1");
  const std::array<PlaneSystem, 2> sys{plane_system(0, params), plane_system(1, params)};
  const CycleUniforms cu = draw_uniforms(seed, replica, n_cycles);
  BackwardResult out;
  for (int n = 1; n <= n_cycles; ++n) {
    out.y_z = backward_point(sys, start_plane, cu, n, z);
    out.y_w = backward_point(sys, start_plane, cu, n, w);
    out.distance.push_back((out.y_z - out.y_w).norm());
  }
  return out;
}

Vec2 forward_iterate(const AmeParams& params, Seed seed, int n_cycles, const Vec2& z,
                     int start_plane, std::uint64_t replica) {
  if (n_cycles < 1) throw InvalidInput("forward_iterate needs n_cycles >= 1");
  const std::array<PlaneSystem, 2> sys{plane_system(0, params), plane_system(1, params)};
  const CycleUniforms cu = draw_uniforms(seed, replica, n_cycles);
  Vec2 y = z;
  for (int k = 0; k < n_cycles; ++k) y = apply_cycle(sys, start_plane, cu, k, y);
  return y;
}

StationaryEstimate stationary_estimate(const AmeParams& params, StationaryMode mode, double budget,
                                       Seed seed, const StationaryOptions& options) {
  if (!(budget > 0.0)) throw InvalidInput("stationary_estimate needs a positive budget");
  params.validate();
  StationaryEstimate est;
  est.density = make_histograms(params, options.bins, 0.0, 0.0);

  if (mode == StationaryMode::kTimeAverage) {
    const int batches = std::max(options.batches, 2);
    const double seg = budget / batches;
    ForwardOptions fo;
    fo.bins = options.bins;
    fo.hist_dt = options.hist_dt;
    int plane = 1;
    Vec2 z = fixed_point(1, params);
    // warm-up so the first batch starts near stationarity
    {
      ForwardOptions warm;
      warm.bins = 0;
      auto r = forward_simulate(params, z, plane, std::min(seg, 50.0), seed, warm, 1u << 20);
      plane = r.final_plane;
      z = r.final_position;
    }
    std::vector<double> frac;
    std::array<std::vector<double>, 2> soj;
    std::array<double, 2> time{};
    std::array<Vec2, 2> pint{Vec2::Zero(), Vec2::Zero()};
    for (int b = 0; b < batches; ++b) {
      auto r = forward_simulate(params, z, plane, seg, seed, fo, static_cast<std::uint64_t>(b));
      plane = r.final_plane;
      z = r.final_position;
      frac.push_back(r.time_in_plane[1] / seg);
      for (std::size_t i = 0; i < 2; ++i) {
        est.density[i].merge(r.histogram[i]);
        soj[i].insert(soj[i].end(), r.sojourns[i].begin(), r.sojourns[i].end());
        time[i] += r.time_in_plane[i];
        pint[i] += r.position_integral[i];
      }
    }
    est.plane1_fraction = mean_of(frac);
    est.plane1_fraction_se = se_of(frac);
    for (std::size_t i = 0; i < 2; ++i) {
      est.mean_sojourn[i] = mean_of(soj[i]);
      est.mean_sojourn_se[i] = se_of(soj[i]);
      if (time[i] > 0.0) est.mean_position[i] = pint[i] / time[i];
    }
    const double total = time[0] + time[1];
    for (auto& h : est.density) {
      for (double& m : h.mass) m /= total;
      h.outside /= total;
    }
    return est;
  }

  // renewal weighting: entry points from the backward limit, each followed
  // along its own sampled sojourn
  const std::array<PlaneSystem, 2> sys{plane_system(0, params), plane_system(1, params)};
  const auto samples = static_cast<std::size_t>(budget);
  if (samples < 2) throw InvalidInput("renewal mode needs at least 2 samples");
  Rng aux(seed, 0, Stream::kAmeAux);
  std::array<std::vector<double>, 2> taus;
  std::array<Vec2, 2> pint{Vec2::Zero(), Vec2::Zero()};
  for (std::size_t m = 0; m < samples; ++m) {
    for (int i = 0; i < 2; ++i) {
      // entry points into plane i come from G (i = 0) or H (i = 1)
      const CycleUniforms cu = draw_uniforms(seed, 2 * m + static_cast<std::size_t>(i), options.cycles);
      const Vec2 entry = backward_point(sys, i, cu, options.cycles, sys[static_cast<std::size_t>(i)].fixed_point);
      const PlaneSystem& s = sys[static_cast<std::size_t>(i)];
      double tau = jump_time_sample(s, entry, aux.uniform_open());
      if (!std::isfinite(tau)) throw CensoredJump("renewal mode: sojourn never ends");
      taus[static_cast<std::size_t>(i)].push_back(tau);
      pint[static_cast<std::size_t>(i)] += flow_integral(s, entry, tau);
      for (double a = 0.5 * options.hist_dt; a < tau; a += options.hist_dt) {
        const Vec2 zz = flow(s, entry, a);
        est.density[static_cast<std::size_t>(i)].add(zz.x(), zz.y(), options.hist_dt);
      }
    }
  }
  const double n0 = mean_of(taus[0]);
  const double n1 = mean_of(taus[1]);
  est.mean_sojourn = {n0, n1};
  est.mean_sojourn_se = {se_of(taus[0]), se_of(taus[1])};
  const double sum = n0 + n1;
  est.plane1_fraction = n1 / sum;
  est.plane1_fraction_se = std::sqrt(n0 * n0 * est.mean_sojourn_se[1] * est.mean_sojourn_se[1] +
                                     n1 * n1 * est.mean_sojourn_se[0] * est.mean_sojourn_se[0]) /
                           (sum * sum);
  const double total_time =
      std::accumulate(taus[0].begin(), taus[0].end(), 0.0) + std::accumulate(taus[1].begin(), taus[1].end(), 0.0);
  for (std::size_t i = 0; i < 2; ++i) {
    const double ti = std::accumulate(taus[i].begin(), taus[i].end(), 0.0);
    if (ti > 0.0) est.mean_position[i] = pint[i] / ti;
    for (double& m : est.density[i].mass) m /= total_time;
    est.density[i].outside /= total_time;
  }
  return est;
}

FiniteLMoments finite_L_two_plane(const UnscaledAmeParams& u, std::size_t n_particles, double T,
                                  Seed seed, double burn_in) {
  if (!(u.L >= 1.0)) throw InvalidInput("finite_L_two_plane needs L >= 1");
  if (n_particles == 0) throw InvalidInput("need at least one particle");
  if (!(burn_in >= 0.0 && burn_in < T)) throw InvalidInput("burn-in must lie in [0, T)");
  AmeParams s;
  s.bar_alpha = u.alpha / u.L;
  s.bar_beta = u.beta / u.L;
  s.bar_delta = u.delta / u.L;
  s.bar_eps = u.eps / u.L;
  s.bar_eta = u.eta / u.L;
  s.nu = u.nu;
  s.p = u.p;
  ForwardOptions fo;
  fo.bins = 0;
  fo.burn_in = burn_in;

  FiniteLMoments out;
  std::array<std::vector<double>, 2> mx, my, occ, soj;
  for (std::size_t i = 0; i < n_particles; ++i) {
    auto r = forward_simulate(s, fixed_point(1, s), 1, T, seed, fo, i);
    const double total = r.time_in_plane[0] + r.time_in_plane[1];
    for (std::size_t k = 0; k < 2; ++k) {
      occ[k].push_back(r.time_in_plane[k] / total);
      if (r.time_in_plane[k] > 0.0) {
        const Vec2 m = r.position_integral[k] / r.time_in_plane[k];
        mx[k].push_back(m.x());
        my[k].push_back(m.y());
      }
      soj[k].insert(soj[k].end(), r.sojourns[k].begin(), r.sojourns[k].end());
    }
  }
  for (std::size_t k = 0; k < 2; ++k) {
    out.occupancy[k] = mean_of(occ[k]);
    out.mean_scaled[k] = Vec2(mean_of(mx[k]), mean_of(my[k]));
    out.mean_scaled_se[k] = Vec2(se_of(mx[k]), se_of(my[k]));
    out.mean_sojourn[k] = mean_of(soj[k]);
  }
  return out;
}

void write_histogram_csv(std::ostream& out, const std::array<Histogram2D, 2>& h) {
  out << "bin_x,bin_y,plane,mass\n";
  for (int plane = 0; plane < 2; ++plane) {
    const Histogram2D& g = h[static_cast<std::size_t>(plane)];
    for (int ix = 0; ix < g.bins; ++ix) {
      for (int iy = 0; iy < g.bins; ++iy) {
        const double m = g.at(ix, iy);
        if (m != 0.0) out << ix << ',' << iy << ',' << plane << ',' << m << '\n';
      }
    }
  }
}

void write_path_csv(std::ostream& out, const std::vector<PathSample>& path) {
  out << "t,plane,x,y\n";
  for (const auto& s : path) out << s.t << ',' << s.plane << ',' << s.x << ',' << s.y << '\n';
}

}  // namespace evoter
