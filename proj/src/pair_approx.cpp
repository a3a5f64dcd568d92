#include "evoter/pair_approx.hpp"

#include <cmath>
#include <limits>

#include "evoter/errors.hpp"

namespace evoter {

PaEquilibrium pa_equilibrium(double p, double nu, double L) {
  if (!(nu > 0.0)) throw InvalidInput("pa_equilibrium needs nu > 0");
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("pa_equilibrium needs 0 < p < 1");
  if (!(L > 0.0)) throw InvalidInput("pa_equilibrium needs L > 0");
  const double q = 1.0 - p;
  const double c = pa_nu_c(p);
  PaEquilibrium eq;
  eq.p = p;
  eq.nu = nu;
  eq.L = L;
  eq.J0 = L * (1.0 - c / nu) * p;
  eq.K1 = L * (1.0 - c / nu) * q;
  eq.J1 = eq.J0 + L * p / nu;
  eq.K0 = eq.K1 + L * q / nu;
  eq.feasible = nu > c;
  return eq;
}

double pa_nu_c(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("p must lie in [0, 1]");
  return p * p + (1.0 - p) * (1.0 - p);
}

PaState pa_rhs(double p, double nu, double L, const PaState& s) {
  const double q = 1.0 - p;
  const double r = nu / L;
  PaState d;
  // N1 J1 = N11, N0 K0 = N00, N1 K1 = N0 J0 = N10
  d.n11 = 2.0 * s.n10 * (p + r * (s.n10 / q - s.n11 / p));
  d.n00 = 2.0 * s.n10 * (q + r * (s.n10 / p - s.n00 / q));
  d.n10 = -0.5 * (d.n11 + d.n00);
  return d;
}

PaState pa_state_of(const PaEquilibrium& eq) {
  return {eq.p * eq.K1, eq.p * eq.J1, (1.0 - eq.p) * eq.K0};
}

namespace {

PaState axpy(const PaState& s, double h, const PaState& d) {
  return {s.n10 + h * d.n10, s.n11 + h * d.n11, s.n00 + h * d.n00};
}

PaState rk4(double p, double nu, double L, const PaState& s, double h) {
  const PaState k1 = pa_rhs(p, nu, L, s);
  const PaState k2 = pa_rhs(p, nu, L, axpy(s, h / 2, k1));
  const PaState k3 = pa_rhs(p, nu, L, axpy(s, h / 2, k2));
  const PaState k4 = pa_rhs(p, nu, L, axpy(s, h, k3));
  PaState out;
  out.n10 = s.n10 + h / 6 * (k1.n10 + 2 * k2.n10 + 2 * k3.n10 + k4.n10);
  out.n11 = s.n11 + h / 6 * (k1.n11 + 2 * k2.n11 + 2 * k3.n11 + k4.n11);
  out.n00 = s.n00 + h / 6 * (k1.n00 + 2 * k2.n00 + 2 * k3.n00 + k4.n00);
  // rebuild n10 from the conservation law so it holds to rounding
  const double total = s.n11 + 2 * s.n10 + s.n00;
  out.n10 = 0.5 * (total - out.n11 - out.n00);
  return out;
}

}  // namespace

PaTrajectory pa_integrate(double p, double nu, double L, PaState init, double t_end, double dt,
                          const PaOptions& options) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("pa_integrate needs 0 < p < 1");
  if (!(L > 0.0) || !(nu >= 0.0)) throw InvalidInput("pa_integrate needs L > 0, nu >= 0");
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw InvalidInput("pa_integrate needs dt > 0, t_end >= 0");
  if (init.n10 < 0 || init.n11 < 0 || init.n00 < 0) throw InvalidInput("initial state negative");
  if (std::abs(init.n11 + 2 * init.n10 + init.n00 - L) > 1e-9 * std::max(1.0, L)) {
    throw InvalidInput("initial state must satisfy n11 + 2 n10 + n00 = L");
  }

  PaTrajectory out;
  PaState s = init;
  double t = 0.0;
  out.samples.push_back({t, s});
  std::size_t steps = 0;
  while (t < t_end) {
    if (s.n10 <= options.absorb_tol) {
      out.absorbed = true;
      break;
    }
    double h = std::min(dt, t_end - t);
    PaState next = rk4(p, nu, L, s, h);
    int halvings = 0;
    while (next.n11 < 0 || next.n00 < 0 || next.n10 < -options.absorb_tol) {
      if (++halvings > options.max_halvings) {
        throw IntegrationError("pa_integrate: negative state persists after step halving");
      }
      h /= 2;
      next = rk4(p, nu, L, s, h);
    }
    if (next.n10 < 0) next.n10 = 0;
    s = next;
    t += h;
    if (++steps % options.record_every == 0 || t >= t_end) out.samples.push_back({t, s});
  }
  if (s.n10 <= options.absorb_tol) out.absorbed = true;
  if (out.samples.back().t != t) out.samples.push_back({t, s});
  return out;
}

double neighbor_count_correlation(const OpinionGraph& g, Opinion opinion) {
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  double m = 0;
  for (std::size_t i = 0; i < g.class_size(opinion); ++i) {
    const Vertex v = g.class_member(opinion, i);
    const auto x = static_cast<double>(g.ones_around(v));
    const auto y = static_cast<double>(g.zeros_around(v));
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
    m += 1;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  const double cxy = sxy - sx * sy / m;
  const double cxx = sxx - sx * sx / m;
  const double cyy = syy - sy * sy / m;
  if (cxx <= 0 || cyy <= 0) return std::numeric_limits<double>::quiet_NaN();
  return cxy / std::sqrt(cxx * cyy);
}

}  // namespace evoter
