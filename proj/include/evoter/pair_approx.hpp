#pragma once

#include <vector>

#include "evoter/opinion_graph.hpp"

namespace evoter {

// Mean numbers of 1-neighbors (J) and 0-neighbors (K) of a vertex in state i.
struct PaEquilibrium {
  double p = 0.0;
  double nu = 0.0;
  double L = 0.0;
  double J0 = 0.0;
  double J1 = 0.0;
  double K1 = 0.0;
  double K0 = 0.0;
  bool feasible = false;
};

PaEquilibrium pa_equilibrium(double p, double nu, double L);

// p^2 + (1-p)^2
double pa_nu_c(double p);

// Per-capita pair densities: N10/n, N11/n, N00/n (N11, N00 ordered).
struct PaState {
  double n10 = 0.0;
  double n11 = 0.0;
  double n00 = 0.0;
};

struct PaSample {
  double t = 0.0;
  PaState s;
};

struct PaOptions {
  double absorb_tol = 1e-12;  // stop once n10 falls to this
  int max_halvings = 20;
  std::size_t record_every = 1;
};

struct PaTrajectory {
  std::vector<PaSample> samples;
  bool absorbed = false;
};

// Fixed-step RK4 on the closed pair system; the step is halved (up to
// max_halvings times) whenever it would drive n11 or n00 negative.
PaTrajectory pa_integrate(double p, double nu, double L, PaState init, double t_end, double dt,
                          const PaOptions& options = {});

// Time derivative of the pair system.
PaState pa_rhs(double p, double nu, double L, const PaState& s);

// The state (n10, n11, n00) implied by an equilibrium.
PaState pa_state_of(const PaEquilibrium& eq);

// Pearson correlation between the 1-neighbor and 0-neighbor counts over the
// vertices in state `opinion`; NaN when undefined.
double neighbor_count_correlation(const OpinionGraph& g, Opinion opinion);

}  // namespace evoter
