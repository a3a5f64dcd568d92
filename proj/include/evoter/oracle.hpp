#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evoter/opinion_graph.hpp"

namespace evoter {

enum class DriftMode {
  kIdealizedTarget,   // target state 1 w.p. p = N1/n, 0 otherwise
  kExcludeNeighbors,  // the simulator's rule: uniform over non-neighbors of the actor
};

std::string to_string(DriftMode m);
DriftMode parse_drift_mode(const std::string& s);

// Drift of (N10, N11/2, N00/2) as (c0 + c1 r) / den with r = nu / L.
// Integer numerators keep the idealized comparison exact.
struct RationalDrift {
  std::array<std::int64_t, 3> c0{};
  std::array<std::int64_t, 3> c1{};
  std::int64_t den = 1;

  std::array<double, 3> at(double r) const;
  friend bool operator==(const RationalDrift&, const RationalDrift&) = default;
};

struct DriftReport {
  DriftMode mode = DriftMode::kIdealizedTarget;
  double nu = 0.0;
  double L = 0.0;
  std::array<double, 3> formula{};      // full drift with the (nu/L) N_ij terms
  std::array<double, 3> enumerated{};
  std::array<double, 3> omitted{};      // formula minus the truncated drift
  RationalDrift formula_exact;
  RationalDrift enumerated_exact;       // idealized mode only
  bool exact = false;                   // enumerated_exact is meaningful
  double max_relative_gap = 0.0;
};

// Closed-form drift from pair and triple counts.
RationalDrift drift_formula(const OpinionGraph& g);

// Sum over oriented discordant edges (rate 1 each) of vote (prob nu/L) and
// rewire (prob 1 - nu/L) outcomes, each applied to a copy and recounted.
DriftReport enumerate_drift(const OpinionGraph& g, double nu, double L, DriftMode mode);

// |dN10 + dN11/2 + dN00/2| < 1e-9 (scaled) for both formula and enumeration.
bool verify_identity_sum(const DriftReport& report);

// Fixture corpus: <name>.snap files with <name>.json sidecars holding the
// exact idealized drift.
void write_drift_sidecar(const std::filesystem::path& path, const RationalDrift& d);
RationalDrift read_drift_sidecar(const std::filesystem::path& path);

}  // namespace evoter
