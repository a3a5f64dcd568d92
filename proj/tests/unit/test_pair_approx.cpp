#include <doctest.h>

#include <cmath>
#include <random>

#include "evoter/errors.hpp"
#include "evoter/pair_approx.hpp"
#include "fixtures.hpp"

using namespace evoter;

namespace {

void check_identities(const PaEquilibrium& e) {
  const double p = e.p, q = 1 - p, L = e.L;
  CHECK(std::abs(p * (e.J1 + e.K1) + q * (e.J0 + e.K0) - L) < 1e-9);
  CHECK(std::abs(p * e.K1 - q * e.J0) < 1e-9);
  CHECK(std::abs((e.J1 - e.J0) - L * p / e.nu) < 1e-9);
  CHECK(std::abs((e.K0 - e.K1) - L * q / e.nu) < 1e-9);
}

}  // namespace

TEST_CASE("pa_equilibrium examples") {
  auto e = pa_equilibrium(0.5, 1.0, 40);
  CHECK(e.feasible);
  CHECK(e.J0 == doctest::Approx(10));
  CHECK(e.J1 == doctest::Approx(30));
  CHECK(e.K1 == doctest::Approx(10));
  CHECK(e.K0 == doctest::Approx(30));
  check_identities(e);

  auto b = pa_equilibrium(0.5, 0.5, 40);
  CHECK(std::abs(b.J0) < 1e-12);
  CHECK(std::abs(b.K1) < 1e-12);

  auto q = pa_equilibrium(0.25, 1.0, 40);
  CHECK(q.J1 - q.J0 == doctest::Approx(10));
  CHECK(q.K0 - q.K1 == doctest::Approx(30));

  CHECK_FALSE(pa_equilibrium(0.5, 0.3, 40).feasible);
  CHECK_THROWS_AS(pa_equilibrium(0.5, 0.0, 40), InvalidInput);
  CHECK_THROWS_AS(pa_equilibrium(1.0, 1.0, 40), InvalidInput);
}

TEST_CASE("pa_equilibrium identities over a grid") {
  for (double p : {0.1, 0.25, 0.5, 0.8}) {
    for (double nu : {0.7, 1.0, 2.0, 5.0}) {
      auto e = pa_equilibrium(p, nu, 30);
      if (!e.feasible) continue;
      CHECK(e.J0 >= 0);
      CHECK(e.K1 >= 0);
      check_identities(e);
    }
  }
}

TEST_CASE("pa_nu_c") {
  CHECK(pa_nu_c(0.5) == 0.5);
  CHECK(pa_nu_c(0.0) == 1.0);
  CHECK(pa_nu_c(0.25) == doctest::Approx(0.625));
}

TEST_CASE("equilibrium is a fixed point of the integrator") {
  auto e = pa_equilibrium(0.5, 1.0, 40);
  const PaState s0 = pa_state_of(e);
  auto d = pa_rhs(0.5, 1.0, 40, s0);
  CHECK(std::abs(d.n10) < 1e-10);
  CHECK(std::abs(d.n11) < 1e-10);
  auto tr = pa_integrate(0.5, 1.0, 40, s0, 100, 0.01);
  const auto& s = tr.samples.back().s;
  CHECK(std::abs(s.n10 - s0.n10) < 1e-6);
  CHECK(std::abs(s.n11 - s0.n11) < 1e-6);
  CHECK(std::abs(s.n00 - s0.n00) < 1e-6);
}

TEST_CASE("below nu_c the pair system absorbs") {
  PaState s{5.0, 10.0, 10.0};  // L = 30
  auto tr = pa_integrate(0.5, 0.4, 30, s, 2000, 0.01);
  CHECK(tr.absorbed);
  CHECK(tr.samples.back().s.n10 <= 1e-12);
  for (const auto& smp : tr.samples) {
    CHECK(std::abs(smp.s.n11 + 2 * smp.s.n10 + smp.s.n00 - 30) < 1e-8);
  }
}

TEST_CASE("convergence from random feasible starts") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> U(0.05, 0.95);
  const double L = 20;
  for (double p : {0.3, 0.5}) {
    for (double nu : {pa_nu_c(p) + 0.3, 2.0}) {
      const auto e = pa_equilibrium(p, nu, L);
      const auto target = pa_state_of(e);
      for (int k = 0; k < 20; ++k) {
        const double n10 = U(gen) * L / 4;
        const double rest = L - 2 * n10;
        const double n11 = rest * U(gen);
        PaState s{n10, n11, rest - n11};
        PaOptions opt;
        opt.record_every = 1000000;
        auto tr = pa_integrate(p, nu, L, s, 500, 0.01, opt);
        REQUIRE_FALSE(tr.absorbed);
        const auto& f = tr.samples.back().s;
        const double d = std::abs(f.n10 - target.n10) + std::abs(f.n11 - target.n11) +
                         std::abs(f.n00 - target.n00);
        CHECK(d < 1e-4);
      }
    }
  }
}

TEST_CASE("pa_integrate validates its input") {
  CHECK_THROWS_AS(pa_integrate(0.5, 1, 10, PaState{-1, 6, 6}, 1, 0.1), InvalidInput);
  CHECK_THROWS_AS(pa_integrate(0.5, 1, 10, PaState{1, 1, 1}, 1, 0.1), InvalidInput);
}

TEST_CASE("neighbor count correlation") {
  auto g = testing::alternating_square();
  // every 1-vertex has j=0, k=2: no variance
  CHECK(std::isnan(neighbor_count_correlation(g, 1)));
}
