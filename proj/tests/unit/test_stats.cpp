#include <doctest.h>

#include <cmath>
#include <sstream>

#include "evoter/dynamics.hpp"
#include "evoter/errors.hpp"
#include "evoter/stats.hpp"

using namespace evoter;

namespace {

std::vector<Point> on_quadratic(double A, double B, int k = 41) {
  std::vector<Point> pts;
  for (int i = 0; i < k; ++i) {
    const double x = 0.05 + 0.9 * i / (k - 1);
    pts.push_back({x, A * x * (1 - x) - B});
  }
  return pts;
}

}  // namespace

TEST_CASE("fit_arch recovers its own family exactly") {
  auto fit = fit_arch(on_quadratic(2.0, 0.1));
  CHECK(fit.A == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.B == doctest::Approx(0.1).epsilon(1e-12));
  REQUIRE(fit.roots);
  const double h = std::sqrt(0.25 - 0.05);
  CHECK(std::abs(fit.roots->first - (0.5 - h)) < 1e-10);
  CHECK(std::abs(fit.roots->second - (0.5 + h)) < 1e-10);
  CHECK(std::abs(fit.roots->first - 0.0528) < 5e-5);
  CHECK(std::abs(fit.roots->second - 0.9472) < 5e-5);
  for (double r : {fit.roots->first, fit.roots->second}) {
    CHECK(std::abs(fit.A * r * (1 - r) - fit.B) < 1e-12);
  }
  CHECK(fit.rms < 1e-12);
}

TEST_CASE("fit_arch: no roots when the curve stays below the axis") {
  auto fit = fit_arch(on_quadratic(1.0, 0.3));
  CHECK_FALSE(fit.roots);
}

TEST_CASE("fit_arch rejects degenerate designs") {
  std::vector<Point> same{{0.3, 0.1}, {0.3, 0.2}, {0.3, 0.15}};
  CHECK_THROWS_AS(fit_arch(same), FitError);
  // x and 1-x give the same regressor
  std::vector<Point> mirror{{0.3, 0.1}, {0.7, 0.2}, {0.3, 0.15}};
  CHECK_THROWS_AS(fit_arch(mirror), FitError);
  CHECK_THROWS_AS(fit_arch(std::vector<Point>{{0.1, 0}, {0.2, 0}}), FitError);
}

TEST_CASE("arch roots are symmetric under x -> 1-x") {
  std::vector<Point> pts;
  std::uint64_t s = 1;
  for (int i = 0; i < 200; ++i) {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    const double x = 0.1 + 0.8 * double(s >> 11) / double(1ULL << 53);
    const double noise = 0.01 * (double((s >> 3) & 1023) / 1023.0 - 0.5);
    pts.push_back({x, 1.9 * x * (1 - x) - 0.11 + noise});
  }
  auto a = fit_arch(pts);
  for (auto& p : pts) p.x = 1 - p.x;
  auto b = fit_arch(pts);
  REQUIRE(a.roots);
  REQUIRE(b.roots);
  CHECK(a.roots->first == doctest::Approx(b.roots->first).epsilon(1e-10));
  CHECK(a.roots->second == doctest::Approx(b.roots->second).epsilon(1e-10));
}

TEST_CASE("fit_cubic") {
  std::vector<Point> pts;
  for (int i = 0; i <= 30; ++i) {
    const double x = i / 30.0;
    pts.push_back({x, (x - 0.1) * (x - 0.9) * (x - 2.0)});
  }
  auto fit = fit_cubic(pts);
  CHECK(fit.coef[3] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fit.coef[0] == doctest::Approx(-0.18).epsilon(1e-10));
  REQUIRE(fit.roots.size() == 2);
  CHECK(std::abs(fit.roots[0] - 0.1) < 1e-10);
  CHECK(std::abs(fit.roots[1] - 0.9) < 1e-10);

  for (auto& p : pts) p.y = 0.0;
  auto zero = fit_cubic(pts);
  CHECK(zero.roots.empty());
  for (double c : zero.coef) CHECK(c == 0.0);

  CHECK_THROWS_AS(fit_cubic(std::vector<Point>{{0, 0}, {0.5, 1}, {1, 0}}), FitError);
}

TEST_CASE("real_polynomial_roots") {
  std::vector<double> c{6, -5, 1};  // (x-2)(x-3)
  auto r = real_polynomial_roots(c);
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(2));
  CHECK(r[1] == doctest::Approx(3));
  CHECK(real_polynomial_roots(std::vector<double>{1, 0, 1}).empty());
}

TEST_CASE("arch_endpoints_to_nu_c") {
  std::map<double, std::optional<std::pair<double, double>>> grid;
  grid[0.5] = std::nullopt;
  grid[1.0] = std::make_pair(0.3, 0.7);
  grid[2.5] = std::make_pair(0.074, 0.926);

  auto half = arch_endpoints_to_nu_c(0.5, grid);
  REQUIRE(half.nu_c);
  CHECK(*half.nu_c == 1.0);  // no arch at the previous grid point

  auto r = arch_endpoints_to_nu_c(0.2, grid);
  REQUIRE(r.nu_c);
  CHECK(*r.nu_c > 1.0);
  CHECK(*r.nu_c < 2.5);
  CHECK(*r.nu_c == doctest::Approx(1.0 + 1.5 * 0.1 / 0.226));

  auto c = arch_endpoints_to_nu_c(0.99, grid);
  CHECK(c.censored);
  CHECK_FALSE(c.nu_c);
}

TEST_CASE("classify_run") {
  RunResult r;
  r.absorbed = true;
  r.updates = 1000;
  CHECK(classify_run(r, 100, 10) == RunClass::kRapid);
  r.updates = 10'000'000;
  CHECK(classify_run(r, 100, 10) == RunClass::kIndeterminate);
  r.absorbed = false;
  r.updates = 200 * 1000;
  CHECK(classify_run(r, 100, 10) == RunClass::kProlonged);
  r.updates = 199 * 1000;
  CHECK(classify_run(r, 100, 10) == RunClass::kIndeterminate);
  CHECK(to_string(RunClass::kProlonged) == "prolonged");
}

TEST_CASE("nu=0 runs are always rapid") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ModelParams p;
    p.n = 400;
    p.L = 10;
    p.nu = 0;
    p.max_updates = static_cast<std::uint64_t>(200 * 400 * 10);
    auto r = run(p, seed);
    CHECK(classify_run(r, p.n, p.L) == RunClass::kRapid);
  }
}

TEST_CASE("arch points use the edge-fraction scale by default") {
  Trajectory t;
  t.n = 100;
  t.mean_degree = 10;
  for (int i = 0; i < 10; ++i) {
    TrajectoryRow r;
    r.updates = static_cast<std::uint64_t>(i);
    r.n1 = 50;
    r.n10 = 100;
    r.n11 = 400;
    r.n00 = 400;
    t.rows.push_back(r);
  }
  auto pts = arch_points(t);
  CHECK(pts.size() == 9);
  CHECK(pts[0].x == 0.5);
  CHECK(pts[0].y == doctest::Approx(0.2));
  CHECK(arch_points(t, ArchScale::kPerDegree, 0.0)[0].y == doctest::Approx(0.1));
  CHECK_THROWS_AS(cubic_points(t), InvalidInput);
  CHECK_THROWS_AS(arch_points(t, ArchScale::kEdgeFraction, 1.0), InvalidInput);
}

TEST_CASE("trajectory csv round trip") {
  ModelParams p;
  p.n = 200;
  p.L = 6;
  p.nu = 1.5;
  p.max_updates = 3000;
  p.stride = 300;
  p.record_triples = true;
  auto r = run(p, 21);
  std::stringstream ss;
  write_trajectory_csv(ss, r.trajectory);
  auto back = read_trajectory_csv(ss, p.n, p.L);
  REQUIRE(back.rows.size() == r.trajectory.rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    const auto& a = r.trajectory.rows[i];
    const auto& b = back.rows[i];
    CHECK(a.updates == b.updates);
    CHECK(a.time == b.time);
    CHECK(a.n1 == b.n1);
    CHECK(a.n10 == b.n10);
    CHECK(a.dmax == b.dmax);
    REQUIRE(b.triples);
    CHECK(a.triples->n100() == b.triples->n100());
    CHECK(a.triples->n101() == b.triples->n101());
  }

  std::stringstream bad("updates,time,N1\n");
  CHECK_THROWS_AS(read_trajectory_csv(bad), InvalidInput);
  std::stringstream order("updates,time,N1,N10,N11,N00,Dmax\n5,0,1,1,1,1,1\n5,0,1,1,1,1,1\n");
  CHECK_THROWS_AS(read_trajectory_csv(order), InvalidInput);
}
