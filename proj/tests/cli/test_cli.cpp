#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = evoter::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "evoter_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("pa reports the equilibrium") {
  auto r = cli({"pa", "--p", "0.5", "--nu", "1", "--L", "40"});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["schema_version"] == 1);
  CHECK(j["J0"].get<double>() == doctest::Approx(10.0));
  CHECK(j["nu_c"].get<double>() == doctest::Approx(0.5));
  CHECK(j["feasible"] == true);
}

TEST_CASE("table1 from the reference Ub") {
  auto r = cli({"table1", "--use-paper-ub"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out) == 7);
  CHECK(r.out.find("2,0.1666,0.1025,0.1041,0.0604,0.0625,0.2336,0.2208") != std::string::npos);
  CHECK(r.out.find("1,0.0454,0.0339,0.0341,0.0132,0.0114,0.4690,0.4129") != std::string::npos);

  auto empty = cli({"table1", "--use-paper-ub", "--nu", ""});
  REQUIRE(empty.code == 0);
  CHECK(empty.out == "nu,Ub_sim,Uab_sim,Uab_pred,Ubb_sim,Ubb_pred,Uaa_sim,Uaa_pred\n");

  CHECK(cli({"table1", "--use-paper-ub", "--nu", "3"}).code == 2);
  CHECK(cli({"table1"}).code == 2);
}

TEST_CASE("simulate: absorption, validation and stride arithmetic") {
  auto r = cli({"simulate", "--n", "100", "--L", "6", "--p", "0"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out) == 2);  // header plus one row

  auto bad = cli({"simulate", "--nu", "-1"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("nu") != std::string::npos);
  CHECK(cli({"simulate", "--bogus"}).code == 2);
  CHECK(cli({"simulate", "--clock", "sundial"}).code == 2);

  // stride n: max_updates / n rows after the initial one unless absorbed
  auto big = cli({"simulate", "--n", "2500", "--L", "50", "--nu", "2.5", "--clock", "ctmc",
                  "--max-updates", "2.5e6", "--seed", "1"});
  REQUIRE(big.code == 0);
  CHECK(lines(big.out) == 1 + 1 + 1000);
}

TEST_CASE("same seed gives byte-identical outputs, independent of --jobs") {
  const auto a = scratch("rep_a");
  const auto b = scratch("rep_b");
  std::vector<std::string> base{"simulate", "--n", "200", "--L", "10", "--nu", "1.5",
                                "--max-updates", "20000", "--seed", "9", "--replicas", "3"};
  auto args_a = base;
  args_a.insert(args_a.end(), {"--out", a.string(), "--jobs", "1"});
  auto args_b = base;
  args_b.insert(args_b.end(), {"--out", b.string(), "--jobs", "3"});
  REQUIRE(cli(args_a).code == 0);
  REQUIRE(cli(args_b).code == 0);
  for (int k = 0; k < 3; ++k) {
    const std::string ext = ".r" + std::to_string(k) + ".csv";
    CHECK(slurp(a.string() + ext) == slurp(b.string() + ext));
  }
  CHECK(slurp(a.string() + ".r0.csv") != slurp(a.string() + ".r1.csv"));
  auto j = json::parse(slurp(a.string() + ".json"));
  CHECK(j["schema_version"] == 1);
  CHECK(j["replicas"].size() == 3);
}

TEST_CASE("config file values yield to flags") {
  const auto cfg = scratch("cfg.json");
  {
    std::ofstream f(cfg);
    f << R"({"seed": 4, "pa": {"p": 0.5, "nu": 2.0, "L": 40}})";
  }
  auto r = cli({"pa", "--config", cfg.string(), "--nu", "1"});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["nu"].get<double>() == 1.0);
  CHECK(j["L"].get<double>() == 40.0);

  {
    std::ofstream f(cfg);
    f << R"({"max_updates": 3000, "n": 100, "L": 6})";
  }
  auto s = cli({"simulate", "--config", cfg.string(), "--stride", "1000"});
  REQUIRE(s.code == 0);
  CHECK(lines(s.out) <= 5);

  {
    std::ofstream f(cfg);
    f << "{not json";
  }
  CHECK(cli({"pa", "--config", cfg.string()}).code == 2);
  CHECK(cli({"pa", "--config", scratch("missing.json").string()}).code == 2);
}

TEST_CASE("arch fits points end to end") {
  const auto pts = scratch("arch_points.csv");
  {
    std::ofstream f(pts);
    f << "x,y\n";
    for (int i = 0; i < 41; ++i) {
      const double x = 0.05 + 0.9 * i / 40.0;
      f << x << ',' << 2.0 * x * (1 - x) - 0.1 << '\n';
    }
  }
  auto r = cli({"arch", "--points", pts.string()});
  REQUIRE(r.code == 0);
  auto fit = json::parse(r.out)["fit"];
  CHECK(std::abs(fit["roots"][0].get<double>() - 0.0528) < 5e-5);
  CHECK(std::abs(fit["roots"][1].get<double>() - 0.9472) < 5e-5);

  {
    std::ofstream f(pts);
    for (int i = 0; i < 41; ++i) {
      const double x = 0.05 + 0.9 * i / 40.0;
      f << x << ',' << x * (1 - x) - 0.3 << '\n';
    }
  }
  auto none = cli({"arch", "--points", pts.string()});
  REQUIRE(none.code == 0);
  CHECK(json::parse(none.out)["fit"]["roots"].is_null());

  auto fresh = cli({"arch", "--n", "400", "--L", "20", "--nu", "2.5", "--max-updates", "4e5",
                    "--replicas", "2"});
  REQUIRE(fresh.code == 0);
  auto j = json::parse(fresh.out);
  CHECK(j["replicas"].size() == 2);
  CHECK(j["fit"]["A"].get<double>() > 0.0);
}

TEST_CASE("oracle over the fixture corpus") {
  auto r = cli({"oracle", "--fixtures", EVOTER_FIXTURE_DIR "/oracle"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["checked"].get<int>() >= 5);

  const auto dir = scratch("oracle_fixtures");
  fs::remove_all(dir);
  REQUIRE(cli({"oracle", "--write-fixtures", dir.string(), "--count", "5", "--seed", "3"}).code ==
          0);
  CHECK(cli({"oracle", "--fixtures", dir.string()}).code == 0);
  {
    // corrupt one sidecar
    auto j = json::parse(slurp(dir / "er_00.json"));
    j["constant"][0] = j["constant"][0].get<long>() + 1;
    std::ofstream f(dir / "er_00.json");
    f << j.dump();
  }
  auto bad = cli({"oracle", "--fixtures", dir.string()});
  CHECK(bad.code == 3);
  CHECK(json::parse(bad.out)["failed"].size() == 1);

  auto rnd = cli({"oracle", "--random", "20"});
  CHECK(rnd.code == 0);
  auto snap = cli({"oracle", "--snapshot", (dir / "er_01.snap").string(), "--mode",
                   "exclude_neighbors"});
  REQUIRE(snap.code == 0);
  CHECK(json::parse(snap.out)["report"]["identity_sum_ok"] == true);
  CHECK(cli({"oracle"}).code == 2);
}

TEST_CASE("ame modes") {
  std::vector<std::string> base{"ame", "--alpha", "0.3", "--beta", "0.4", "--eta", "0.1",
                                "--nu", "2"};
  auto fixed = cli(base);
  REQUIRE(fixed.code == 0);
  auto j = json::parse(fixed.out);
  CHECK(j["planes"][1]["eigenvalues"][1].get<double>() < 0.0);

  auto back = base;
  back.insert(back.end(), {"--mode", "backward", "--cycles", "50"});
  auto b = cli(back);
  REQUIRE(b.code == 0);
  CHECK(json::parse(b.out)["replicas"][0]["distance"].back().get<double>() < 1e-8);

  auto fwd = base;
  const auto prefix = scratch("ame_fwd");
  fwd.insert(fwd.end(), {"--mode", "forward", "--T", "50", "--record-dt", "0.5", "--out",
                         prefix.string()});
  REQUIRE(cli(fwd).code == 0);
  CHECK(fs::exists(prefix.string() + ".path.csv"));
  CHECK(fs::exists(prefix.string() + ".hist.csv"));

  auto bad = base;
  bad.insert(bad.end(), {"--mode", "sideways"});
  CHECK(cli(bad).code == 2);
  CHECK(cli({"ame", "--alpha", "-1"}).code == 2);
}

TEST_CASE("nuscan classifies every grid point") {
  const auto prefix = scratch("scan");
  auto r = cli({"nuscan", "--p", "0.5", "--nu-grid", "0.4:1.0:0.3", "--n", "200", "--L", "10",
                "--replicas", "2", "--c-prolonged", "20", "--out", prefix.string()});
  REQUIRE(r.code == 0);
  CHECK(lines(slurp(prefix.string() + ".csv")) == 1 + 3 * 2);
  CHECK(lines(slurp(prefix.string() + ".summary.csv")) == 1 + 3);
  auto j = json::parse(slurp(prefix.string() + ".json"));
  CHECK(j["grid"].size() == 3);
  CHECK(cli({"nuscan", "--nu-grid", "1:0:0.1"}).code == 2);
}

TEST_CASE("table1 resimulation stays within 15% of the simulated columns") {
  auto r = cli({"table1", "--resimulate", "--replicas", "5", "--seed", "3"});
  REQUIRE(r.code == 0);
  const double ref[6][4] = {{.1666, .1025, .0604, .2336}, {.1371, .0907, .0466, .2859},
                            {.1216, .0827, .0394, .3115}, {.1094, .0757, .0343, .3310},
                            {.0896, .0641, .0264, .3735}, {.0454, .0339, .0132, .4690}};
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  int row = 0;
  while (std::getline(in, line)) {
    double v[8];
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2],
                        &v[3], &v[4], &v[5], &v[6], &v[7]) == 8);
    const double sim[4] = {v[1], v[2], v[4], v[6]};
    for (int k = 0; k < 4; ++k) CHECK(std::abs(sim[k] / ref[row][k] - 1.0) <= 0.15);
    ++row;
  }
  CHECK(row == 6);
}

TEST_CASE("help exits cleanly") {
  auto r = cli({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("simulate") != std::string::npos);
  CHECK(cli({}).code == 2);
}
