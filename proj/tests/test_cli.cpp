#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "isochron/phase.hpp"

using namespace isochron;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "isochron");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

/// Last comma-separated field of the last non-comment line.
std::vector<std::string> last_row(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') last = line;
  }
  std::vector<std::string> cells;
  std::istringstream row(last);
  std::string cell;
  while (std::getline(row, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("list-models prints the catalog") {
  const auto r = run_cli({"list-models"});
  CHECK(r.code == 0);
  CHECK(r.out.find("van_der_pol,continuous,2,") != std::string::npos);
  CHECK(r.out.find("plant,continuous,5,") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"period"}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({"sensitivity", "van_der_pol", "--method", "three-point"}).code == 2);
  CHECK(run_cli({"phase-field", "van_der_pol", "--grid", "ten"}).code == 2);
  CHECK(run_cli({"prc", "van_der_pol", "--n-theta", "8"}).code == 2);
}

TEST_CASE("unknown models exit with 2 and list the catalog") {
  const auto r = run_cli({"period", "duffing"});
  CHECK(r.code == 2);
  CHECK(r.err.find("lorenz_r320") != std::string::npos);
  CHECK(r.err.find("fitzhugh_rinzel") != std::string::npos);
}

TEST_CASE("help succeeds and shows per-model defaults") {
  const auto r = run_cli({"sensitivity", "--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("ml_elliptic") != std::string::npos);
  CHECK(r.out.find("0.0037015") != std::string::npos);
}

TEST_CASE("period of van der Pol") {
  const auto r = run_cli({"period", "van_der_pol"});
  REQUIRE(r.code == 0);
  const auto cells = last_row(r.out);
  REQUIRE(cells.size() >= 2);
  CHECK(std::abs(std::stod(cells[1]) - 0.942958) < 1e-4);
}

TEST_CASE("single-node phase field equals the pointwise phase") {
  const auto r = run_cli({"phase-field", "van_der_pol", "--section", "none", "--axes",
                          "x:1.2:1.2,y:-0.4:-0.4", "--grid", "1x1"});
  REQUIRE(r.code == 0);
  const auto cells = last_row(r.out);
  REQUIRE(cells.size() == 6);
  const auto v = phase_of(lookup("van_der_pol"), testing::vec({1.2, -0.4}));
  CHECK(std::abs(std::stod(cells[4]) - v.theta) < 1e-7);
  CHECK(cells[5] == "1");
}

TEST_CASE("worker count does not change the output bytes") {
  const std::vector<std::string> args{"phase-field", "lorenz_r320", "--grid", "4x3"};
  auto one = args, three = args;
  one.insert(one.begin(), {"--workers", "1"});
  three.insert(three.begin(), {"--workers", "3"});
  const auto a = run_cli(one), b = run_cli(three);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("config files supply option values") {
  const std::string path = "cli_test_config.ini";
  {
    std::ofstream f(path);
    f << "# phase-field options\ngrid = 2x3\naxes = x:-1:1,y:-1:1\n";
  }
  const auto r = run_cli({"phase-field", "van_der_pol", "--config", path});
  std::remove(path.c_str());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("# axes: x -1:1 2 y -1:1 3") != std::string::npos);
}

TEST_CASE("numerical failures exit with 3") {
  const auto r = run_cli({"sensitivity", "van_der_pol", "--method", "mdtheta", "--n-pt", "100"});
  CHECK(r.code == 3);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("output file option") {
  const std::string path = "cli_test_out.csv";
  const auto r = run_cli({"-o", path, "list-models"});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  std::string first;
  std::getline(f, first);
  CHECK(first.rfind("name,", 0) == 0);
  std::remove(path.c_str());
}

TEST_CASE("network reports are seed deterministic") {
  const std::vector<std::string> args{"network", "plant", "--n-neurons", "6", "--seed", "5"};
  const auto a = run_cli(args), b = run_cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("overall,,") != std::string::npos);
}

}  // TEST_SUITE
