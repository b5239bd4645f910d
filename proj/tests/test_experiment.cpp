#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "magtunnel/errors.hpp"
#include "magtunnel/experiment.hpp"

using namespace magtunnel;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string &text, bool allow_unproven = false) {
  std::istringstream in(text);
  return parse_config(in, "<test>", allow_unproven);
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("magtunnel_test_" + name);
  fs::remove_all(dir);
  return dir;
}

} // namespace

TEST_CASE("default config parses to the documented defaults") {
  const ExperimentConfig c = parse(default_config_text());
  CHECK(c.spec.B == 1.0);
  CHECK(c.spec.L == 2.0);
  CHECK(c.spec.a == 1.0);
  CHECK(c.spec.v0 == -1.0);
  CHECK(c.profile == "bump");
  CHECK(c.h_values == std::vector<double>{0.6, 0.5, 0.45, 0.4, 0.35});
  CHECK(c.grid_levels == 3);
  CHECK(c.grid_order == 4);
  CHECK(c.eig_tol == 1e-9);
  CHECK(c.pipelines.planar);
  CHECK(c.output_dir == fs::path("out"));
  CHECK_FALSE(c.allow_unproven);
}

TEST_CASE("comments, sections and minimal configs") {
  const ExperimentConfig c = parse("[spec]\nB = 2 # field\nL=3\na=1\nv0=-2\n[sweep]\nh_values = 0.3,0.2\n");
  CHECK(c.spec.B == 2.0);
  CHECK(c.h_values == std::vector<double>{0.3, 0.2});
}

TEST_CASE("missing key is a ParseError naming the key") {
  try {
    parse("L = 2\na = 1\nv0 = -1\n");
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(std::string(e.what()).find("'B'") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("B = x\nL = 2\na = 1\nv0 = -1\n"), ParseError);
  CHECK_THROWS_AS(parse("B = 1\nL = 2\na = 1\nv0 = -1\ncolour = red\n"), ParseError);
  CHECK_THROWS_AS(parse("B = 1\nL = 2\na = 1\nv0 = -1\npipelines = radial, fft\n"), ParseError);
}

TEST_CASE("separation threshold needs an explicit override") {
  const std::string text = "B = 1\nL = 1.5\na = 1\nv0 = -1\n";
  try {
    parse(text);
    FAIL("expected InvariantViolation");
  } catch (const InvariantViolation &e) {
    CHECK(std::string(e.what()).find("1.866") != std::string::npos);
  }
  CHECK_NOTHROW(parse(text, true));
  CHECK_NOTHROW(parse(text + "allow_unproven = true\n"));
}

TEST_CASE("config invariants") {
  const std::string base = "B = 1\nL = 2\na = 1\nv0 = -1\n";
  CHECK_THROWS_AS(parse(base + "h_values = 0.2, 0.4\n"), InvariantViolation);
  CHECK_THROWS_AS(parse(base + "h_values = 0.2, -0.1\n"), InvariantViolation);
  CHECK_THROWS_AS(parse(base + "eig_tol = 0\n"), InvariantViolation);
  CHECK_THROWS_AS(parse(base + "grid_levels = 2\n"), InvariantViolation);
  CHECK_THROWS_AS(validate_config("/nonexistent/config.txt"), ParseError);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.5) == "5.000000000000e-01");
  CHECK(format_log(LogScalar::from_log(-1, -1000.0 * std::log(10.0))) == "-1,-1.000000000000e+03");
}

TEST_CASE("rate fit recovers an exact exponential law") {
  std::vector<double> h{0.5, 0.3, 0.2, 0.1}, log_gap;
  for (double x : h)
    log_gap.push_back(std::log(3.0) - 5.0 / x);
  const RateFit fit = fit_rate(h, log_gap, 5.0);
  CHECK(fit.S_fit == doctest::Approx(5.0));
  CHECK(fit.slope == doctest::Approx(-std::log(3.0)));
  CHECK(fit.relative_deviation < 1e-12);
}

TEST_CASE("hopping-only sweep: rate fit and determinism") {
  ExperimentConfig c = parse("B = 1\nL = 2\na = 1\nv0 = -1\n"
                             "h_values = 0.5, 0.3, 0.2, 0.15, 0.1, 0.07, 0.05\n"
                             "pipelines = radial, agmon, tail, hopping\nwith_line = false\n");
  c.output_dir = scratch_dir("sweep_a");
  const SweepResult first = run_sweep(c);
  CHECK(first.failed_rows == 0);
  const std::string hopping = slurp(c.output_dir / "hopping.csv");
  CHECK(hopping.rfind(std::string(csv::hopping) + "\n", 0) == 0);
  CHECK(std::count(hopping.begin(), hopping.end(), '\n') == 8);

  const std::string summary = slurp(c.output_dir / "summary.txt");
  const auto pos = summary.find("relative deviation from S = ");
  REQUIRE(pos != std::string::npos);
  const double deviation = std::stod(summary.substr(pos + 28));
  CHECK(deviation < 0.1);

  ExperimentConfig again = c;
  again.output_dir = scratch_dir("sweep_b");
  again.threads = 2;
  run_sweep(again);
  for (const char *name : {"radial.csv", "agmon.csv", "tail.csv", "hopping.csv"})
    CHECK(slurp(c.output_dir / name) == slurp(again.output_dir / name));
}

TEST_CASE("compare report gates ratios on the error bound") {
  ExperimentConfig c = parse("B = 1\nL = 2\na = 1\nv0 = -1\nh_values = 0.6\n"
                             "pipelines = hopping, planar, compare\nwith_line = false\n");
  c.output_dir = scratch_dir("compare");
  const SweepResult res = run_sweep(c);
  CHECK(res.failed_rows == 0);
  std::ifstream in(c.output_dir / "compare.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == csv::compare);
  // At h = 0.6 the gate exceeds 0.1, so both ratio columns are NA.
  CHECK(row.size() > 8);
  CHECK(row.find(",NA,NA") == row.size() - 6);
  const std::string planar = slurp(c.output_dir / "planar.csv");
  CHECK(std::count(planar.begin(), planar.end(), '\n') == 4);
}
