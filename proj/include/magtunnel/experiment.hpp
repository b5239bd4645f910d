#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "magtunnel/agmon.hpp"
#include "magtunnel/hopping.hpp"
#include "magtunnel/kummer_tail.hpp"
#include "magtunnel/log_scalar.hpp"
#include "magtunnel/planar_solver.hpp"
#include "magtunnel/potential.hpp"
#include "magtunnel/radial_solver.hpp"

namespace magtunnel {

struct Pipelines {
  bool radial = true;
  bool agmon = true;
  bool tail = true;
  bool hopping = true;
  bool planar = true;
  bool compare = true;
};

/// Sweep description read from a flat `key = value` file. Required keys:
/// B, L, a, v0. Optional keys and defaults:
///   profile = bump
///   h_values = 0.6, 0.5, 0.45, 0.4, 0.35   (descending)
///   pipelines = radial, agmon, tail, hopping, planar, compare
///   grid_levels = 3, grid_order = 4, eig_tol = 1e-9
///   with_line = true, allow_unproven = false, output_dir = out, threads = 1
/// `#` starts a comment; `[section]` lines are accepted and ignored.
struct ExperimentConfig {
  PotentialSpec spec;
  std::string profile = "bump";
  std::vector<double> h_values{0.6, 0.5, 0.45, 0.4, 0.35};
  Pipelines pipelines;
  int grid_levels = 3;
  int grid_order = 4;
  double eig_tol = 1e-9;
  bool with_line = true;
  bool allow_unproven = false;
  std::filesystem::path output_dir = "out";
  int threads = 1;
};

/// Parses and checks a config. ParseError names a missing or malformed key;
/// InvariantViolation names the violated invariant.
ExperimentConfig parse_config(std::istream &in, const std::string &source = "<config>",
                              bool allow_unproven = false);
ExperimentConfig validate_config(const std::filesystem::path &path, bool allow_unproven = false);
/// Invariant checks shared by both entry points.
void check_config(const ExperimentConfig &config);

/// Text of the default config file.
std::string default_config_text();

/// Fixed CSV headers.
namespace csv {
extern const char *const radial;
extern const char *const agmon;
extern const char *const tail;
extern const char *const hopping;
extern const char *const planar;
extern const char *const compare;
} // namespace csv

std::string format_number(double x);
/// "sign,log10|x|" for quantities that may underflow.
std::string format_log(const LogScalar &x);

std::string radial_row(const RadialState &state, double h);
std::string agmon_row(const AgmonReport &report);
std::string tail_row(const TailModel &model);
std::string hopping_row(const HoppingReport &report, const GapPrediction &gate);
std::vector<std::string> planar_rows(double h, const GapMeasurement &gap);

/// Least-squares fit of -h log(gap) = S_fit + slope h.
struct RateFit {
  double S_fit = 0;
  double slope = 0;
  double S = 0;
  double relative_deviation = 0;
  int points = 0;
};
RateFit fit_rate(const std::vector<double> &h, const std::vector<double> &log_gap, double S);

struct SweepResult {
  int rows = 0;
  int failed_rows = 0;
  std::vector<std::string> failures; ///< "h=...: pipeline: message"
  std::vector<std::filesystem::path> files;
};

/// Runs the configured pipelines for every h (largest first) and writes one CSV
/// per pipeline plus compare.csv and summary.txt into config.output_dir.
/// Module errors mark the row as failed instead of aborting the sweep.
SweepResult run_sweep(const ExperimentConfig &config);

} // namespace magtunnel
