#include "magtunnel/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "magtunnel/errors.hpp"

namespace magtunnel {

namespace csv {
const char *const radial = "h,mu_h,mu_h1,norm,residual,richardson_shift,spacing,r_max";
const char *const agmon =
    "d_0_L,d_0_a,d_0_2L,d_0_2Lma,d_2Lma_2L,dt_L,dt_2L,dt_2Lma,S,gamma0,agmon_lower,agmon_upper,"
    "crude_lower,crude_upper,bounds_ok,separation_ok,geometry_ok";
const char *const tail = "h,alpha,t_L,fpp_tL,nu,sign_C_h_matched,log10_C_h_matched,"
                         "sign_C_h_asymptotic,log10_C_h_asymptotic,match_residual";
const char *const hopping = "h,S,log10_w_line,phase_w_line,log10_w_reduced,log10_w_laplace,"
                            "ratio_laplace_reduced,rho_gate,log10_gap_pred";
const char *const planar =
    "h,nx,ny,lambda1,lambda2,lambda3,gap,residual,extrapolated_gap,err_estimate";
const char *const compare = "h,status,gap_measured,err_estimate,sign_2w_reduced,log10_2w_reduced,"
                            "sign_2w_laplace,log10_2w_laplace,rho_gate,ratio_measured_reduced,"
                            "ratio_laplace_reduced";
} // namespace csv

namespace {

std::string trim(const std::string &s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!trim(item).empty())
      out.push_back(trim(item));
  return out;
}

double parse_double(const std::string &key, const std::string &text) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size())
      throw std::invalid_argument(text);
    return value;
  } catch (const std::exception &) {
    throw ParseError("key '" + key + "': cannot read '" + text + "' as a number");
  }
}

int parse_int(const std::string &key, const std::string &text) {
  const double value = parse_double(key, text);
  if (value != std::floor(value))
    throw ParseError("key '" + key + "': expected an integer, got '" + text + "'");
  return static_cast<int>(value);
}

bool parse_bool(const std::string &key, const std::string &text) {
  if (text == "true" || text == "1" || text == "yes")
    return true;
  if (text == "false" || text == "0" || text == "no")
    return false;
  throw ParseError("key '" + key + "': expected true/false, got '" + text + "'");
}

std::string format_bool(bool b) { return b ? "1" : "0"; }

std::string join(const std::vector<std::string> &cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i)
      out += ',';
    out += cells[i];
  }
  return out;
}

std::string na_row(const char *header, double h, bool leading_h = true) {
  const auto n = static_cast<std::size_t>(std::count(header, header + std::char_traits<char>::length(header), ',')) + 1;
  std::vector<std::string> cells(n, "NA");
  if (leading_h)
    cells[0] = format_number(h);
  return join(cells);
}

// Angle of w measured from the real axis, in (-pi/2, pi/2].
double axis_phase(const LogComplex &w) {
  double phi = std::remainder(w.phase(), std::numbers::pi);
  if (phi <= -0.5 * std::numbers::pi)
    phi += std::numbers::pi;
  return phi;
}

struct RowResult {
  double h = 0;
  std::map<std::string, std::vector<std::string>> lines; // pipeline -> csv lines
  std::vector<std::string> failures;
  std::optional<double> log_gap_pred;     // ln(2|w_reduced|)
  std::optional<double> log_gap_measured; // ln(gap)
};

template <typename Fn> bool guarded(RowResult &row, const char *pipeline, Fn &&fn) {
  try {
    fn();
    return true;
  } catch (const std::exception &e) {
    row.failures.push_back("h=" + format_number(row.h) + ": " + pipeline + ": " + e.what());
    return false;
  }
}

RowResult run_row(const ExperimentConfig &config, double h) {
  const PotentialSpec &spec = config.spec;
  const Pipelines &p = config.pipelines;
  RowResult row;
  row.h = h;
  const bool need_radial = p.radial || p.tail || p.hopping || p.planar || p.compare;
  const bool need_hopping = p.hopping || p.compare;

  std::optional<RadialState> radial;
  if (need_radial && !guarded(row, "radial", [&] { radial = solve_radial(spec, h); }))
    radial.reset();
  if (p.radial)
    row.lines["radial"].push_back(radial ? radial_row(*radial, h) : na_row(csv::radial, h));

  std::optional<TailModel> tail;
  if (radial && (p.tail || need_hopping))
    guarded(row, "tail", [&] { tail = match_normalization(*radial, spec, h); });
  if (p.tail)
    row.lines["tail"].push_back(tail ? tail_row(*tail) : na_row(csv::tail, h));

  std::optional<HoppingReport> hop;
  std::optional<GapPrediction> gate;
  if (tail && need_hopping)
    guarded(row, "hopping", [&] {
      hop = compute_hopping(*tail, spec, h, config.with_line);
      gate = gap_prediction(*hop, radial->mu_h);
    });
  if (p.hopping)
    row.lines["hopping"].push_back(hop ? hopping_row(*hop, *gate) : na_row(csv::hopping, h));
  if (hop)
    row.log_gap_pred = gate->gap.log_mag();

  std::optional<GapMeasurement> gap;
  if (radial && (p.planar || p.compare))
    guarded(row, "planar", [&] {
      GapOptions opts;
      opts.tol = config.eig_tol;
      opts.shift = radial->mu_h;
      if (hop)
        opts.predicted_gap = gate->gap.value();
      const auto grids = default_ladder(spec, h, config.grid_levels, config.grid_order);
      gap = measure_gap(spec, h, grids, opts);
    });
  if (p.planar) {
    if (gap)
      for (auto &line : planar_rows(h, *gap))
        row.lines["planar"].push_back(line);
    else
      row.lines["planar"].push_back(na_row(csv::planar, h));
  }
  if (gap && gap->extrapolated_gap > 0)
    row.log_gap_measured = std::log(gap->extrapolated_gap);

  if (p.compare) {
    std::vector<std::string> cells{format_number(h)};
    cells.push_back(gap ? (gap->reliable ? "ok" : "unreliable") : "no_gap");
    cells.push_back(gap ? format_number(gap->extrapolated_gap) : "NA");
    cells.push_back(gap ? format_number(gap->error_estimate) : "NA");
    if (hop) {
      const LogScalar two = LogScalar::from_value(2.0);
      cells.push_back(format_log(two * hop->w_reduced.abs()));
      cells.push_back(format_log(two * hop->w_laplace.abs()));
      cells.push_back(format_number(gate->rho));
      const bool gated = gate->reliable;
      cells.push_back(gated && gap ? format_number(gap->extrapolated_gap / gate->gap.value()) : "NA");
      cells.push_back(gated ? format_number(ratio(hop->w_laplace.abs(), hop->w_reduced.abs())) : "NA");
    } else {
      for (int i = 0; i < 7; ++i)
        cells.push_back("NA");
    }
    row.lines["compare"].push_back(join(cells));
  }
  return row;
}

} // namespace

std::string format_number(double x) {
  if (std::isnan(x))
    return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", x);
  return buf;
}

std::string format_log(const LogScalar &x) {
  if (x.sign() == 0)
    return "0,NA";
  return std::to_string(x.sign()) + "," + format_number(x.log10_mag());
}

std::string radial_row(const RadialState &state, double h) {
  return join({format_number(h), format_number(state.mu_h), format_number(state.mu_h1),
               format_number(state.norm_2d), format_number(state.residual),
               format_number(state.richardson_shift), format_number(state.spacing),
               format_number(state.r_max())});
}

std::string agmon_row(const AgmonReport &r) {
  return join({format_number(r.d_0_L), format_number(r.d_0_a), format_number(r.d_0_2L),
               format_number(r.d_0_2Lma), format_number(r.d_2Lma_2L), format_number(r.dt_L),
               format_number(r.dt_2L), format_number(r.dt_2Lma), format_number(r.S),
               format_number(r.gamma0), format_number(r.agmon_lower), format_number(r.agmon_upper),
               format_number(r.crude_lower), format_number(r.crude_upper),
               format_bool(r.bounds_ok), format_bool(r.separation_ok), format_bool(r.geometry_ok)});
}

std::string tail_row(const TailModel &m) {
  return join({format_number(m.h), format_number(m.alpha), format_number(m.t_L),
               format_number(m.fpp_tL), format_number(m.nu), format_log(m.C_h_matched),
               format_log(m.C_h_asymptotic), format_number(m.match_residual)});
}

std::string hopping_row(const HoppingReport &r, const GapPrediction &gate) {
  const bool line = r.w_line.modulus().sign() != 0;
  return join({format_number(r.h), format_number(r.S),
               line ? format_number(r.w_line.log10_mag()) : "NA",
               line ? format_number(axis_phase(r.w_line)) : "NA",
               format_number(r.w_reduced.log10_mag()), format_number(r.w_laplace.log10_mag()),
               format_number(ratio(r.w_laplace.abs(), r.w_reduced.abs())), format_number(gate.rho),
               format_number(gate.gap.log10_mag())});
}

std::vector<std::string> planar_rows(double h, const GapMeasurement &gap) {
  std::vector<std::string> out;
  for (const GridSolve &s : gap.solves)
    out.push_back(join({format_number(h), std::to_string(s.grid.nx), std::to_string(s.grid.ny),
                        format_number(s.lambda1), format_number(s.lambda2),
                        format_number(s.lambda3), format_number(s.gap), format_number(s.residual),
                        format_number(gap.extrapolated_gap), format_number(gap.error_estimate)}));
  return out;
}

RateFit fit_rate(const std::vector<double> &h, const std::vector<double> &log_gap, double S) {
  RateFit fit;
  fit.S = S;
  fit.points = static_cast<int>(h.size());
  if (h.size() < 2 || h.size() != log_gap.size())
    throw DomainError("rate fit needs at least two (h, log gap) points");
  Eigen::MatrixXd A(h.size(), 2);
  Eigen::VectorXd y(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = h[i];
    y(i) = -h[i] * log_gap[i];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
  fit.S_fit = c(0);
  fit.slope = c(1);
  fit.relative_deviation = std::abs(fit.S_fit - S) / S;
  return fit;
}

std::string default_config_text() {
  return "# Canonical double well\n"
         "B = 1\n"
         "L = 2\n"
         "a = 1\n"
         "v0 = -1\n"
         "profile = bump\n"
         "h_values = 0.6, 0.5, 0.45, 0.4, 0.35\n"
         "pipelines = radial, agmon, tail, hopping, planar, compare\n"
         "grid_levels = 3\n"
         "grid_order = 4\n"
         "eig_tol = 1e-9\n"
         "with_line = true\n"
         "allow_unproven = false\n"
         "output_dir = out\n"
         "threads = 1\n";
}

void check_config(const ExperimentConfig &c) {
  if (c.h_values.empty())
    throw InvariantViolation("h_values must not be empty");
  for (std::size_t i = 0; i < c.h_values.size(); ++i) {
    if (!(c.h_values[i] > 0.0))
      throw InvariantViolation("h_values must be positive");
    if (i > 0 && !(c.h_values[i] < c.h_values[i - 1]))
      throw InvariantViolation("h_values must be sorted strictly descending");
  }
  if (!(c.eig_tol > 0.0))
    throw InvariantViolation("eig_tol must be positive");
  if (c.grid_levels < 3)
    throw InvariantViolation("grid_levels must be at least 3 for the Richardson ladder");
  if (c.grid_order != 2 && c.grid_order != 4)
    throw InvariantViolation("grid_order must be 2 or 4");
  if (c.threads < 1)
    throw InvariantViolation("threads must be at least 1");
  if (!c.allow_unproven && !check_separation(c.spec).geometric) {
    std::ostringstream msg;
    msg << "separation: L = " << c.spec.L << " must exceed (1 + sqrt(3)/2) a = "
        << separation_threshold * c.spec.a << " (1.866a); pass --allow-unproven to override";
    throw InvariantViolation(msg.str());
  }
}

ExperimentConfig parse_config(std::istream &in, const std::string &source, bool allow_unproven) {
  std::map<std::string, std::string> kv;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty() || (line.front() == '[' && line.back() == ']'))
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(source + ":" + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (kv.count(key))
      throw ParseError(source + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
    kv[key] = value;
  }

  static const std::set<std::string> known{
      "B",         "L",         "a",       "v0",        "profile",        "h_values",   "pipelines",
      "grid_levels", "grid_order", "eig_tol", "with_line", "allow_unproven", "output_dir", "threads"};
  for (const auto &[key, value] : kv)
    if (!known.count(key))
      throw ParseError(source + ": unknown key '" + key + "'");
  for (const char *key : {"B", "L", "a", "v0"})
    if (!kv.count(key))
      throw ParseError(source + ": missing required key '" + std::string(key) + "'");

  ExperimentConfig c;
  if (kv.count("profile"))
    c.profile = kv["profile"];
  if (kv.count("h_values")) {
    c.h_values.clear();
    for (const auto &item : split_list(kv["h_values"]))
      c.h_values.push_back(parse_double("h_values", item));
  }
  if (kv.count("pipelines")) {
    c.pipelines = Pipelines{false, false, false, false, false, false};
    for (const auto &item : split_list(kv["pipelines"])) {
      if (item == "radial") c.pipelines.radial = true;
      else if (item == "agmon") c.pipelines.agmon = true;
      else if (item == "tail") c.pipelines.tail = true;
      else if (item == "hopping") c.pipelines.hopping = true;
      else if (item == "planar") c.pipelines.planar = true;
      else if (item == "compare") c.pipelines.compare = true;
      else throw ParseError("key 'pipelines': unknown pipeline '" + item + "'");
    }
  }
  if (kv.count("grid_levels")) c.grid_levels = parse_int("grid_levels", kv["grid_levels"]);
  if (kv.count("grid_order")) c.grid_order = parse_int("grid_order", kv["grid_order"]);
  if (kv.count("eig_tol")) c.eig_tol = parse_double("eig_tol", kv["eig_tol"]);
  if (kv.count("with_line")) c.with_line = parse_bool("with_line", kv["with_line"]);
  if (kv.count("allow_unproven")) c.allow_unproven = parse_bool("allow_unproven", kv["allow_unproven"]);
  if (kv.count("output_dir")) c.output_dir = kv["output_dir"];
  if (kv.count("threads")) c.threads = parse_int("threads", kv["threads"]);
  c.allow_unproven = c.allow_unproven || allow_unproven;

  c.spec = PotentialSpec::make(parse_double("B", kv["B"]), parse_double("L", kv["L"]),
                               parse_double("a", kv["a"]), parse_double("v0", kv["v0"]), c.profile);
  check_config(c);
  return c;
}

ExperimentConfig validate_config(const std::filesystem::path &path, bool allow_unproven) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open config file '" + path.string() + "'");
  return parse_config(in, path.string(), allow_unproven);
}

SweepResult run_sweep(const ExperimentConfig &config) {
  check_config(config);
  const std::size_t n = config.h_values.size();
  std::vector<RowResult> rows(n);

  // Rows are independent; results land in fixed slots so the output does not
  // depend on scheduling.
  std::mutex next_mutex;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (next == n)
          return;
        i = next++;
      }
      rows[i] = run_row(config, config.h_values[i]);
    }
  };
  const int threads = std::min<int>(config.threads, static_cast<int>(n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(worker);
    for (auto &t : pool)
      t.join();
  }

  SweepResult result;
  result.rows = static_cast<int>(n);
  std::filesystem::create_directories(config.output_dir);
  auto write = [&](const std::string &name, const std::string &header,
                   const std::vector<std::string> &lines) {
    const auto path = config.output_dir / name;
    std::ofstream out(path);
    out << header << '\n';
    for (const auto &l : lines)
      out << l << '\n';
    result.files.push_back(path);
  };

  std::optional<AgmonReport> agmon;
  if (config.pipelines.agmon) {
    try {
      agmon = check_bounds(config.spec);
      write("agmon.csv", csv::agmon, {agmon_row(*agmon)});
    } catch (const std::exception &e) {
      result.failures.push_back(std::string("agmon: ") + e.what());
      write("agmon.csv", csv::agmon, {na_row(csv::agmon, 0.0, false)});
    }
  }
  const std::vector<std::pair<std::string, const char *>> pipelines{
      {"radial", csv::radial}, {"tail", csv::tail}, {"hopping", csv::hopping},
      {"planar", csv::planar}, {"compare", csv::compare}};
  const std::map<std::string, bool> enabled{{"radial", config.pipelines.radial},
                                            {"tail", config.pipelines.tail},
                                            {"hopping", config.pipelines.hopping},
                                            {"planar", config.pipelines.planar},
                                            {"compare", config.pipelines.compare}};
  for (const auto &[name, header] : pipelines) {
    if (!enabled.at(name))
      continue;
    std::vector<std::string> lines;
    for (const auto &row : rows) {
      const auto it = row.lines.find(name);
      if (it != row.lines.end())
        lines.insert(lines.end(), it->second.begin(), it->second.end());
    }
    write(name + ".csv", header, lines);
  }

  for (const auto &row : rows) {
    if (!row.failures.empty())
      ++result.failed_rows;
    result.failures.insert(result.failures.end(), row.failures.begin(), row.failures.end());
  }

  std::ostringstream summary;
  const double S = action_S(config.spec);
  summary << "spec: B=" << config.spec.B << " L=" << config.spec.L << " a=" << config.spec.a
          << " v0=" << config.spec.v0 << " profile=" << config.profile << '\n';
  summary << "S = " << format_number(S) << '\n';
  auto report_fit = [&](const char *label, auto member) {
    std::vector<double> hs, logs;
    for (const auto &row : rows)
      if ((row.*member).has_value()) {
        hs.push_back(row.h);
        logs.push_back(*(row.*member));
      }
    summary << label << ": ";
    if (hs.size() < 2) {
      summary << "NA (fewer than two points)\n";
      return;
    }
    const RateFit fit = fit_rate(hs, logs, S);
    summary << "S_fit = " << format_number(fit.S_fit) << ", slope = " << format_number(fit.slope)
            << ", relative deviation from S = " << format_number(fit.relative_deviation)
            << ", points = " << fit.points << '\n';
  };
  report_fit("rate fit, -h log(2|w_reduced|) vs h", &RowResult::log_gap_pred);
  report_fit("rate fit, -h log(measured gap) vs h", &RowResult::log_gap_measured);
  summary << "rows = " << result.rows << ", failed rows = " << result.failed_rows << '\n';
  for (const auto &f : result.failures)
    summary << "failure: " << f << '\n';
  {
    const auto path = config.output_dir / "summary.txt";
    std::ofstream out(path);
    out << summary.str();
    result.files.push_back(path);
  }
  return result;
}

} // namespace magtunnel
