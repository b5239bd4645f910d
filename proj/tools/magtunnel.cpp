// Command-line driver: single-well, agmon, tail, hopping, planar-gap, sweep, compare.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "magtunnel/errors.hpp"
#include "magtunnel/experiment.hpp"

using namespace magtunnel;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  bool allow_unproven = false;
};

ExperimentConfig load_config(const GlobalOptions &g) {
  ExperimentConfig c;
  if (g.config_path.empty()) {
    std::istringstream in(default_config_text());
    c = parse_config(in, "<default config>", g.allow_unproven);
  } else {
    c = validate_config(g.config_path, g.allow_unproven);
  }
  if (!g.out_dir.empty())
    c.output_dir = g.out_dir;
  if (g.threads > 0)
    c.threads = g.threads;
  return c;
}

std::vector<double> h_list(const std::vector<double> &cli, const ExperimentConfig &c) {
  return cli.empty() ? c.h_values : cli;
}

// Runs fn per h, printing module errors to stderr; returns the exit code.
template <typename Fn> int per_h(const std::vector<double> &hs, Fn &&fn) {
  int code = 0;
  for (double h : hs) {
    try {
      fn(h);
    } catch (const std::exception &e) {
      std::cerr << "h=" << h << ": " << e.what() << '\n';
      code = 2;
    }
  }
  return code;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Magnetic double-well tunneling: radial, tail, hopping and planar pipelines"};
  // "--h" is the semiclassical parameter, so help is long-form only.
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "flat key = value experiment config")
      ->check(CLI::ExistingFile);
  app.add_option("--out", g.out_dir, "output directory for sweep/compare reports");
  app.add_option("--threads", g.threads, "concurrent sweep rows")->check(CLI::PositiveNumber);
  app.add_flag("--allow-unproven", g.allow_unproven,
               "run specs that violate the well-separation condition");

  std::vector<double> hs;
  std::string dump_path;
  auto *single = app.add_subcommand("single-well", "radial ground state and first excited level");
  single->add_option("--h", hs, "semiclassical parameter(s)")->delimiter(',');
  single->add_option("--dump", dump_path, "write r,u CSV of the ground state (first h)");

  auto *agmon = app.add_subcommand("agmon", "Agmon distances, action S and its bounds");

  auto *tail = app.add_subcommand("tail", "integral-representation tail and both C_h values");
  tail->add_option("--h", hs, "semiclassical parameter(s)")->delimiter(',');

  auto *hopping = app.add_subcommand("hopping", "hopping coefficient by three routes");
  hopping->add_option("--h", hs, "semiclassical parameter(s)")->delimiter(',');

  double planar_h = 0.5;
  std::vector<int> grids;
  int k = 3;
  double tol = 1e-9;
  auto *planar = app.add_subcommand("planar-gap", "planar eigenvalues on a refinement ladder");
  planar->add_option("--h", planar_h, "semiclassical parameter")->required();
  planar->add_option("--grids", grids, "nx values, nx+1 doubling (default: 3-level ladder)")
      ->delimiter(',');
  planar->add_option("--k", k, "number of eigenvalues (>= 3)")->check(CLI::Range(3, 50));
  planar->add_option("--tol", tol, "eigenpair residual tolerance")->check(CLI::PositiveNumber);

  auto *sweep = app.add_subcommand("sweep", "run all configured pipelines over h_values");
  auto *compare = app.add_subcommand("compare", "measured gap vs hopping prediction over h_values");

  CLI11_PARSE(app, argc, argv);

  ExperimentConfig config;
  try {
    config = load_config(g);
  } catch (const Error &e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  const PotentialSpec &spec = config.spec;

  try {
    if (*single) {
      std::cout << csv::radial << '\n';
      bool dumped = false;
      return per_h(h_list(hs, config), [&](double h) {
        const RadialState st = solve_radial(spec, h);
        std::cout << radial_row(st, h) << '\n';
        if (!dump_path.empty() && !dumped) {
          std::ofstream out(dump_path);
          out << "r,u\n";
          for (Eigen::Index i = 0; i < st.r.size(); ++i)
            out << format_number(st.r(i)) << ',' << format_number(st.u(i)) << '\n';
          dumped = true;
        }
      });
    }
    if (*agmon) {
      const AgmonReport r = check_bounds(spec);
      std::cout << csv::agmon << '\n' << agmon_row(r) << "\n\n";
      const std::vector<std::pair<const char *, double>> table{
          {"d(0,L)", r.d_0_L},         {"d(0,a)", r.d_0_a},       {"d(0,2L)", r.d_0_2L},
          {"d(0,2L-a)", r.d_0_2Lma},   {"d(2L-a,2L)", r.d_2Lma_2L}, {"dt(L)", r.dt_L},
          {"dt(2L)", r.dt_2L},         {"dt(2L-a)", r.dt_2Lma},   {"S", r.S},
          {"gamma0", r.gamma0},        {"lower (Agmon)", r.agmon_lower},
          {"upper (Agmon)", r.agmon_upper}, {"lower (crude)", r.crude_lower},
          {"upper (crude)", r.crude_upper}};
      for (const auto &[name, value] : table)
        std::printf("%-16s %.15g\n", name, value);
      std::printf("%-16s %s\n%-16s %s\n%-16s %s\n", "bounds hold", r.bounds_ok ? "yes" : "no",
                  "separation", r.separation_ok ? "yes" : "no", "geometry", r.geometry_ok ? "yes" : "no");
      return r.bounds_ok ? 0 : 2;
    }
    if (*tail) {
      std::cout << csv::tail << '\n';
      return per_h(h_list(hs, config), [&](double h) {
        const RadialState st = solve_radial(spec, h);
        std::cout << tail_row(match_normalization(st, spec, h)) << '\n';
      });
    }
    if (*hopping) {
      std::cout << csv::hopping << '\n';
      return per_h(h_list(hs, config), [&](double h) {
        const RadialState st = solve_radial(spec, h);
        const TailModel model = match_normalization(st, spec, h);
        const HoppingReport rep = compute_hopping(model, spec, h, config.with_line);
        std::cout << hopping_row(rep, gap_prediction(rep, st.mu_h)) << '\n';
      });
    }
    if (*planar) {
      const double h = planar_h;
      const RadialState st = solve_radial(spec, h);
      const std::vector<GridSpec> ladder =
          grids.empty() ? default_ladder(spec, h, config.grid_levels, config.grid_order)
                        : ladder_from_nx(spec, h, grids, config.grid_order);
      if (k != 3) {
        // Extra levels: plain eigenvalue listing per grid.
        std::cout << "h,nx,ny,index,lambda,residual\n";
        for (const GridSpec &grid : ladder) {
          EigenOptions eo;
          eo.k = k;
          eo.tol = tol;
          eo.shift = st.mu_h - 0.02 * h;
          const Eigenpairs e = lowest_eigs(build_hamiltonian(spec, h, grid), eo);
          for (int j = 0; j < k; ++j)
            std::cout << format_number(h) << ',' << grid.nx << ',' << grid.ny << ',' << j + 1 << ','
                      << format_number(e.values(j)) << ',' << format_number(e.residuals(j)) << '\n';
        }
        return 0;
      }
      GapOptions opts;
      opts.tol = tol;
      opts.shift = st.mu_h;
      const GapMeasurement m = measure_gap(spec, h, ladder, opts);
      std::cout << csv::planar << '\n';
      for (const auto &line : planar_rows(h, m))
        std::cout << line << '\n';
      if (!m.reliable)
        std::cerr << "warning: eigenpair residual exceeds 10% of the gap\n";
      return 0;
    }
    if (*sweep || *compare) {
      ExperimentConfig run = config;
      if (*compare)
        run.pipelines = Pipelines{false, false, false, true, true, true};
      const SweepResult res = run_sweep(run);
      for (const auto &f : res.files)
        std::cout << "wrote " << f.string() << '\n';
      for (const auto &f : res.failures)
        std::cerr << f << '\n';
      return res.failures.empty() ? 0 : 2;
    }
  } catch (const ParseError &e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const InvariantViolation &e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  return 0;
}
