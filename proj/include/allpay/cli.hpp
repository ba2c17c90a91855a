#pragma once

// Batch front-end: simulate | solve | check | scan. Every command loads one
// scenario file, runs the requested computation and writes deterministic
// reports into the output directory. Exit codes: 0 success, 2 scenario or
// argument validation failure, 3 solver non-convergence, 4 numerical
// singularity, 5 Monte Carlo integration requested without a seed.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "allpay/analysis.hpp"
#include "allpay/errors.hpp"
#include "allpay/model.hpp"
#include "allpay/qre.hpp"
#include "allpay/race.hpp"
#include "allpay/report.hpp"
#include "allpay/scenario.hpp"

namespace allpay::cli {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitSingularity = 4;
constexpr int kExitSeedRequired = 5;

constexpr const char* kReportSchema = "allpay-report/1";

struct CommandArgs {
  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool emit_plot_data = false;
  int threads = 1;
};

namespace detail {

inline std::filesystem::path resolve_out_dir(const Scenario& scenario, const CommandArgs& args) {
  std::string dir = args.out_dir;
  if (dir.empty() && scenario.destination) dir = *scenario.destination;
  if (dir.empty()) {
    throw ScenarioError("output.destination", "no output directory (pass --out or set output.destination)");
  }
  std::filesystem::create_directories(dir);
  return dir;
}

inline ordered_json auction_json(const Scenario& s) {
  ordered_json j;
  j["prize"] = json_number(s.prize);
  j["horizon"] = s.horizon;
  j["mu"] = json_number(s.mu);
  return j;
}

inline ordered_json allocation_json(const AllocationSpec& alloc) {
  ordered_json j;
  j["family"] = alloc.id();
  if (alloc.family() == AllocFamily::tabulated) {
    j["knots"] = json_array(alloc.knots());
    j["values"] = json_array(alloc.values());
  } else {
    j["params"] = json_array(alloc.params());
  }
  return j;
}

inline BidGrid make_grid(const Scenario& s) {
  double c_max = 0.0;
  if (s.c_max) {
    c_max = *s.c_max;
  } else {
    if (s.prize <= 0.0) {
      throw ScenarioError("solver.c_max", "required when auction.prize is 0");
    }
    // bids above prize/horizon are strictly dominated by the zero bid
    c_max = s.prize / static_cast<double>(s.horizon);
  }
  return s.spacing == "log" ? BidGrid::log_spaced(c_max, s.grid_points)
                            : BidGrid::uniform(c_max, s.grid_points);
}

inline QreOptions make_qre_options(const Scenario& s, const CommandArgs& args) {
  QreOptions opts;
  opts.damping = s.damping;
  opts.tol = s.tol;
  opts.max_iter = s.max_iter;
  opts.seed = args.seed ? args.seed : s.solver_seed;
  return opts;
}

inline std::string density_series_csv(const QreSolution& sol, bool as_density) {
  const BidGrid& grid = sol.densities.front().grid;
  const std::vector<double> cells = grid.cell_widths();
  std::vector<std::string> header = {"cost"};
  for (std::size_t i = 0; i < sol.densities.size(); ++i) {
    header.push_back("miner" + std::to_string(i));
  }
  CsvBuilder csv(header);
  for (int k = 0; k < grid.size(); ++k) {
    std::vector<std::string> row = {format_double(grid[k])};
    for (const BeliefDensity& d : sol.densities) {
      const double w = d.weights[static_cast<std::size_t>(k)];
      row.push_back(format_double(as_density ? w / cells[static_cast<std::size_t>(k)] : w));
    }
    csv.add_row(row);
  }
  return csv.str();
}

inline std::string utility_series_csv(const QreSolution& sol) {
  const BidGrid& grid = sol.densities.front().grid;
  std::vector<std::string> header = {"cost"};
  for (std::size_t i = 0; i < sol.utilities_on_grid.size(); ++i) {
    header.push_back("miner" + std::to_string(i));
  }
  CsvBuilder csv(header);
  for (int k = 0; k < grid.size(); ++k) {
    std::vector<std::string> row = {format_double(grid[k])};
    for (const auto& u : sol.utilities_on_grid) {
      row.push_back(format_double(u[static_cast<std::size_t>(k)]));
    }
    csv.add_row(row);
  }
  return csv.str();
}

}  // namespace detail

inline int cmd_simulate(const CommandArgs& args) {
  const Scenario scenario = load_scenario(args.scenario_path);
  if (!scenario.has_simulation) throw ScenarioError("simulation", "section required for simulate");
  const std::filesystem::path out = detail::resolve_out_dir(scenario, args);

  const CostProfile costs = scenario.cost_profile();
  if (costs.size() != scenario.miner_count) {
    throw ScenarioError("miners.costs", "length must equal miners.count");
  }
  const AuctionParams params = scenario.params();
  const AllocationSpec& alloc = scenario.alloc();

  const std::optional<std::uint64_t> seed = args.seed ? args.seed : scenario.sim_seed;
  if (!seed) {
    throw SeedRequiredError("simulate: Monte Carlo simulation requires a seed "
                            "(simulation.seed or --seed)");
  }

  const DifficultyVector p = difficulty(alloc, costs);
  const WinProbabilities exact = exact_win_prob(p, params.horizon);
  const SimulationResult sim =
      simulate_races(p, params.horizon, scenario.trials, *seed, scenario.semantics, args.threads);

  std::vector<double> utilities(static_cast<std::size_t>(costs.size()));
  for (int i = 0; i < costs.size(); ++i) {
    utilities[static_cast<std::size_t>(i)] =
        utility(params.prize, params.horizon, costs[i], exact.q[static_cast<std::size_t>(i)]);
  }
  const std::vector<bool> rational = rationality_check(utilities);

  ordered_json j;
  j["schema"] = kReportSchema;
  j["kind"] = "simulate";
  j["auction"] = detail::auction_json(scenario);
  j["allocation"] = detail::allocation_json(alloc);
  j["costs"] = json_array(costs.costs());
  j["difficulty"] = json_array(p.p);
  j["semantics"] = to_string(scenario.semantics);
  j["trials"] = sim.trials;
  j["seed"] = *seed;
  j["exact_q"] = json_array(exact.q);
  j["empirical_q"] = json_array(sim.q_hat);
  j["std_err"] = json_array(sim.std_err);
  j["wins"] = sim.wins;
  j["no_winner_trials"] = sim.no_winner;
  j["utility"] = json_array(utilities);
  ordered_json rat = ordered_json::array();
  for (bool r : rational) rat.push_back(r);
  j["rational"] = std::move(rat);
  write_json_file(out / "simulate_report.json", j);
  return kExitOk;
}

inline int cmd_solve(const CommandArgs& args) {
  const Scenario scenario = load_scenario(args.scenario_path);
  if (!scenario.has_solver) throw ScenarioError("solver", "section required for solve");
  const std::filesystem::path out = detail::resolve_out_dir(scenario, args);

  const AuctionParams params = scenario.params();
  const AllocationSpec& alloc = scenario.alloc();
  const BidGrid grid = detail::make_grid(scenario);
  const QreOptions opts = detail::make_qre_options(scenario, args);

  const QreSolution sol = solve_qre(alloc, params, scenario.miner_count, grid, opts);

  ordered_json j;
  j["schema"] = kReportSchema;
  j["kind"] = "solve";
  j["auction"] = detail::auction_json(scenario);
  j["allocation"] = detail::allocation_json(alloc);
  j["miners"] = scenario.miner_count;
  ordered_json solver;
  solver["grid_points"] = grid.size();
  solver["c_max"] = json_number(grid.c_max());
  solver["spacing"] = to_string(grid.spacing);
  solver["damping"] = json_number(opts.damping);
  solver["tol"] = json_number(opts.tol);
  solver["max_iter"] = opts.max_iter;
  if (opts.seed) solver["seed"] = *opts.seed;
  j["solver"] = std::move(solver);
  j["converged"] = sol.converged;
  j["iterations"] = sol.iterations;
  j["residual"] = json_number(sol.residual);
  j["delta"] = json_array(sol.delta);
  j["residual_trace"] = json_array(sol.residual_trace);
  write_json_file(out / "solve_report.json", j);
  write_text_file(out / "densities.csv", detail::density_series_csv(sol, /*as_density=*/false));
  write_text_file(out / "utilities.csv", detail::utility_series_csv(sol));
  if (args.emit_plot_data) {
    write_text_file(out / "plot_cost_density.csv", detail::density_series_csv(sol, /*as_density=*/true));
    write_text_file(out / "plot_cost_utility.csv", detail::utility_series_csv(sol));
  }
  if (!sol.converged) {
    std::cerr << "solve: no convergence after " << sol.iterations
              << " iterations (residual " << format_double(sol.residual) << ")\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

inline int cmd_check(const CommandArgs& args) {
  const Scenario scenario = load_scenario(args.scenario_path);
  if (!scenario.has_analysis || scenario.conditions.empty()) {
    throw ScenarioError("analysis.conditions", "at least one condition id is required for check");
  }
  const std::filesystem::path out = detail::resolve_out_dir(scenario, args);

  const AuctionParams params = scenario.params();
  const AllocationSpec& alloc = scenario.alloc();
  std::vector<CostProfile> grid;
  std::string grid_desc;
  if (scenario.cost_box) {
    grid = cost_box_grid(*scenario.cost_box);
    grid_desc = describe(*scenario.cost_box);
  } else {
    grid = default_cost_grid();
    grid_desc = default_cost_grid_description();
  }

  ordered_json j;
  j["schema"] = kReportSchema;
  j["kind"] = "check";
  j["auction"] = detail::auction_json(scenario);
  j["allocation"] = detail::allocation_json(alloc);
  ordered_json conditions = ordered_json::array();

  for (const std::string& id : scenario.conditions) {
    if (id == "quad") {
      const QuadraticFeasibility feas = quadratic_feasibility(params, scenario.cost_profile());
      ordered_json entry;
      entry["id"] = "quad";
      entry["result"] = to_json(feas);
      conditions.push_back(std::move(entry));
      continue;
    }
    ConditionReport report;
    if (id == "prop1") {
      report = check_prop1(alloc, params, grid, grid_desc);
    } else if (id == "lemma1") {
      report = check_lemma1(alloc, grid, grid_desc);
    } else if (id == "lemma2") {
      report = check_lemma2(alloc, grid, grid_desc);
    } else if (id == "logderiv") {
      report = check_logderiv_bound(alloc, params, grid, grid_desc);
    } else if (id == "pi-derivative") {
      if (!scenario.has_solver) {
        throw ScenarioError("solver", "section required for the pi-derivative condition");
      }
      const BidGrid bid_grid = detail::make_grid(scenario);
      const QreOptions opts = detail::make_qre_options(scenario, args);
      const QreSolution sol = solve_qre(alloc, params, scenario.miner_count, bid_grid, opts);
      if (!sol.converged) {
        std::cerr << "check: pi-derivative needs a converged solution (residual "
                  << format_double(sol.residual) << ")\n";
        return kExitNonConvergence;
      }
      report = check_pi_derivative(sol, alloc, params);
    }
    write_text_file(out / ("check_" + id + ".csv"), condition_points_csv(report));
    conditions.push_back(to_json(report));
  }
  j["conditions"] = std::move(conditions);
  write_json_file(out / "check_report.json", j);
  return kExitOk;
}

inline int cmd_scan(const CommandArgs& args) {
  const Scenario scenario = load_scenario(args.scenario_path);
  if (!scenario.has_analysis) throw ScenarioError("analysis", "section required for scan");
  const std::filesystem::path out = detail::resolve_out_dir(scenario, args);

  const ScanReport report = scan_theorem(scenario.scan_box, scenario.scan_resolution);

  ordered_json j;
  j["schema"] = kReportSchema;
  j["kind"] = "scan";
  j["scan"] = to_json(report);
  write_json_file(out / "scan_report.json", j);
  write_text_file(out / "margin.csv", scan_margin_csv(report));
  if (args.emit_plot_data) {
    CsvBuilder csv({"cell", "margin"});
    for (std::size_t idx = 0; idx < report.cells.size(); ++idx) {
      csv.add_row({std::to_string(idx), format_double(report.cells[idx].feas.margin)});
    }
    write_text_file(out / "plot_margin.csv", csv.str());
  }
  return kExitOk;
}

inline int run(int argc, const char* const* argv) {
  CLI::App app{"all-pay mining auction toolkit"};
  app.require_subcommand(1);

  CommandArgs args;
  const auto add_common = [&args](CLI::App* cmd) {
    cmd->add_option("-s,--scenario", args.scenario_path, "scenario file (JSON)")->required();
    cmd->add_option("-o,--out", args.out_dir, "output directory (default: output.destination)");
    cmd->add_option("--seed", args.seed, "override scenario seeds");
    cmd->add_flag("--emit-plot-data", args.emit_plot_data, "write additional (x, y) series files");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run seeded race simulation against exact values");
  add_common(simulate);
  simulate->add_option("--threads", args.threads, "worker threads (identical output for any value)")
      ->default_val(1);
  CLI::App* solve = app.add_subcommand("solve", "solve the logit equilibrium densities");
  add_common(solve);
  CLI::App* check = app.add_subcommand("check", "run condition checks over a cost grid");
  add_common(check);
  CLI::App* scan = app.add_subcommand("scan", "scan the feasibility quadratic over a parameter box");
  add_common(scan);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(args);
    if (solve->parsed()) return cmd_solve(args);
    if (check->parsed()) return cmd_check(args);
    return cmd_scan(args);
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SeedRequiredError& e) {
    std::cerr << "seed required: " << e.what() << "\n";
    return kExitSeedRequired;
  } catch (const SingularityError& e) {
    std::cerr << "numerical singularity: " << e.what() << "\n";
    return kExitSingularity;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("allpay");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace allpay::cli
