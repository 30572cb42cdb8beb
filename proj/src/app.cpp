#include "crossdiff/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include <fmt/core.h>

#include "crossdiff/aquifer.hpp"
#include "crossdiff/conditions.hpp"
#include "crossdiff/diagnostics.hpp"
#include "crossdiff/errors.hpp"
#include "crossdiff/output.hpp"
#include "crossdiff/reference_cases.hpp"

namespace crossdiff {

using nlohmann::json;

nlohmann::json RunManifest::to_json() const {
  json j;
  j["command"] = command;
  j["status"] = status;
  j["exit_code"] = exit_code;
  j["message"] = message;
  j["config_hash"] = config_hash;
  j["artifacts"] = artifacts;
  j["config"] = config;
  j["summary"] = summary;
  if (wall_time) j["wall_time_s"] = *wall_time;
  return j;
}

const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v = {"check", "simulate", "aquifer", "keulegan", "probe", "sweep", "convergence"};
  return v;
}

namespace {

// Thrown inside a command once partial outputs are on disk.
struct SolverAbort {
  std::string message;
};

void require_kind(const ScenarioConfig& cfg, const std::string& verb, std::initializer_list<ScenarioKind> kinds) {
  if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end())
    throw ConfigError(fmt::format("command '{}' does not accept kind {}", verb, kind_name(cfg.kind)));
}

// Structural problems are configuration errors; data violations become failed condition rows.
std::vector<ConditionReport> model_conditions(const ScenarioConfig& cfg, const ModelSpec& spec, const Grid& grid) {
  const ValidationReport rep = validate_spec(spec, grid);
  std::vector<ConditionReport> rows;
  for (const Violation& v : rep.violations) {
    if (v.kind == "negative initial" || v.kind == "negative boundary" || v.kind == "compatibility") {
      ConditionReport r;
      r.name = fmt::format("data_{}_u{}", v.kind == "compatibility" ? "compatibility"
                                          : v.kind == "negative initial" ? "initial_sign"
                                                                         : "boundary_sign",
                           v.species + 1);
      r.lhs = r.rhs = r.margin = std::nan("");
      r.pass = false;
      rows.push_back(r);
    } else {
      throw ConfigError(fmt::format("invalid model ({}): {}", v.kind, v.message));
    }
  }
  if (cfg.diagnostics.conditions && spec.species() == 2) {
    for (auto& r : check_existence(spec)) rows.push_back(r);
    for (auto& r : check_regularity(spec, cfg.diagnostics.g_s)) rows.push_back(r);
  }
  return rows;
}

bool all_pass(const std::vector<ConditionReport>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const ConditionReport& r) { return r.pass; });
}

double initial_max(const ModelSpec& spec, const Grid& grid) {
  const Field f = initial_field(spec, grid);
  return *std::max_element(f.values.begin(), f.values.end());
}

// Budget rows and traces for each species of a finished run.
void degiorgi_outputs(const ScenarioConfig& cfg, const ModelSpec& spec, const Grid& grid,
                      const SimulationResult& result, std::vector<ConditionReport>& rows, ArtifactWriter& out,
                      json& summary) {
  const DiagnosticsConfig& d = cfg.diagnostics;
  const double ell0 = d.ell0 ? *d.ell0 : initial_max(spec, grid);
  const std::vector<double> grad = discrete_grad_norm(result, grid, d.s);
  const int m = spec.species();
  const double t_omega = result.snapshots.back().time * grid.measure();
  for (int i = 0; i < m; ++i) {
    double k_off = 0.0;
    for (int j = 0; j < m; ++j)
      if (j != i) k_off = std::max(k_off, ellipticity_bounds(spec.tensor(i, j)).upper);
    DeGiorgiInputs in;
    in.dim = grid.dim();
    in.s = d.s;
    in.ell0 = ell0;
    in.m_factor = d.m;
    in.grad_bound = d.M_s ? *d.M_s : grad[i];
    in.k_offdiag_upper = k_off;
    in.k_diag_lower = ellipticity_bounds(spec.tensor(i, i)).lower;
    in.delta = spec.delta[i];
    in.ell = spec.coupling == Coupling::untruncated ? d.m * ell0 : spec.ell;
    const double r = grid.dim() + 2.0;
    in.sobolev_beta = d.sobolev_beta ? *d.sobolev_beta : empirical_sobolev_beta(result, grid, i, r, r);
    const std::string name = result.names[i];
    json& js = summary["degiorgi"][name];
    js["ell0"] = ell0;
    js["grad_bound"] = in.grad_bound;
    js["sobolev_beta"] = in.sobolev_beta;
    DeGiorgiBudget budget;
    try {
      budget = degiorgi_budget(in);
    } catch (const InvalidParameter& e) {
      js["error"] = e.what();
      continue;
    }
    ConditionReport row = ConditionReport::strict_less(fmt::format("degiorgi_budget_{}", name), t_omega,
                                                       budget.feasible ? budget.max_t_omega : 0.0);
    row.infeasible = !budget.feasible;
    rows.push_back(row);
    js["zeta"] = budget.zeta;
    js["c_i"] = budget.c_i;
    if (!budget.feasible) continue;
    const DeGiorgiTrace tr = degiorgi_trace(result, grid, i, ell0, d.m, d.m_prime, budget, d.n_max);
    out.write(fmt::format("degiorgi_trace_{}.csv", name), degiorgi_csv(tr));
    js["n0"] = tr.n0;
  }
}

json series_summary(const SimulationResult& r) {
  json j;
  j["steps"] = r.stats.steps;
  j["picard_warnings"] = r.stats.picard_warnings;
  j["max_picard_sweeps"] = r.stats.max_picard_sweeps;
  j["linear_iterations"] = r.stats.linear_iterations;
  j["max_linear_residual"] = r.stats.max_linear_residual;
  if (!r.series.empty()) {
    json mins = json::array();
    for (double v : r.series.back().min) mins.push_back(v);
    j["final_min"] = mins;
    double lo = INFINITY;
    for (const auto& p : r.series)
      for (double v : p.min) lo = std::min(lo, v);
    j["global_min"] = lo;
  }
  return j;
}

void cmd_check(const ScenarioConfig& cfg, const CommandOptions& opt, ArtifactWriter& out, RunManifest& man) {
  const Grid grid = make_grid(cfg);
  std::vector<ConditionReport> rows;
  if (cfg.kind == ScenarioKind::generic) {
    const ModelSpec spec = make_model(cfg);
    rows = model_conditions(cfg, spec, grid);
    const DiagnosticsConfig& d = cfg.diagnostics;
    if (d.M_s && d.sobolev_beta && spec.species() >= 2) {
      const double ell0 = d.ell0 ? *d.ell0 : initial_max(spec, grid);
      for (int i = 0; i < spec.species(); ++i) {
        DeGiorgiInputs in;
        in.dim = grid.dim();
        in.s = d.s;
        in.ell0 = ell0;
        in.m_factor = d.m;
        in.grad_bound = *d.M_s;
        for (int j = 0; j < spec.species(); ++j)
          if (j != i) in.k_offdiag_upper = std::max(in.k_offdiag_upper, ellipticity_bounds(spec.tensor(i, j)).upper);
        in.k_diag_lower = ellipticity_bounds(spec.tensor(i, i)).lower;
        in.delta = spec.delta[i];
        in.ell = spec.ell;
        in.sobolev_beta = *d.sobolev_beta;
        const DeGiorgiBudget b = degiorgi_budget(in);
        ConditionReport r = ConditionReport::strict_less(fmt::format("degiorgi_budget_u{}", i + 1),
                                                         cfg.stepper.t_end * grid.measure(),
                                                         b.feasible ? b.max_t_omega : 0.0);
        r.infeasible = !b.feasible;
        rows.push_back(r);
      }
    }
  } else {
    const AquiferSpec a = make_aquifer(cfg, grid);
    rows.push_back(check_aquifer_admissibility(a.h2, a.delta, a.alpha));
    validate_aquifer(a, grid);
  }
  out.write("conditions.csv", conditions_csv(rows));
  man.summary["all_pass"] = all_pass(rows);
  if (opt.require_feasible && !all_pass(rows)) {
    man.status = "infeasible";
    man.exit_code = kExitInfeasible;
    man.message = "a condition check failed";
  }
}

bool gate(const std::vector<ConditionReport>& rows, const CommandOptions& opt, ArtifactWriter& out,
          RunManifest& man) {
  if (!opt.require_feasible || all_pass(rows)) return true;
  out.write("conditions.csv", conditions_csv(rows));
  man.status = "infeasible";
  man.exit_code = kExitInfeasible;
  man.message = "a condition check failed; nothing was run";
  return false;
}

void cmd_simulate(const ScenarioConfig& cfg, const CommandOptions& opt, ArtifactWriter& out, RunManifest& man) {
  const Grid grid = make_grid(cfg);
  const ModelSpec spec = make_model(cfg);
  std::vector<ConditionReport> rows = model_conditions(cfg, spec, grid);
  if (!gate(rows, opt, out, man)) return;

  SimulationResult result;
  std::string failure;
  try {
    result = run(spec, grid, cfg.stepper);
  } catch (const RunFailure& e) {
    result = e.partial();
    failure = e.what();
  }
  write_run(out, "", result, grid, cfg.outputs.snapshots);
  out.write("balance.csv", balance_csv(mass_balance_residual(result), result.names));
  if (cfg.diagnostics.bounds) {
    const BoundReport b = bound_check(result, grid, (*cfg.diagnostics.bounds)[0], (*cfg.diagnostics.bounds)[1]);
    out.write("bounds.csv", bounds_csv(b, result.names, grid));
    man.summary["bounds_ok"] = b.ok();
  }
  if (failure.empty() && cfg.diagnostics.degiorgi) degiorgi_outputs(cfg, spec, grid, result, rows, out, man.summary);
  out.write("conditions.csv", conditions_csv(rows));
  man.summary["run"] = series_summary(result);
  if (!failure.empty()) throw SolverAbort{failure};
}

Field make_perturbation(const ScenarioConfig& cfg, const Grid& grid, int species, std::vector<int>& region) {
  const PerturbationConfig& p = cfg.diagnostics.perturbation;
  region = disc_cells(grid, p.center, p.radius);
  if (region.empty()) throw ConfigError("perturbation disc contains no cell centers");
  const std::vector<int> edge = region_boundary_cells(grid, region);
  std::vector<bool> on_edge(grid.size(), false);
  for (int c : edge) on_edge[c] = true;
  Field f(species, grid.size(), 0.0);
  for (int c : region) {
    if (on_edge[c]) continue;
    const Point x = grid.center(c);
    const double r2 = (x[0] - p.center[0]) * (x[0] - p.center[0]) +
                      (grid.dim() == 2 ? (x[1] - p.center[1]) * (x[1] - p.center[1]) : 0.0);
    const double q = 1.0 - r2 / (p.radius * p.radius);
    const double v = p.shape == "plateau" ? p.amplitude : p.amplitude * q * q;
    for (int i = 0; i < species; ++i)
      if (p.species < 0 || p.species == i) f.at(i, c) = v;
  }
  return f;
}

void cmd_probe(const ScenarioConfig& cfg, const CommandOptions& opt, ArtifactWriter& out, RunManifest& man) {
  const Grid grid = make_grid(cfg);
  const ModelSpec spec = make_model(cfg);
  if (spec.species() != 2) throw ConfigError("the probe needs exactly two species");
  std::vector<ConditionReport> rows = model_conditions(cfg, spec, grid);
  if (!gate(rows, opt, out, man)) return;
  out.write("conditions.csv", conditions_csv(rows));

  std::vector<int> region;
  const Field pert = make_perturbation(cfg, grid, spec.species(), region);
  UniquenessProbeReport rep;
  try {
    rep = uniqueness_probe(spec, grid, cfg.stepper, pert, region);
  } catch (const SolverFailure& e) {
    throw SolverAbort{e.what()};
  }
  const std::vector<std::string> names = species_names(spec.species());
  out.write("probe.csv", probe_csv(rep, names));
  out.write("probe_summary.csv", probe_summary_csv(rep, names));
  man.summary["amplification"] = rep.amplification;
  man.summary["min_margin"] = rep.margins.min_margin;
  man.summary["region_cells"] = region.size();
}

void write_aquifer_run(const AquiferRun& run, const AquiferSpec& spec, const Grid& grid, const std::string& prefix,
                       const ScenarioConfig& cfg, ArtifactWriter& out) {
  write_run(out, prefix, run.heads, grid, cfg.outputs.snapshots);
  if (cfg.outputs.profiles)
    for (std::size_t k = 0; k < run.heads.snapshots.size(); ++k)
      out.write(fmt::format("{}profiles/profile_{:05d}.csv", prefix, k),
                profile_csv(run.heads.snapshots[k], grid, spec.h2));
  out.write(prefix + "species_series.csv", series_csv(run.species));
  out.write(prefix + "balance.csv", balance_csv(mass_balance_residual(run.species), run.species.names));
  out.write(prefix + "confinement.csv", confinement_csv(run.confinement));
}

AquiferRun penalized_or_partial(const AquiferSpec& spec, const Grid& grid, const StepperConfig& stepper,
                                std::string& failure) {
  try {
    return run_penalized(spec, grid, stepper);
  } catch (const RunFailure& e) {
    failure = e.what();
    AquiferRun r;
    r.species = e.partial();
    r.heads = heads_result(r.species, spec, grid);
    r.confinement = confinement_report(r.species, spec, grid);
    return r;
  }
}

std::vector<ConditionReport> aquifer_conditions(const AquiferSpec& spec, const Grid& grid) {
  std::vector<ConditionReport> rows{check_aquifer_admissibility(spec.h2, spec.delta, spec.alpha)};
  if (rows.front().pass) validate_aquifer(spec, grid);
  return rows;
}

void cmd_aquifer(const ScenarioConfig& cfg, const CommandOptions& opt, ArtifactWriter& out, RunManifest& man) {
  const Grid grid = make_grid(cfg);
  const AquiferSpec spec = make_aquifer(cfg, grid);
  const std::vector<ConditionReport> rows = aquifer_conditions(spec, grid);
  if (!gate(rows, opt, out, man)) return;
  if (!rows.front().pass) throw ConfigError("aquifer parameters are not admissible");
  out.write("conditions.csv", conditions_csv(rows));

  std::string failure;
  const AquiferRun run = penalized_or_partial(spec, grid, cfg.stepper, failure);
  write_aquifer_run(run, spec, grid, "", cfg, out);
  man.summary["run"] = series_summary(run.species);
  if (!run.confinement.violation.empty()) {
    man.summary["final_violation"] = run.confinement.violation.back();
    man.summary["final_residual"] = run.confinement.residual.back();
  }
  if (!failure.empty()) throw SolverAbort{failure};
}

void cmd_keulegan(const ScenarioConfig& cfg, const CommandOptions& opt, ArtifactWriter& out, RunManifest& man) {
  const Grid grid = make_grid(cfg);
  const AquiferSpec spec = make_aquifer(cfg, grid);
  const std::vector<ConditionReport> rows = aquifer_conditions(spec, grid);
  if (!gate(rows, opt, out, man)) return;
  if (!rows.front().pass) throw ConfigError("aquifer parameters are not admissible");
  out.write("conditions.csv", conditions_csv(rows));

  std::string failure;
  const AquiferRun pen = penalized_or_partial(spec, grid, cfg.stepper, failure);
  write_aquifer_run(pen, spec, grid, "penalized/", cfg, out);

  SimulationResult confined;
  std::string confined_failure;
  if (failure.empty()) {
    try {
      confined = run_confined_aquifer(spec, grid, cfg.stepper);
    } catch (const RunFailure& e) {
      confined = e.partial();
      confined_failure = e.what();
    } catch (const EllipticSolveFailure& e) {
      confined_failure = e.what();
    }
    if (!confined.snapshots.empty()) {
      write_run(out, "confined/", confined, grid, cfg.outputs.snapshots);
      if (cfg.outputs.profiles)
        for (std::size_t k = 0; k < confined.snapshots.size(); ++k) {
          Field heads = confined.snapshots[k];
          // Fully saturated: the fresh table sits at the top.
          for (int c = 0; c < heads.cells; ++c) heads.at(1, c) = 0.0;
          out.write(fmt::format("confined/profiles/profile_{:05d}.csv", k), profile_csv(heads, grid, spec.h2));
        }
    }
  }

  const Field& first = pen.heads.snapshots.front();
  const Field& last = pen.heads.snapshots.back();
  const double s0 = interface_slope(first, grid);
  const double s1 = interface_slope(last, grid);
  const Point well = well_position(grid, cfg.keulegan.options);
  const auto dome = interface_dome(last, grid, well, 3);
  std::string csv = "quantity,value\n";
  auto row = [&](const std::string& q, double v) {
    csv += q + "," + format_number(v) + "\n";
    man.summary[q] = v;
  };
  row("initial_slope", s0);
  row("final_slope", s1);
  row("slope_ratio", s0 != 0.0 ? std::abs(s1 / s0) : 0.0);
  row("dome_found", dome ? 1.0 : 0.0);
  if (dome) {
    row("dome_x", grid.center(*dome)[0]);
    row("dome_y", grid.center(*dome)[1]);
    row("dome_h", last.at(0, *dome));
  }
  if (!confined.snapshots.empty() && confined.snapshots.back().time == last.time) {
    double diff = 0.0;
    for (int c = 0; c < grid.size(); ++c)
      diff = std::max(diff, std::abs(confined.snapshots.back().at(0, c) - last.at(0, c)));
    row("max_h_difference_confined", diff);
  }
  out.write("keulegan_summary.csv", csv);
  if (!failure.empty()) throw SolverAbort{failure};
  if (!confined_failure.empty()) throw SolverAbort{confined_failure};
}

void cmd_sweep(const ScenarioConfig& cfg, const CommandOptions& opt, ArtifactWriter& out, RunManifest& man) {
  const Grid grid = make_grid(cfg);
  const AquiferSpec spec = make_aquifer(cfg, grid);
  const std::vector<ConditionReport> rows = aquifer_conditions(spec, grid);
  if (!gate(rows, opt, out, man)) return;
  if (!rows.front().pass) throw ConfigError("aquifer parameters are not admissible");
  out.write("conditions.csv", conditions_csv(rows));

  const std::vector<double> eps = opt.epsilons ? *opt.epsilons : cfg.epsilons;
  SweepReport rep;
  try {
    rep = epsilon_sweep(spec, grid, cfg.stepper, eps);
  } catch (const InvalidParameter& e) {
    throw ConfigError(fmt::format("sweep: {}", e.what()));
  }
  out.write("sweep.csv", sweep_csv(rep));
  out.write("sweep_fit.csv", fmt::format("quantity,value\nfit_exponent,{}\nfit_valid,{}\n",
                                         format_number(rep.fit_exponent), rep.fit_valid ? 1 : 0));
  man.summary["fit_exponent"] = rep.fit_valid ? json(rep.fit_exponent) : json(nullptr);
  for (const SweepRow& r : rep.rows)
    if (!r.ok) throw SolverAbort{fmt::format("epsilon = {}: {}", r.epsilon, r.message)};
}

void cmd_convergence(const ScenarioConfig& cfg, const CommandOptions&, ArtifactWriter& out, RunManifest& man) {
  const ConvergenceConfig& c = cfg.convergence;
  StepperConfig base = cfg.stepper;
  base.t_end = c.t_end;
  std::vector<Grid> grids;
  ConvergenceTable table;
  try {
    if (c.kind == "heat_sine") {
      for (int n : c.grids) grids.push_back(Grid::line(0.0, 1.0, n));
      table = convergence_study(heat_sine_spec, [](int, double t, const Point& x) { return heat_sine_exact(t, x[0]); },
                                grids, c.dts, base);
    } else {
      const ManufacturedCase mc;
      for (int n : c.grids) grids.push_back(Grid::rectangle({0.0, 0.0}, {1.0, 1.0}, n, n));
      table = convergence_study([&mc] { return mc.spec(); },
                                [&mc](int i, double t, const Point& x) { return mc.exact(i, t, x); }, grids, c.dts,
                                base);
    }
  } catch (const SolverFailure& e) {
    throw SolverAbort{e.what()};
  }
  out.write("convergence.csv", convergence_csv(table));
  if (table.rows.size() > 1) man.summary["final_order_linf"] = table.rows.back().order_linf;
}

}  // namespace

RunManifest execute(const ScenarioConfig& config, const CommandOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest man;
  man.command = options.verb;
  man.status = "ok";
  man.config = config.resolved;
  man.config_hash = hex64(fnv1a64(config.resolved.dump()));

  ArtifactWriter out(options.out_dir);
  const std::string& v = options.verb;
  try {
    if (v == "check") {
      cmd_check(config, options, out, man);
    } else if (v == "simulate") {
      require_kind(config, v, {ScenarioKind::generic});
      cmd_simulate(config, options, out, man);
    } else if (v == "probe") {
      require_kind(config, v, {ScenarioKind::generic});
      cmd_probe(config, options, out, man);
    } else if (v == "convergence") {
      require_kind(config, v, {ScenarioKind::generic});
      cmd_convergence(config, options, out, man);
    } else if (v == "aquifer") {
      require_kind(config, v, {ScenarioKind::aquifer, ScenarioKind::keulegan});
      cmd_aquifer(config, options, out, man);
    } else if (v == "keulegan") {
      require_kind(config, v, {ScenarioKind::keulegan});
      cmd_keulegan(config, options, out, man);
    } else if (v == "sweep") {
      require_kind(config, v, {ScenarioKind::aquifer, ScenarioKind::keulegan});
      cmd_sweep(config, options, out, man);
    } else {
      throw ConfigError(fmt::format("unknown command '{}'", v));
    }
  } catch (const SolverAbort& a) {
    man.status = "solver_failure";
    man.exit_code = kExitSolverFailure;
    man.message = a.message;
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  } catch (const EllipticityViolation& e) {
    throw ConfigError(e.what());
  }

  man.artifacts = out.artifacts();
  if (options.timing)
    man.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ArtifactWriter(options.out_dir).write("manifest.json", man.to_json().dump(2) + "\n");
  return man;
}

int run_command(const CommandOptions& options, std::ostream& err) {
  try {
    ScenarioConfig cfg = parse_scenario(options.config_path);
    if (options.seed) apply_seed(cfg, *options.seed);
    const RunManifest man = execute(cfg, options);
    if (man.exit_code != kExitOk) err << "crossdiff: " << man.status << ": " << man.message << "\n";
    return man.exit_code;
  } catch (const ConfigError& e) {
    err << "crossdiff: configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const InvalidParameter& e) {
    err << "crossdiff: configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const SolverFailure& e) {
    err << "crossdiff: solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

}  // namespace crossdiff
