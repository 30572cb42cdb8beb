#include "crossdiff/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "crossdiff/parallel.hpp"

namespace crossdiff {

using Triplet = Eigen::Triplet<double>;

void StepperConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidParameter(fmt::format("dt must be positive, got {}", dt));
  if (!(t_end >= 0.0)) throw InvalidParameter(fmt::format("t_end must be nonnegative, got {}", t_end));
  if (!(picard_tol > 0.0) || !(lin_tol > 0.0)) throw InvalidParameter("tolerances must be positive");
  if (picard_max < 1 || lin_max < 1) throw InvalidParameter("iteration limits must be positive");
  if (snapshot_every < 1) throw InvalidParameter("snapshot cadence must be positive");
}

int StepperConfig::step_count() const {
  if (t_end <= 0.0) return 0;
  return static_cast<int>(std::ceil(t_end / dt - 1e-9));
}

double face_coefficient(double coeff_a, double coeff_b, double driver_a, double driver_b, FaceWeighting w) {
  if (w == FaceWeighting::arithmetic) return 0.5 * (coeff_a + coeff_b);
  if (driver_a > driver_b) return coeff_a;
  if (driver_b > driver_a) return coeff_b;
  return 0.5 * (coeff_a + coeff_b);
}

AssembledSystem assemble_system(const ModelSpec& spec, const Grid& grid, const Field& old, const Field& lag,
                                double dt, FaceWeighting weighting) {
  const int m = spec.species();
  const int nc = grid.size();
  const int n = m * nc;
  const double vol = grid.cell_volume();
  const double t_new = old.time + dt;
  auto dof = [nc](int i, int c) { return i * nc + c; };

  std::vector<Triplet> a;
  std::vector<Triplet> bnd;
  a.reserve(static_cast<std::size_t>(n) * (1 + 2 * grid.dim() * m));
  AssembledSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(n);
  sys.boundary_offset = Eigen::VectorXd::Zero(m);
  sys.source_integral = Eigen::VectorXd::Zero(m);

  std::vector<double> local(m);
  for (int c = 0; c < nc; ++c) {
    for (int j = 0; j < m; ++j) local[j] = old.at(j, c);
    const Point x = grid.center(c);
    for (int i = 0; i < m; ++i) {
      const double q = spec.source(i, old.time, x, local);
      a.emplace_back(dof(i, c), dof(i, c), vol / dt);
      sys.rhs[dof(i, c)] = vol / dt * old.at(i, c) + vol * q;
      sys.source_integral[i] += vol * q;
    }
  }

  for (const InteriorFace& f : grid.interior_faces()) {
    const double tau = grid.face_area(f.axis) / grid.spacing(f.axis);
    const int lo = f.lower;
    const int hi = f.upper;
    for (int i = 0; i < m; ++i) {
      const double d = tau * spec.delta[i];
      a.emplace_back(dof(i, lo), dof(i, lo), d);
      a.emplace_back(dof(i, lo), dof(i, hi), -d);
      a.emplace_back(dof(i, hi), dof(i, hi), d);
      a.emplace_back(dof(i, hi), dof(i, lo), -d);

      const double t_lo = spec.coupling_coefficient(lag.at(i, lo));
      const double t_hi = spec.coupling_coefficient(lag.at(i, hi));
      for (int j = 0; j < m; ++j) {
        const double k = spec.tensor(i, j).normal(f.axis);
        if (k == 0.0) continue;
        const double w = tau * k * face_coefficient(t_lo, t_hi, lag.at(j, lo), lag.at(j, hi), weighting);
        if (w == 0.0) continue;
        a.emplace_back(dof(i, lo), dof(j, lo), w);
        a.emplace_back(dof(i, lo), dof(j, hi), -w);
        a.emplace_back(dof(i, hi), dof(j, hi), w);
        a.emplace_back(dof(i, hi), dof(j, lo), -w);
      }
    }
  }

  std::vector<double> trace(m);
  for (const BoundaryFace& f : grid.boundary_faces()) {
    const double tau = grid.face_area(f.axis) / (0.5 * grid.spacing(f.axis));
    const int c = f.cell;
    for (int j = 0; j < m; ++j) trace[j] = spec.dirichlet[j](t_new, f.center);
    for (int i = 0; i < m; ++i) {
      const double d = tau * spec.delta[i];
      a.emplace_back(dof(i, c), dof(i, c), d);
      sys.rhs[dof(i, c)] += d * trace[i];
      bnd.emplace_back(i, dof(i, c), d);
      sys.boundary_offset[i] += d * trace[i];

      const double t_cell = spec.coupling_coefficient(lag.at(i, c));
      const double t_trace = spec.coupling_coefficient(trace[i]);
      for (int j = 0; j < m; ++j) {
        const double k = spec.tensor(i, j).normal(f.axis);
        if (k == 0.0) continue;
        const double w = tau * k * face_coefficient(t_cell, t_trace, lag.at(j, c), trace[j], weighting);
        if (w == 0.0) continue;
        a.emplace_back(dof(i, c), dof(j, c), w);
        sys.rhs[dof(i, c)] += w * trace[j];
        bnd.emplace_back(i, dof(j, c), w);
        sys.boundary_offset[i] += w * trace[j];
      }
    }
  }

  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(a.begin(), a.end());
  sys.boundary_matrix.resize(m, n);
  sys.boundary_matrix.setFromTriplets(bnd.begin(), bnd.end());
  return sys;
}

StepOutcome picard_step(const Field& old, double dt, const StepperConfig& cfg, const StepAssembler& assemble,
                        bool lag_dependent, double lin_tol) {
  const int m = old.species;
  Field lag = old;
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(old.values.data(), static_cast<Eigen::Index>(old.values.size()));
  StepOutcome out;
  StepRecord& rec = out.record;
  rec.dt = dt;
  rec.time = old.time + dt;

  AssembledSystem sys;
  for (int sweep = 1; sweep <= cfg.picard_max; ++sweep) {
    sys = assemble(old, lag, dt);
    const LinearSolveStats ls = solve_linear(sys.matrix, sys.rhs, x, lin_tol, cfg.lin_max);
    rec.linear_iterations += ls.iterations;
    rec.linear_residual = ls.residual;
    rec.picard_sweeps = sweep;

    double diff = 0.0;
    double scale = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      diff = std::max(diff, std::abs(x[k] - lag.values[k]));
      scale = std::max(scale, std::abs(x[k]));
    }
    rec.picard_change = scale > 0.0 ? diff / scale : diff;
    std::copy(x.data(), x.data() + x.size(), lag.values.begin());
    if (!lag_dependent || rec.picard_change < cfg.picard_tol) {
      rec.picard_converged = true;
      break;
    }
  }

  out.state = std::move(lag);
  out.state.time = rec.time;
  const Eigen::VectorXd inflow = sys.boundary_offset - sys.boundary_matrix * x;
  rec.source_integral.assign(sys.source_integral.data(), sys.source_integral.data() + m);
  rec.boundary_inflow.assign(inflow.data(), inflow.data() + m);
  rec.balance_scale = dt * std::sqrt(static_cast<double>(x.size())) * sys.rhs.norm();
  return out;
}

SeriesPoint measure_series(const Field& f, const Grid& grid) {
  SeriesPoint p;
  p.time = f.time;
  const double vol = grid.cell_volume();
  for (int i = 0; i < f.species; ++i) {
    const auto u = f.component(i);
    const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    double mass = 0.0;
    for (double v : u) mass += vol * v;
    p.min.push_back(*lo);
    p.max.push_back(*hi);
    p.mass.push_back(mass);
  }
  return p;
}

SimulationResult integrate(Field initial, const Grid& grid, const StepperConfig& cfg, const StepFunction& step,
                           std::vector<std::string> names) {
  cfg.validate();
  SimulationResult result;
  result.names = std::move(names);
  result.lin_tol = cfg.lin_tol;
  initial.time = 0.0;
  result.snapshots.push_back(initial);
  result.series.push_back(measure_series(initial, grid));

  Field state = std::move(initial);
  const int steps = cfg.step_count();
  for (int k = 1; k <= steps; ++k) {
    const double t_old = (k - 1) * cfg.dt;
    const double t_new = std::min(k * cfg.dt, cfg.t_end);
    state.time = t_old;
    StepOutcome outcome;
    try {
      outcome = step(state, t_new - t_old);
    } catch (const SolverFailure& e) {
      throw RunFailure(fmt::format("step to t = {} failed: {}", t_new, e.what()), e.residual(), t_new,
                       std::move(result));
    }
    state = std::move(outcome.state);
    state.time = t_new;
    outcome.record.time = t_new;

    SolverStats& st = result.stats;
    ++st.steps;
    if (!outcome.record.picard_converged) ++st.picard_warnings;
    st.max_picard_sweeps = std::max(st.max_picard_sweeps, outcome.record.picard_sweeps);
    st.linear_iterations += outcome.record.linear_iterations;
    st.max_linear_residual = std::max(st.max_linear_residual, outcome.record.linear_residual);
    result.steps.push_back(std::move(outcome.record));
    result.series.push_back(measure_series(state, grid));
    if (k % cfg.snapshot_every == 0 || k == steps) result.snapshots.push_back(state);
  }
  return result;
}

std::vector<std::string> species_names(int m) {
  std::vector<std::string> names;
  for (int i = 0; i < m; ++i) names.push_back(fmt::format("u{}", i + 1));
  return names;
}

namespace {

StepFunction model_step(const ModelSpec& spec, const Grid& grid, const StepperConfig& cfg) {
  const bool lagged = spec.lag_dependent();
  return [&spec, &grid, cfg, lagged](const Field& old, double dt) {
    StepAssembler assemble = [&](const Field& o, const Field& lag, double h) {
      return assemble_system(spec, grid, o, lag, h, cfg.face_weighting);
    };
    return picard_step(old, dt, cfg, assemble, lagged, cfg.lin_tol);
  };
}

void check_shapes(const Field& f, const ModelSpec& spec, const Grid& grid) {
  if (f.species != spec.species() || f.cells != grid.size() ||
      f.values.size() != static_cast<std::size_t>(f.species) * f.cells)
    throw InvalidParameter("field shape does not match the model and grid");
  const ValidationReport rep = validate_spec(spec, grid);
  for (const auto& v : rep.violations)
    if (v.kind == "shape" || v.kind == "domain mismatch" || v.kind == "ellipticity" ||
        v.kind == "degenerate diffusivity" || v.kind == "negative truncation level")
      throw InvalidParameter(fmt::format("invalid model: {}", v.message));
}

}  // namespace

Field advance_step(const Field& state, const ModelSpec& spec, const Grid& grid, const StepperConfig& cfg) {
  cfg.validate();
  check_shapes(state, spec, grid);
  return model_step(spec, grid, cfg)(state, cfg.dt).state;
}

SimulationResult run_from(const Field& initial, const ModelSpec& spec, const Grid& grid, const StepperConfig& cfg) {
  check_shapes(initial, spec, grid);
  return integrate(initial, grid, cfg, model_step(spec, grid, cfg), species_names(spec.species()));
}

SimulationResult run(const ModelSpec& spec, const Grid& grid, const StepperConfig& cfg) {
  return run_from(initial_field(spec, grid), spec, grid, cfg);
}

BalanceSeries mass_balance_residual(const SimulationResult& result) {
  BalanceSeries out;
  for (std::size_t n = 0; n < result.steps.size(); ++n) {
    const StepRecord& rec = result.steps[n];
    const SeriesPoint& before = result.series[n];
    const SeriesPoint& after = result.series[n + 1];
    std::vector<double> res;
    for (std::size_t i = 0; i < before.mass.size(); ++i) {
      const double expected = rec.dt * (rec.source_integral[i] + rec.boundary_inflow[i]);
      const double r = std::abs(after.mass[i] - before.mass[i] - expected);
      res.push_back(r);
      out.max_residual = std::max(out.max_residual, r);
    }
    const double threshold = 10.0 * result.lin_tol * rec.balance_scale;
    for (double r : res)
      if (r > threshold) out.within_threshold = false;
    out.time.push_back(rec.time);
    out.residual.push_back(std::move(res));
    out.threshold.push_back(threshold);
  }
  return out;
}

ConvergenceTable convergence_study(const std::function<ModelSpec()>& spec_factory, const ExactSolution& exact,
                                   const std::vector<Grid>& grids, const std::vector<double>& dts,
                                   const StepperConfig& base) {
  if (grids.size() != dts.size() || grids.empty())
    throw InvalidParameter("convergence study needs one dt per grid");
  ConvergenceTable table;
  table.rows.resize(grids.size());
  parallel_for(static_cast<int>(grids.size()), [&](int r) {
    const Grid& grid = grids[r];
    const ModelSpec spec = spec_factory();
    StepperConfig cfg = base;
    cfg.dt = dts[r];
    cfg.snapshot_every = std::max(1, cfg.step_count());
    const SimulationResult res = run(spec, grid, cfg);
    const Field& last = res.snapshots.back();
    double linf = 0.0;
    double l2 = 0.0;
    for (int i = 0; i < last.species; ++i)
      for (int c = 0; c < grid.size(); ++c) {
        const double e = std::abs(last.at(i, c) - exact(i, last.time, grid.center(c)));
        linf = std::max(linf, e);
        l2 += grid.cell_volume() * e * e;
      }
    ConvergenceRow& row = table.rows[r];
    row.cells = grid.cells(0);
    row.h = grid.spacing(0);
    row.dt = dts[r];
    row.linf = linf;
    row.l2 = std::sqrt(l2);
  });

  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    ConvergenceRow& row = table.rows[r];
    const ConvergenceRow& prev = table.rows[r - 1];
    if (row.h != prev.h)
      row.ratio = prev.h / row.h;
    else if (row.dt != prev.dt)
      row.ratio = prev.dt / row.dt;
    else
      row.ratio = 1.0;
    if (row.ratio == 1.0) continue;  // nothing was refined; order stays 0
    const double lr = std::log(row.ratio);
    row.order_linf = std::log(prev.linf / row.linf) / lr;
    row.order_l2 = std::log(prev.l2 / row.l2) / lr;
  }
  return table;
}

}  // namespace crossdiff
