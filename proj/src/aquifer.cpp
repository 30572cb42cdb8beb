#include "crossdiff/aquifer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "crossdiff/parallel.hpp"

namespace crossdiff {

using Triplet = Eigen::Triplet<double>;

namespace {

double positive_part(double x) { return std::max(0.0, x); }

// Cross coefficient of species j in the equation of species i (same for both axes).
double aquifer_kappa(const AquiferSpec& spec, int i, int j) {
  return (i == 1 && j == 1) ? 1.0 : 1.0 - spec.alpha;
}

std::array<double, 2> species_trace(const AquiferSpec& spec, double t, const Point& x) {
  return map_heads(spec.dirichlet_h(t, x), spec.dirichlet_h1(t, x), spec.h2);
}

double pumping_rate(const AquiferSpec& spec, double t, const Point& x) {
  return spec.pumping ? spec.pumping(t, x) : 0.0;
}

}  // namespace

std::array<double, 2> map_heads(double h, double h1, double h2) { return {h - h1, h2 - h}; }

std::array<double, 2> map_species(double u1, double u2, double h2) {
  const double h = h2 - u2;
  return {h, h - u1};
}

Field heads_to_species(const Field& heads, double h2) {
  Field s(2, heads.cells, heads.time);
  for (int c = 0; c < heads.cells; ++c) {
    const auto u = map_heads(heads.at(0, c), heads.at(1, c), h2);
    s.at(0, c) = u[0];
    s.at(1, c) = u[1];
  }
  return s;
}

Field species_to_heads(const Field& species, double h2) {
  Field h(2, species.cells, species.time);
  for (int c = 0; c < species.cells; ++c) {
    const auto d = map_species(species.at(0, c), species.at(1, c), h2);
    h.at(0, c) = d[0];
    h.at(1, c) = d[1];
  }
  return h;
}

void validate_aquifer(const AquiferSpec& spec, const Grid& grid) {
  if (!(spec.h2 > 0.0)) throw InvalidParameter(fmt::format("aquifer depth must be positive, got {}", spec.h2));
  if (!(spec.delta > 0.0)) throw InvalidParameter(fmt::format("delta must be positive, got {}", spec.delta));
  if (!(spec.alpha > 0.0)) throw InvalidParameter(fmt::format("alpha must be positive, got {}", spec.alpha));
  if (!(spec.epsilon > 0.0)) throw InvalidParameter(fmt::format("epsilon must be positive, got {}", spec.epsilon));
  if (!spec.initial_h || !spec.initial_h1 || !spec.dirichlet_h || !spec.dirichlet_h1)
    throw InvalidParameter("aquifer initial and boundary data are required");
  if (!(spec.domain == grid.box())) throw InvalidParameter("grid box differs from the aquifer domain");
  const ConditionReport adm = check_aquifer_admissibility(spec.h2, spec.delta, spec.alpha);
  if (!adm.pass)
    throw InvalidParameter(fmt::format("aquifer parameters not admissible: {} !< {}", adm.lhs, adm.rhs));

  auto check = [&](double h, double h1, const Point& x, const char* what) {
    if (!(0.0 <= h1 && h1 <= h && h <= spec.h2))
      throw InvalidParameter(fmt::format("{} violates 0 <= h1 <= h <= h2 at ({}, {}): h1 = {}, h = {}, h2 = {}",
                                         what, x[0], x[1], h1, h, spec.h2));
  };
  for (int c = 0; c < grid.size(); ++c) {
    const Point x = grid.center(c);
    check(spec.initial_h(x), spec.initial_h1(x), x, "initial data");
  }
  for (const auto& f : grid.boundary_faces()) check(spec.dirichlet_h(0.0, f.center), spec.dirichlet_h1(0.0, f.center), f.center, "boundary data");
}

double fresh_source(double rate, double u1, double h2) {
  if (rate <= 0.0) return -rate;
  return -rate * std::min(1.0, positive_part(u1) / (kPumpingCutoff * h2));
}

ModelSpec to_model_spec(const AquiferSpec& spec) {
  ModelSpec m;
  m.domain = spec.domain;
  const int dim = spec.domain.dim;
  m.delta = {spec.delta, spec.delta};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.K.push_back(CrossTensor::isotropic(dim, aquifer_kappa(spec, i, j)));
  m.ell = spec.h2;
  m.coupling = Coupling::truncated;
  const double h2 = spec.h2;
  auto pump = spec.pumping;
  m.sources = {[pump, h2](double t, const Point& x, std::span<const double> u) {
                 return fresh_source(pump ? pump(t, x) : 0.0, u[0], h2);
               },
               SourceFn{}};
  auto dh = spec.dirichlet_h;
  auto dh1 = spec.dirichlet_h1;
  auto ih = spec.initial_h;
  auto ih1 = spec.initial_h1;
  m.dirichlet = {[dh, dh1](double t, const Point& x) { return dh(t, x) - dh1(t, x); },
                 [dh, h2](double t, const Point& x) { return h2 - dh(t, x); }};
  m.initial = {[ih, ih1](const Point& x) { return ih(x) - ih1(x); },
               [ih, h2](const Point& x) { return h2 - ih(x); }};
  return m;
}

AssembledSystem assemble_aquifer_system(const AquiferSpec& spec, const Grid& grid, const Field& old,
                                        const Field& lag, double dt, bool penalized, FaceWeighting weighting) {
  const int nc = grid.size();
  const int n = 2 * nc;
  const double vol = grid.cell_volume();
  const double t_new = old.time + dt;
  const double h2 = spec.h2;
  auto dof = [nc](int i, int c) { return i * nc + c; };
  auto coeff = [h2](double u) { return std::clamp(u, 0.0, h2); };

  std::vector<Triplet> a;
  std::vector<Triplet> bnd;
  AssembledSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(n);
  sys.boundary_offset = Eigen::VectorXd::Zero(2);
  sys.source_integral = Eigen::VectorXd::Zero(2);

  for (int c = 0; c < nc; ++c) {
    const double q = fresh_source(pumping_rate(spec, old.time, grid.center(c)), old.at(0, c), h2);
    for (int i = 0; i < 2; ++i) {
      a.emplace_back(dof(i, c), dof(i, c), vol / dt);
      sys.rhs[dof(i, c)] = vol / dt * old.at(i, c);
    }
    sys.rhs[dof(0, c)] += vol * q;
    sys.source_integral[0] += vol * q;
  }

  // Lagged penalty potential P = a (s - h2) with the active set a = [s > h2].
  std::vector<double> active(nc, 0.0);
  std::vector<double> potential(nc, 0.0);
  if (penalized) {
    for (int c = 0; c < nc; ++c) {
      const double s = lag.at(0, c) + lag.at(1, c);
      if (s > h2) {
        active[c] = 1.0;
        potential[c] = s - h2;
      }
    }
  }
  const double inv_eps = 1.0 / spec.epsilon;

  for (const InteriorFace& f : grid.interior_faces()) {
    const double tau = grid.face_area(f.axis) / grid.spacing(f.axis);
    const int lo = f.lower;
    const int hi = f.upper;
    for (int i = 0; i < 2; ++i) {
      const double d = tau * spec.delta;
      a.emplace_back(dof(i, lo), dof(i, lo), d);
      a.emplace_back(dof(i, lo), dof(i, hi), -d);
      a.emplace_back(dof(i, hi), dof(i, hi), d);
      a.emplace_back(dof(i, hi), dof(i, lo), -d);
      const double c_lo = coeff(lag.at(i, lo));
      const double c_hi = coeff(lag.at(i, hi));
      for (int j = 0; j < 2; ++j) {
        const double w = tau * aquifer_kappa(spec, i, j) *
                         face_coefficient(c_lo, c_hi, lag.at(j, lo), lag.at(j, hi), weighting);
        if (w == 0.0) continue;
        a.emplace_back(dof(i, lo), dof(j, lo), w);
        a.emplace_back(dof(i, lo), dof(j, hi), -w);
        a.emplace_back(dof(i, hi), dof(j, hi), w);
        a.emplace_back(dof(i, hi), dof(j, lo), -w);
      }
    }
    if (active[lo] == 0.0 && active[hi] == 0.0) continue;
    const double w = tau * inv_eps *
                     face_coefficient(positive_part(lag.at(1, lo)), positive_part(lag.at(1, hi)), potential[lo],
                                      potential[hi], FaceWeighting::upwind);
    if (w == 0.0) continue;
    // Row lo gets w (P_lo - P_hi), row hi the opposite.
    for (int j = 0; j < 2; ++j) {
      a.emplace_back(dof(0, lo), dof(j, lo), w * active[lo]);
      a.emplace_back(dof(0, lo), dof(j, hi), -w * active[hi]);
      a.emplace_back(dof(0, hi), dof(j, hi), w * active[hi]);
      a.emplace_back(dof(0, hi), dof(j, lo), -w * active[lo]);
    }
    sys.rhs[dof(0, lo)] += w * (active[lo] - active[hi]) * h2;
    sys.rhs[dof(0, hi)] += w * (active[hi] - active[lo]) * h2;
  }

  for (const BoundaryFace& f : grid.boundary_faces()) {
    const double tau = grid.face_area(f.axis) / (0.5 * grid.spacing(f.axis));
    const int c = f.cell;
    const auto trace = species_trace(spec, t_new, f.center);
    for (int i = 0; i < 2; ++i) {
      const double d = tau * spec.delta;
      a.emplace_back(dof(i, c), dof(i, c), d);
      sys.rhs[dof(i, c)] += d * trace[i];
      bnd.emplace_back(i, dof(i, c), d);
      sys.boundary_offset[i] += d * trace[i];
      const double c_cell = coeff(lag.at(i, c));
      const double c_trace = coeff(trace[i]);
      for (int j = 0; j < 2; ++j) {
        const double w = tau * aquifer_kappa(spec, i, j) *
                         face_coefficient(c_cell, c_trace, lag.at(j, c), trace[j], weighting);
        if (w == 0.0) continue;
        a.emplace_back(dof(i, c), dof(j, c), w);
        sys.rhs[dof(i, c)] += w * trace[j];
        bnd.emplace_back(i, dof(j, c), w);
        sys.boundary_offset[i] += w * trace[j];
      }
    }
    if (!penalized) continue;
    const double p_trace = positive_part(trace[0] + trace[1] - h2);
    if (active[c] == 0.0 && p_trace == 0.0) continue;
    const double w = tau * inv_eps *
                     face_coefficient(positive_part(lag.at(1, c)), positive_part(trace[1]), potential[c], p_trace,
                                      FaceWeighting::upwind);
    if (w == 0.0) continue;
    for (int j = 0; j < 2; ++j) {
      a.emplace_back(dof(0, c), dof(j, c), w * active[c]);
      bnd.emplace_back(0, dof(j, c), w * active[c]);
    }
    const double offset = w * (active[c] * h2 + p_trace);
    sys.rhs[dof(0, c)] += offset;
    sys.boundary_offset[0] += offset;
  }

  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(a.begin(), a.end());
  sys.boundary_matrix.resize(2, n);
  sys.boundary_matrix.setFromTriplets(bnd.begin(), bnd.end());
  return sys;
}

namespace {

StepFunction aquifer_step(const AquiferSpec& spec, const Grid& grid, const StepperConfig& cfg, bool penalized,
                          double lin_tol) {
  return [&spec, &grid, cfg, penalized, lin_tol](const Field& old, double dt) {
    StepAssembler assemble = [&](const Field& o, const Field& lag, double h) {
      return assemble_aquifer_system(spec, grid, o, lag, h, penalized, cfg.face_weighting);
    };
    return picard_step(old, dt, cfg, assemble, true, lin_tol);
  };
}

}  // namespace

Field step_aquifer(const Field& heads, const AquiferSpec& spec, const Grid& grid, const StepperConfig& cfg,
                   bool penalized) {
  cfg.validate();
  validate_aquifer(spec, grid);
  const Field species = heads_to_species(heads, spec.h2);
  const double tol = penalized ? penalized_lin_tol(cfg.lin_tol, spec.epsilon) : cfg.lin_tol;
  const StepOutcome out = aquifer_step(spec, grid, cfg, penalized, tol)(species, cfg.dt);
  return species_to_heads(out.state, spec.h2);
}

std::vector<double> penalty_face_flux(const Field& species, const AquiferSpec& spec, const Grid& grid, double t) {
  const int nc = grid.size();
  const double h2 = spec.h2;
  std::vector<double> p(nc);
  for (int c = 0; c < nc; ++c) p[c] = positive_part(species.at(0, c) + species.at(1, c) - h2);
  std::vector<double> flux;
  flux.reserve(grid.interior_faces().size() + grid.boundary_faces().size());
  for (const InteriorFace& f : grid.interior_faces()) {
    const double c = face_coefficient(positive_part(species.at(1, f.lower)), positive_part(species.at(1, f.upper)),
                                      p[f.lower], p[f.upper], FaceWeighting::upwind);
    flux.push_back(c / spec.epsilon * (p[f.lower] - p[f.upper]) / grid.spacing(f.axis));
  }
  for (const BoundaryFace& f : grid.boundary_faces()) {
    const auto trace = species_trace(spec, t, f.center);
    const double pd = positive_part(trace[0] + trace[1] - h2);
    const double c = face_coefficient(positive_part(species.at(1, f.cell)), positive_part(trace[1]), p[f.cell], pd,
                                      FaceWeighting::upwind);
    // Outward gradient times the side gives the flux along the axis.
    const double outward = c / spec.epsilon * (p[f.cell] - pd) / (0.5 * grid.spacing(f.axis));
    flux.push_back(f.side > 0 ? outward : -outward);
  }
  return flux;
}

namespace {

std::vector<Point> average_to_cells(const std::vector<double>& flux, const Grid& grid) {
  std::vector<Point> sum(grid.size(), Point{0.0, 0.0});
  std::vector<std::array<int, 2>> count(grid.size(), {0, 0});
  std::size_t k = 0;
  for (const InteriorFace& f : grid.interior_faces()) {
    for (int c : {f.lower, f.upper}) {
      sum[c][f.axis] += flux[k];
      ++count[c][f.axis];
    }
    ++k;
  }
  for (const BoundaryFace& f : grid.boundary_faces()) {
    sum[f.cell][f.axis] += flux[k++];
    ++count[f.cell][f.axis];
  }
  for (int c = 0; c < grid.size(); ++c)
    for (int a = 0; a < 2; ++a)
      if (count[c][a] > 0) sum[c][a] /= count[c][a];
  return sum;
}

}  // namespace

double penalized_lin_tol(double lin_tol, double epsilon) { return epsilon < 1e-3 ? lin_tol * epsilon : lin_tol; }

ConfinementReport confinement_report(const SimulationResult& species, const AquiferSpec& spec, const Grid& grid) {
  ConfinementReport rep;
  const double vol = grid.cell_volume();
  for (const Field& f : species.snapshots) {
    const std::vector<double> flux = penalty_face_flux(f, spec, grid, f.time);
    const std::vector<Point> q = average_to_cells(flux, grid);
    double violation = 0.0;
    double residual = 0.0;
    for (int c = 0; c < grid.size(); ++c) {
      const double s = f.at(0, c) + f.at(1, c);
      violation += vol * positive_part(s - spec.h2);
      residual += vol * std::abs(spec.h2 - s) * std::hypot(q[c][0], q[c][1]);
    }
    rep.time.push_back(f.time);
    rep.violation.push_back(violation);
    rep.residual.push_back(residual);
    rep.q_faces = flux;
    rep.q_cells = q;
  }
  return rep;
}

SimulationResult heads_result(const SimulationResult& species, const AquiferSpec& spec, const Grid& grid) {
  SimulationResult heads;
  heads.names = {"h", "h1"};
  heads.lin_tol = species.lin_tol;
  heads.steps = species.steps;
  heads.stats = species.stats;
  for (const Field& f : species.snapshots) {
    heads.snapshots.push_back(species_to_heads(f, spec.h2));
    heads.series.push_back(measure_series(heads.snapshots.back(), grid));
  }
  return heads;
}

AquiferRun run_penalized(const AquiferSpec& spec, const Grid& grid, const StepperConfig& cfg, bool penalized) {
  cfg.validate();
  validate_aquifer(spec, grid);
  const double tol = penalized ? penalized_lin_tol(cfg.lin_tol, spec.epsilon) : cfg.lin_tol;
  StepperConfig run_cfg = cfg;
  run_cfg.lin_tol = tol;

  Field initial(2, grid.size(), 0.0);
  for (int c = 0; c < grid.size(); ++c) {
    const Point x = grid.center(c);
    const auto u = map_heads(spec.initial_h(x), spec.initial_h1(x), spec.h2);
    initial.at(0, c) = u[0];
    initial.at(1, c) = u[1];
  }

  AquiferRun out;
  out.species = integrate(initial, grid, run_cfg, aquifer_step(spec, grid, run_cfg, penalized, tol), {"u1", "u2"});
  out.heads = heads_result(out.species, spec, grid);
  out.confinement = confinement_report(out.species, spec, grid);
  return out;
}

namespace {

// Face value of the lagged salt thickness U0(h2 - h).
double salt_face(double h_a, double h_b, double h2) {
  return 0.5 * (positive_part(h2 - h_a) + positive_part(h2 - h_b));
}

// -(1 - alpha) div(h2 grad Phi) - alpha div((h2 - h) grad h) = pumping, Phi = h1 on the boundary.
Eigen::VectorXd solve_head(const AquiferSpec& spec, const Grid& grid, const std::vector<double>& h, double t,
                           const Eigen::VectorXd& guess, double lin_tol, int lin_max) {
  const int nc = grid.size();
  const double vol = grid.cell_volume();
  const double k = (1.0 - spec.alpha) * spec.h2;
  std::vector<Triplet> a;
  Eigen::VectorXd rhs(nc);
  for (int c = 0; c < nc; ++c) rhs[c] = vol * pumping_rate(spec, t, grid.center(c));
  for (const InteriorFace& f : grid.interior_faces()) {
    const double tau = grid.face_area(f.axis) / grid.spacing(f.axis);
    a.emplace_back(f.lower, f.lower, tau * k);
    a.emplace_back(f.lower, f.upper, -tau * k);
    a.emplace_back(f.upper, f.upper, tau * k);
    a.emplace_back(f.upper, f.lower, -tau * k);
    const double flux = tau * spec.alpha * salt_face(h[f.lower], h[f.upper], spec.h2) * (h[f.lower] - h[f.upper]);
    rhs[f.lower] -= flux;
    rhs[f.upper] += flux;
  }
  for (const BoundaryFace& f : grid.boundary_faces()) {
    const double tau = grid.face_area(f.axis) / (0.5 * grid.spacing(f.axis));
    const double hd = spec.dirichlet_h(t, f.center);
    a.emplace_back(f.cell, f.cell, tau * k);
    rhs[f.cell] += tau * k * spec.dirichlet_h1(t, f.center);
    rhs[f.cell] -= tau * spec.alpha * salt_face(h[f.cell], hd, spec.h2) * (h[f.cell] - hd);
  }
  SparseMatrix m(nc, nc);
  m.setFromTriplets(a.begin(), a.end());
  Eigen::VectorXd phi = guess;
  try {
    solve_linear(m, rhs, phi, lin_tol, lin_max);
  } catch (const SolverFailure& e) {
    throw EllipticSolveFailure(fmt::format("head solve failed: {}", e.what()), e.residual(), t);
  }
  return phi;
}

}  // namespace

SimulationResult run_confined_aquifer(const AquiferSpec& spec, const Grid& grid, const StepperConfig& cfg) {
  cfg.validate();
  validate_aquifer(spec, grid);
  const int nc = grid.size();
  const double vol = grid.cell_volume();

  Field initial(2, nc, 0.0);
  std::vector<double> h0(nc);
  for (int c = 0; c < nc; ++c) h0[c] = spec.initial_h(grid.center(c));
  const Eigen::VectorXd phi0 = solve_head(spec, grid, h0, 0.0, Eigen::VectorXd::Zero(nc), cfg.lin_tol, cfg.lin_max);
  for (int c = 0; c < nc; ++c) {
    initial.at(0, c) = h0[c];
    initial.at(1, c) = phi0[c];
  }

  StepFunction step = [&](const Field& old, double dt) {
    const double t_new = old.time + dt;
    StepOutcome out;
    StepRecord& rec = out.record;
    rec.dt = dt;
    rec.time = t_new;
    std::vector<double> h_lag(old.component(0).begin(), old.component(0).end());
    Eigen::VectorXd phi = Eigen::Map<const Eigen::VectorXd>(old.component(1).data(), nc);
    Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(h_lag.data(), nc);

    for (int sweep = 1; sweep <= cfg.picard_max; ++sweep) {
      phi = solve_head(spec, grid, h_lag, t_new, phi, cfg.lin_tol, cfg.lin_max);

      std::vector<Triplet> a;
      Eigen::VectorXd rhs(nc);
      for (int c = 0; c < nc; ++c) {
        a.emplace_back(c, c, vol / dt);
        rhs[c] = vol / dt * old.at(0, c);
      }
      for (const InteriorFace& f : grid.interior_faces()) {
        const double tau = grid.face_area(f.axis) / grid.spacing(f.axis);
        const double salt = salt_face(h_lag[f.lower], h_lag[f.upper], spec.h2);
        const double d = tau * (spec.delta + spec.alpha * salt);
        a.emplace_back(f.lower, f.lower, d);
        a.emplace_back(f.lower, f.upper, -d);
        a.emplace_back(f.upper, f.upper, d);
        a.emplace_back(f.upper, f.lower, -d);
        const double flux = tau * (1.0 - spec.alpha) * salt * (phi[f.lower] - phi[f.upper]);
        rhs[f.lower] -= flux;
        rhs[f.upper] += flux;
      }
      for (const BoundaryFace& f : grid.boundary_faces()) {
        const double tau = grid.face_area(f.axis) / (0.5 * grid.spacing(f.axis));
        const double hd = spec.dirichlet_h(t_new, f.center);
        const double salt = salt_face(h_lag[f.cell], hd, spec.h2);
        const double d = tau * (spec.delta + spec.alpha * salt);
        a.emplace_back(f.cell, f.cell, d);
        rhs[f.cell] += d * hd;
        rhs[f.cell] -= tau * (1.0 - spec.alpha) * salt * (phi[f.cell] - spec.dirichlet_h1(t_new, f.center));
      }
      SparseMatrix m(nc, nc);
      m.setFromTriplets(a.begin(), a.end());
      const LinearSolveStats ls = solve_linear(m, rhs, h, cfg.lin_tol, cfg.lin_max);
      rec.linear_iterations += ls.iterations;
      rec.linear_residual = ls.residual;
      rec.picard_sweeps = sweep;

      double diff = 0.0;
      double scale = 0.0;
      for (int c = 0; c < nc; ++c) {
        diff = std::max(diff, std::abs(h[c] - h_lag[c]));
        scale = std::max(scale, std::abs(h[c]));
      }
      rec.picard_change = scale > 0.0 ? diff / scale : diff;
      std::copy(h.data(), h.data() + nc, h_lag.begin());
      if (rec.picard_change < cfg.picard_tol) {
        rec.picard_converged = true;
        break;
      }
    }
    out.state = Field(2, nc, t_new);
    for (int c = 0; c < nc; ++c) {
      out.state.at(0, c) = h[c];
      out.state.at(1, c) = phi[c];
    }
    rec.source_integral = {0.0, 0.0};
    rec.boundary_inflow = {0.0, 0.0};
    return out;
  };
  return integrate(initial, grid, cfg, step, {"h", "phi"});
}

Point well_position(const Grid& grid, const KeuleganOptions& opt) {
  if (opt.well) return *opt.well;
  // Center of the cell holding the domain midpoint, so the well is not split between cells.
  const Box& b = grid.box();
  const int ix = std::min(grid.cells(0) - 1, grid.cells(0) / 2);
  const int iy = b.dim == 2 ? std::min(grid.cells(1) - 1, grid.cells(1) / 2) : 0;
  return grid.center(grid.index(ix, iy));
}

namespace {

std::function<double(double, const Point&)> gaussian(double amplitude, Point center, double sigma, int dim) {
  return [=](double, const Point& x) {
    const double dx = x[0] - center[0];
    const double dy = dim == 2 ? x[1] - center[1] : 0.0;
    return amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
  };
}

}  // namespace

AquiferSpec keulegan_scenario(const Grid& grid, double pump_rate, double tilt, const KeuleganOptions& opt) {
  const Box& box = grid.box();
  const double xc = 0.5 * (box.lower[0] + box.upper[0]);
  const double half = 0.5 * box.extent(0);
  const double h_lo = opt.h_mean - std::abs(tilt) * half;
  const double h_hi = opt.h_mean + std::abs(tilt) * half;
  if (!(opt.h1_level >= 0.0 && h_lo >= opt.h1_level && h_hi <= opt.h2))
    throw InvalidParameter(fmt::format("tilt {} gives interface depths [{}, {}] outside [h1 = {}, h2 = {}]", tilt,
                                       h_lo, h_hi, opt.h1_level, opt.h2));

  AquiferSpec s;
  s.domain = box;
  s.h2 = opt.h2;
  s.delta = opt.delta;
  s.alpha = opt.alpha;
  s.epsilon = opt.epsilon;
  const double mean = opt.h_mean;
  const double level = opt.h1_level;
  const double relax = opt.relax_time;
  s.initial_h = [=](const Point& x) { return mean + tilt * (x[0] - xc); };
  s.initial_h1 = [=](const Point&) { return level; };
  s.dirichlet_h = [=](double t, const Point& x) { return mean + tilt * (x[0] - xc) * std::exp(-t / relax); };
  s.dirichlet_h1 = [=](double, const Point&) { return level; };
  if (pump_rate != 0.0)
    s.pumping = gaussian(pump_rate, well_position(grid, opt), opt.well_width * box.extent(0), box.dim);
  return s;
}

AquiferSpec confinement_scenario(const Grid& grid, double epsilon, const ConfinementOptions& opt) {
  const Box& box = grid.box();
  AquiferSpec s;
  s.domain = box;
  s.h2 = opt.h2;
  s.delta = opt.delta;
  s.alpha = opt.alpha;
  s.epsilon = epsilon;
  const double h = opt.h;
  const double h1 = opt.h1;
  s.initial_h = [=](const Point&) { return h; };
  s.initial_h1 = [=](const Point&) { return h1; };
  s.dirichlet_h = [=](double, const Point&) { return h; };
  s.dirichlet_h1 = [=](double, const Point&) { return h1; };
  const Point center{0.5 * (box.lower[0] + box.upper[0]), box.dim == 2 ? 0.5 * (box.lower[1] + box.upper[1]) : 0.0};
  s.pumping = gaussian(-opt.recharge, center, opt.width * box.extent(0), box.dim);
  return s;
}

double interface_slope(const Field& heads, const Grid& grid) {
  double sx = 0.0, sh = 0.0, sxx = 0.0, sxh = 0.0;
  const double n = grid.size();
  for (int c = 0; c < grid.size(); ++c) {
    const double x = grid.center(c)[0];
    const double h = heads.at(0, c);
    sx += x;
    sh += h;
    sxx += x * x;
    sxh += x * h;
  }
  const double denom = n * sxx - sx * sx;
  return denom > 0.0 ? (n * sxh - sx * sh) / denom : 0.0;
}

std::optional<int> interface_dome(const Field& heads, const Grid& grid, const Point& well, int radius) {
  int well_cell = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int c = 0; c < grid.size(); ++c) {
    const Point x = grid.center(c);
    const double d = std::hypot(x[0] - well[0], x[1] - well[1]);
    if (d < best) {
      best = d;
      well_cell = c;
    }
  }
  const auto w = grid.coords(well_cell);
  std::optional<int> found;
  double top = std::numeric_limits<double>::infinity();
  for (int c = 0; c < grid.size(); ++c) {
    const auto ij = grid.coords(c);
    if (std::abs(ij[0] - w[0]) > radius || std::abs(ij[1] - w[1]) > radius) continue;
    bool interior = true;
    bool peak = true;
    for (int a = 0; a < grid.dim(); ++a)
      for (int step : {-1, 1}) {
        auto nb = ij;
        nb[a] += step;
        if (nb[a] < 0 || nb[a] >= grid.cells(a)) {
          interior = false;
          continue;
        }
        if (!(heads.at(0, c) < heads.at(0, grid.index(nb[0], nb[1])))) peak = false;
      }
    // Shallowest interface depth is the highest salt thickness.
    if (interior && peak && heads.at(0, c) < top) {
      top = heads.at(0, c);
      found = c;
    }
  }
  return found;
}

SweepReport epsilon_sweep(const AquiferSpec& spec, const Grid& grid, const StepperConfig& cfg,
                          const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw InvalidParameter("epsilon list is empty");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0)) throw InvalidParameter("epsilon values must be positive");
    if (k > 0 && !(eps_list[k] < eps_list[k - 1])) throw InvalidParameter("epsilon list must be strictly decreasing");
  }
  SweepReport rep;
  rep.rows.resize(eps_list.size());
  parallel_for(static_cast<int>(eps_list.size()), [&](int k) {
    AquiferSpec s = spec;
    s.epsilon = eps_list[k];
    SweepRow& row = rep.rows[k];
    row.epsilon = eps_list[k];
    row.lin_tol = penalized_lin_tol(cfg.lin_tol, s.epsilon);
    auto fill = [&row](const ConfinementReport& c) {
      if (c.violation.empty()) return;
      row.final_violation = c.violation.back();
      row.final_residual = c.residual.back();
      row.max_violation = *std::max_element(c.violation.begin(), c.violation.end());
    };
    try {
      fill(run_penalized(s, grid, cfg).confinement);
    } catch (const RunFailure& e) {
      row.ok = false;
      row.message = e.what();
      fill(confinement_report(e.partial(), s, grid));
    }
  });

  std::vector<double> lx, ly;
  for (const SweepRow& r : rep.rows)
    if (r.ok && r.final_violation > 0.0) {
      lx.push_back(std::log(r.epsilon));
      ly.push_back(std::log(r.final_violation));
    }
  rep.fit_exponent = std::numeric_limits<double>::quiet_NaN();
  if (lx.size() >= 2) {
    const double n = lx.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sx += lx[k];
      sy += ly[k];
      sxx += lx[k] * lx[k];
      sxy += lx[k] * ly[k];
    }
    rep.fit_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.fit_valid = true;
  }
  return rep;
}

}  // namespace crossdiff
