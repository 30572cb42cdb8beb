#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "crossdiff/errors.hpp"
#include "crossdiff/grid.hpp"
#include "crossdiff/linear_solver.hpp"
#include "crossdiff/model.hpp"

namespace crossdiff {

// How the lagged cross coefficient T_ell(u_i) is carried to a face.
enum class FaceWeighting {
  upwind,     // value on the side the transport comes from
  arithmetic  // mean of the two sides
};

struct StepperConfig {
  double dt = 1e-3;
  double t_end = 0.1;
  double picard_tol = 1e-8;
  int picard_max = 2;
  double lin_tol = 1e-10;
  int lin_max = 2000;
  int snapshot_every = 1;
  FaceWeighting face_weighting = FaceWeighting::upwind;

  void validate() const;
  int step_count() const;
};

// Linear system of one backward-Euler sweep, rows scaled by cell volume.
// Net boundary inflow of species i is boundary_offset[i] - (boundary_matrix * u)[i].
struct AssembledSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  SparseMatrix boundary_matrix;
  Eigen::VectorXd boundary_offset;
  Eigen::VectorXd source_integral;  // sum over cells of V Q_i
};

// Upwind or averaged face value of a lagged coefficient. Transport runs down the gradient
// of `driver`, so the upwind side is the one with the larger driver value.
double face_coefficient(double coeff_a, double coeff_b, double driver_a, double driver_b, FaceWeighting w);

AssembledSystem assemble_system(const ModelSpec& spec, const Grid& grid, const Field& old, const Field& lag,
                                double dt, FaceWeighting weighting);

struct StepRecord {
  double time = 0.0;  // end of the step
  double dt = 0.0;
  int picard_sweeps = 0;
  bool picard_converged = false;
  double picard_change = 0.0;
  int linear_iterations = 0;
  double linear_residual = 0.0;
  std::vector<double> source_integral;
  std::vector<double> boundary_inflow;
  double balance_scale = 0.0;  // dt sqrt(n) ||rhs||, bounds the discrete balance defect per unit lin_tol
};

struct SeriesPoint {
  double time = 0.0;
  std::vector<double> min;
  std::vector<double> max;
  std::vector<double> mass;
};

struct SolverStats {
  int steps = 0;
  int picard_warnings = 0;
  int max_picard_sweeps = 0;
  long linear_iterations = 0;
  double max_linear_residual = 0.0;
};

struct SimulationResult {
  std::vector<std::string> names;
  std::vector<Field> snapshots;
  std::vector<SeriesPoint> series;  // every time level, starting at t = 0
  std::vector<StepRecord> steps;
  SolverStats stats;
  double lin_tol = 0.0;
};

SeriesPoint measure_series(const Field& f, const Grid& grid);

// A step error carrying the trajectory computed before the failure.
class RunFailure : public SolverFailure {
 public:
  RunFailure(const std::string& what, double residual, double time, SimulationResult partial)
      : SolverFailure(what, residual, time), partial_(std::make_shared<SimulationResult>(std::move(partial))) {}
  const SimulationResult& partial() const { return *partial_; }

 private:
  std::shared_ptr<SimulationResult> partial_;
};

struct StepOutcome {
  Field state;
  StepRecord record;
};

using StepAssembler = std::function<AssembledSystem(const Field& old, const Field& lag, double dt)>;
using StepFunction = std::function<StepOutcome(const Field& old, double dt)>;

// Backward-Euler step with Picard sweeps on the lagged coefficients.
StepOutcome picard_step(const Field& old, double dt, const StepperConfig& cfg, const StepAssembler& assemble,
                        bool lag_dependent, double lin_tol);

// Time loop shared by all models: snapshots, series and step records.
SimulationResult integrate(Field initial, const Grid& grid, const StepperConfig& cfg, const StepFunction& step,
                           std::vector<std::string> names);

Field advance_step(const Field& state, const ModelSpec& spec, const Grid& grid, const StepperConfig& cfg);
SimulationResult run(const ModelSpec& spec, const Grid& grid, const StepperConfig& cfg);
SimulationResult run_from(const Field& initial, const ModelSpec& spec, const Grid& grid, const StepperConfig& cfg);

std::vector<std::string> species_names(int m);

struct BalanceSeries {
  std::vector<double> time;
  std::vector<std::vector<double>> residual;  // [step][species]
  std::vector<double> threshold;              // 10 lin_tol scale per step
  double max_residual = 0.0;
  bool within_threshold = true;
};

// |int u^{n+1} - int u^n - dt (int Q + boundary inflow)| per step, from the scheme's own fluxes.
BalanceSeries mass_balance_residual(const SimulationResult& result);

using ExactSolution = std::function<double(int species, double t, const Point& x)>;

struct ConvergenceRow {
  int cells = 0;
  double h = 0.0;
  double dt = 0.0;
  double linf = 0.0;
  double l2 = 0.0;
  double ratio = 1.0;  // refinement ratio to the previous row, 1 for the first
  double order_linf = 0.0;
  double order_l2 = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
};

// Runs each (grid, dt) pair to base.t_end and compares with the exact solution at cell
// centers. The refinement ratio is the spacing ratio when the grid changes, else the dt ratio.
ConvergenceTable convergence_study(const std::function<ModelSpec()>& spec_factory, const ExactSolution& exact,
                                   const std::vector<Grid>& grids, const std::vector<double>& dts,
                                   const StepperConfig& base);

}  // namespace crossdiff
