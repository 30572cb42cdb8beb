#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "crossdiff/conditions.hpp"
#include "crossdiff/solver.hpp"

namespace crossdiff {

// Sharp-interface aquifer of constant depth h2. Depths are measured downward from the top:
// 0 <= h1 (fresh water table) <= h (salt/fresh interface) <= h2 (impermeable bottom).
struct AquiferSpec {
  Box domain;
  double h2 = 1.0;
  double delta = 0.3;
  double alpha = 0.025;
  double epsilon = 1e-2;
  // Signed fresh-water rate per unit area: positive extracts (pumping), negative recharges.
  std::function<double(double t, const Point& x)> pumping;
  InitialFn initial_h;
  InitialFn initial_h1;
  BoundaryFn dirichlet_h;
  BoundaryFn dirichlet_h1;
};

// Fresh-water thickness below which extraction is throttled, relative to h2.
inline constexpr double kPumpingCutoff = 0.05;

// u1 = h - h1 (fresh thickness), u2 = h2 - h (salt thickness).
std::array<double, 2> map_heads(double h, double h1, double h2);
// h = h2 - u2, h1 = h - u1.
std::array<double, 2> map_species(double u1, double u2, double h2);
// Whole-field versions: heads fields hold (h, h1), species fields hold (u1, u2).
Field heads_to_species(const Field& heads, double h2);
Field species_to_heads(const Field& species, double h2);

// Throws InvalidParameter on non-positive h2/delta/epsilon, failed admissibility, or initial /
// boundary data outside 0 <= h1 <= h <= h2 (boundary sampled at t = 0).
void validate_aquifer(const AquiferSpec& spec, const Grid& grid);

// Fresh-water source of the species system for a given pumping rate and fresh thickness.
double fresh_source(double rate, double u1, double h2);

// The aquifer system written as a generic cross-diffusion model with ell = h2.
ModelSpec to_model_spec(const AquiferSpec& spec);

// Species-form system of one step. With `penalized`, the fresh equation gains the penalty
// flux eps^-1 U0(u2) grad U0(s - h2), linearized on the lagged active set {s > h2}.
AssembledSystem assemble_aquifer_system(const AquiferSpec& spec, const Grid& grid, const Field& old,
                                        const Field& lag, double dt, bool penalized, FaceWeighting weighting);

// One step on heads (h, h1).
Field step_aquifer(const Field& heads, const AquiferSpec& spec, const Grid& grid, const StepperConfig& cfg,
                   bool penalized);

struct ConfinementReport {
  std::vector<double> time;
  std::vector<double> violation;  // int (s - h2)^+ per snapshot
  std::vector<double> residual;   // int |h1| |Q| per snapshot
  std::vector<double> q_faces;    // final snapshot: interior faces, then boundary faces
  std::vector<Point> q_cells;     // final snapshot, face fluxes averaged per axis
};

// Penalty flux through every face (interior first, then boundary), positive along the axis.
std::vector<double> penalty_face_flux(const Field& species, const AquiferSpec& spec, const Grid& grid, double t);

// Violation and residual of every stored snapshot of a species-form run.
ConfinementReport confinement_report(const SimulationResult& species, const AquiferSpec& spec, const Grid& grid);

struct AquiferRun {
  SimulationResult species;  // (u1, u2)
  SimulationResult heads;    // (h, h1)
  ConfinementReport confinement;
};

// Linear tolerance used for a given epsilon: lin_tol * eps once eps < 1e-3.
double penalized_lin_tol(double lin_tol, double epsilon);

SimulationResult heads_result(const SimulationResult& species, const AquiferSpec& spec, const Grid& grid);

AquiferRun run_penalized(const AquiferSpec& spec, const Grid& grid, const StepperConfig& cfg,
                         bool penalized = true);

// Fully saturated aquifer: parabolic interface depth h coupled to an elliptic solve for the
// head Phi at every Picard sweep. Snapshots hold (h, Phi).
SimulationResult run_confined_aquifer(const AquiferSpec& spec, const Grid& grid, const StepperConfig& cfg);

struct KeuleganOptions {
  double h2 = 1.0;
  double delta = 0.3;
  double alpha = 0.025;
  double epsilon = 1e-2;
  double h1_level = 0.1;
  double h_mean = 0.5;
  double relax_time = 0.05;     // decay time of the tilt in the boundary data
  double well_width = 0.05;     // Gaussian width relative to the x extent
  std::optional<Point> well;    // defaults to the cell center nearest the domain midpoint
};

// Inclined interface h = h_mean + tilt (x - x_c), flat h1, Gaussian well.
AquiferSpec keulegan_scenario(const Grid& grid, double pump_rate, double tilt, const KeuleganOptions& opt = {});

Point well_position(const Grid& grid, const KeuleganOptions& opt);

struct ConfinementOptions {
  double h2 = 1.0;
  double delta = 0.3;
  double alpha = 0.025;
  double h1 = 0.15;
  double h = 0.6;
  double recharge = 20.0;
  double width = 0.1;  // Gaussian width relative to the x extent
};

// Flat interfaces with a central recharge strong enough to push s above h2.
AquiferSpec confinement_scenario(const Grid& grid, double epsilon, const ConfinementOptions& opt = {});

// Least-squares slope of h against x over all cells.
double interface_slope(const Field& heads, const Grid& grid);

// Interior cell within `radius` cells (max-norm) of `well` where the salt thickness h2 - h
// exceeds all face neighbors, i.e. the interface is locally highest.
std::optional<int> interface_dome(const Field& heads, const Grid& grid, const Point& well, int radius);

struct SweepRow {
  double epsilon = 0.0;
  bool ok = true;
  std::string message;
  double final_violation = 0.0;
  double final_residual = 0.0;
  double max_violation = 0.0;
  double lin_tol = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double fit_exponent = 0.0;  // slope of log violation against log eps; NaN with fewer than two points
  bool fit_valid = false;
};

SweepReport epsilon_sweep(const AquiferSpec& spec, const Grid& grid, const StepperConfig& cfg,
                          const std::vector<double>& eps_list);

}  // namespace crossdiff
