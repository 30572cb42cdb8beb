#pragma once

#include <string>
#include <vector>

#include "crossdiff/conditions.hpp"
#include "crossdiff/solver.hpp"

namespace crossdiff {

// Time weight of each stored snapshot: snapshot j >= 1 stands for the slab (t_{j-1}, t_j],
// the initial snapshot carries no weight. The weights sum to the final time.
std::vector<double> snapshot_weights(const SimulationResult& result);

// Space-time measure of {u_i > k} under snapshot-slab quadrature.
double level_set_measure(const SimulationResult& result, const Grid& grid, int species, double k);

struct LevelSetProfile {
  std::vector<double> levels;
  std::vector<std::vector<double>> measures;  // [species][level]
};

LevelSetProfile level_set_profile(const SimulationResult& result, const Grid& grid, std::vector<double> levels);

// k_n = m ell0 (1 + m' - 2^-n).
double degiorgi_level(int n, double ell0, double m_factor, double m_prime);
// First n with k_n >= m ell0.
int degiorgi_first_index(double m_prime);

struct DeGiorgiTrace {
  std::string species;
  std::vector<double> k;
  std::vector<double> v;
  std::vector<double> recursion_rhs;
  std::vector<bool> holds;  // v_{n+1} <= recursion_rhs[n]
  int n0 = 0;
};

DeGiorgiTrace degiorgi_trace(const SimulationResult& result, const Grid& grid, int species, double ell0,
                             double m_factor, double m_prime, const DeGiorgiBudget& budget, int n_max);

struct BoundSide {
  double margin = 0.0;  // min u - lo, or hi - max u; negative means violated
  double time = 0.0;
  Point location{0.0, 0.0};
};

struct BoundReport {
  std::vector<BoundSide> lower;  // per species
  std::vector<BoundSide> upper;
  bool ok() const;
};

BoundReport bound_check(const SimulationResult& result, const Grid& grid, double lo, double hi);

// Cell gradients: per axis, the mean of the differences across the cell's interior faces.
std::vector<Point> cell_gradients(const Field& f, const Grid& grid, int species);

// (sum_j w_j sum_c V |grad u_i|^s)^(1/s) per species.
std::vector<double> discrete_grad_norm(const SimulationResult& result, const Grid& grid, double s);

// ||u||_{L^r L^q} / (max_t ||u||_{L^2} + ||grad u||_{L^2(Omega_T)}), measured on the run.
double empirical_sobolev_beta(const SimulationResult& result, const Grid& grid, int species, double r, double q);

struct ProbeMargins {
  std::vector<double> eps;      // eps_1 .. eps_4
  std::vector<double> margins;  // four coefficients of the energy inequality
  std::vector<double> ratio;    // R_i = (J_i1 + J_i2) / (2 G_i)
  double min_margin = 0.0;
};

struct UniquenessProbeReport {
  std::vector<double> time;
  std::vector<std::vector<double>> v_norms;  // [snapshot][species], L2 over the domain
  std::vector<double> total_norm;            // [snapshot]
  std::vector<double> grad_energies;         // per species, over the probe region
  std::vector<double> cross_energies;
  std::vector<std::vector<double>> weighted_energies;  // J_ij
  ProbeMargins margins;
  double amplification = 0.0;
};

// Grid values of eps_1..eps_4 searched by the probe: 13 log-spaced factors in [1e-3, 1]
// times delta_i for eps_1, eps_2 and times K_ii^- for eps_3, eps_4.
std::vector<double> probe_eps_factors();

ProbeMargins probe_margins(const ModelSpec& spec, const std::vector<double>& ratio);

UniquenessProbeReport uniqueness_probe_from_runs(const SimulationResult& a, const SimulationResult& b,
                                                 const ModelSpec& spec, const Grid& grid,
                                                 const std::vector<int>& rho_cells);

// Twin runs from u0 and u0 + perturbation with identical boundary data.
UniquenessProbeReport uniqueness_probe(const ModelSpec& spec, const Grid& grid, const StepperConfig& cfg,
                                       const Field& perturbation, const std::vector<int>& rho_cells);

// Cells whose centers lie in the disc of radius rho about center.
std::vector<int> disc_cells(const Grid& grid, const Point& center, double rho);

// Members of `cells` with a face neighbor outside the set, or on the domain boundary.
std::vector<int> region_boundary_cells(const Grid& grid, const std::vector<int>& cells);

}  // namespace crossdiff
