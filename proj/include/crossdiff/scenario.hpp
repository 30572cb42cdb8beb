#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crossdiff/aquifer.hpp"
#include "crossdiff/model.hpp"
#include "crossdiff/solver.hpp"

namespace crossdiff {

inline constexpr int kConfigVersion = 1;

enum class ScenarioKind { generic, aquifer, keulegan };

// Closed-form field used for initial data, boundary data and sources.
//   constant:  value
//   bump:      amplitude (1 - |x - center|^2 / radius^2)^2, zero outside the disc
//   gaussian:  amplitude exp(-|x - center|^2 / (2 width^2))
//   sine:      amplitude prod_a sin(modes[a] pi (x_a - lower_a) / extent_a)
//   linear:    value + slope . (x - lower)
//   noise:     value + amplitude * uniform[0, 1), drawn per point from `seed`
//   logistic:  rate U0(u_i) (1 - u_i / capacity); sources only
// Any field may add `offset`.
struct FieldDescriptor {
  std::string type = "constant";
  double value = 0.0;
  double amplitude = 0.0;
  Point center{0.5, 0.5};
  double radius = 0.25;
  double width = 0.1;
  std::array<int, 2> modes{1, 1};
  Point slope{0.0, 0.0};
  double rate = 0.0;
  double capacity = 1.0;
  std::uint64_t seed = 0;
  double offset = 0.0;
};

struct PerturbationConfig {
  double amplitude = 1e-3;
  Point center{0.5, 0.5};
  double radius = 0.2;
  std::string shape = "bump";  // bump | plateau
  int species = -1;            // -1 perturbs every species
};

struct DiagnosticsConfig {
  bool conditions = true;
  double g_s = 1.0;
  std::optional<double> ell0;  // defaults to max of the initial data
  double m = 2.0;
  double m_prime = 0.5;
  double s = 6.0;
  std::optional<double> M_s;           // defaults to the run's discrete gradient norm
  std::optional<double> sobolev_beta;  // defaults to the run's empirical ratio
  int n_max = 20;
  bool degiorgi = false;
  std::optional<std::array<double, 2>> bounds;
  PerturbationConfig perturbation;
};

struct ConvergenceConfig {
  std::string kind = "heat_sine";  // heat_sine | manufactured
  std::vector<int> grids{10, 20, 40, 80};
  std::vector<double> dts{1e-6, 1e-6, 1e-6, 1e-6};
  double t_end = 0.01;
};

struct OutputConfig {
  bool snapshots = true;
  bool profiles = true;
};

struct AquiferConfig {
  double h2 = 1.0;
  double delta = 0.3;
  double alpha = 0.025;
  double epsilon = 1e-2;
  FieldDescriptor initial_h;
  FieldDescriptor initial_h1;
  std::optional<FieldDescriptor> dirichlet_h;  // default: initial data
  std::optional<FieldDescriptor> dirichlet_h1;
  std::optional<FieldDescriptor> pumping;
};

struct KeuleganConfig {
  double pump = 2.0;
  double tilt = 0.4;
  KeuleganOptions options;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::generic;
  Box box;
  std::array<int, 2> cells{20, 20};
  StepperConfig stepper;

  std::vector<double> delta;
  std::vector<CrossTensor> K;
  double ell = 1.0;
  Coupling coupling = Coupling::truncated;
  std::vector<FieldDescriptor> initial;
  std::vector<std::optional<FieldDescriptor>> dirichlet;  // empty slot: initial data
  std::vector<std::optional<FieldDescriptor>> sources;

  AquiferConfig aquifer;
  KeuleganConfig keulegan;
  DiagnosticsConfig diagnostics;
  ConvergenceConfig convergence;
  std::vector<double> epsilons{1e-1, 1e-2, 1e-3, 1e-4};
  OutputConfig outputs;
  std::uint64_t seed = 0;

  // The configuration with every default filled in, as echoed in the manifest.
  nlohmann::json resolved;
};

// Strict parse; throws ConfigError naming the offending key or line.
ScenarioConfig parse_scenario(const std::string& path);
ScenarioConfig parse_scenario_text(const std::string& text);

// Replaces the seed in every noise descriptor and the resolved echo.
void apply_seed(ScenarioConfig& cfg, std::uint64_t seed);

const char* kind_name(ScenarioKind kind);

Grid make_grid(const ScenarioConfig& cfg);
ModelSpec make_model(const ScenarioConfig& cfg);
AquiferSpec make_aquifer(const ScenarioConfig& cfg, const Grid& grid);

InitialFn make_initial(const FieldDescriptor& d, const Box& box);
BoundaryFn make_boundary(const FieldDescriptor& d, const Box& box);
SourceFn make_source(const FieldDescriptor& d, const Box& box, int species);

}  // namespace crossdiff
