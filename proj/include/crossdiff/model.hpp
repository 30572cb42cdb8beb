#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "crossdiff/grid.hpp"

namespace crossdiff {

// Constant N x N cross-diffusion tensor, N in {1, 2}.
class CrossTensor {
 public:
  CrossTensor() = default;

  static CrossTensor scalar(double k);
  static CrossTensor isotropic(int dim, double k);
  static CrossTensor diagonal(double kx, double ky);
  static CrossTensor matrix(double a00, double a01, double a10, double a11);

  int dim() const { return dim_; }
  double operator()(int row, int col) const { return entries_[2 * row + col]; }
  // Entry acting on the gradient component along `axis`; all a two-point flux can see.
  double normal(int axis) const { return entries_[3 * axis]; }
  bool symmetric() const { return dim_ == 1 || entries_[1] == entries_[2]; }
  double quadratic_form(const Point& xi) const;
  CrossTensor scaled(double factor) const;

 private:
  int dim_ = 1;
  std::array<double, 4> entries_{0.0, 0.0, 0.0, 0.0};
};

struct EllipticityBounds {
  double lower;  // K^-
  double upper;  // K^+
};

// Extreme eigenvalues of the symmetric part; throws EllipticityViolation if lower <= 0.
EllipticityBounds ellipticity_bounds(const CrossTensor& k);

// max{0, min{v, ell}}; ell must be positive.
double truncate(double v, double ell);

using SourceFn = std::function<double(double t, const Point& x, std::span<const double> u)>;
using BoundaryFn = std::function<double(double t, const Point& x)>;
using InitialFn = std::function<double(const Point& x)>;

enum class Coupling {
  truncated,   // cross coefficient T_ell(u_i)
  untruncated  // cross coefficient u_i, the original model
};

struct ModelSpec {
  Box domain;
  std::vector<double> delta;
  std::vector<CrossTensor> K;  // m x m, row-major: K[i * m + j]
  double ell = 1.0;
  Coupling coupling = Coupling::truncated;
  std::vector<SourceFn> sources;  // empty function means Q_i = 0
  std::vector<BoundaryFn> dirichlet;
  std::vector<InitialFn> initial;

  int species() const { return static_cast<int>(delta.size()); }
  const CrossTensor& tensor(int i, int j) const { return K[static_cast<std::size_t>(i) * species() + j]; }
  CrossTensor& tensor(int i, int j) { return K[static_cast<std::size_t>(i) * species() + j]; }

  // Coefficient multiplying the cross fluxes of species i. ell == 0 disables coupling.
  double coupling_coefficient(double u) const;
  // False when the discrete operator does not depend on the lagged state.
  bool lag_dependent() const;

  double source(int i, double t, const Point& x, std::span<const double> u) const {
    return sources.size() > static_cast<std::size_t>(i) && sources[i] ? sources[i](t, x, u) : 0.0;
  }
};

// delta_i grads[i] + T_ell(u_i) sum_j K_ij grads[j].
Point species_flux(int i, std::span<const Point> grads, double u_i, const ModelSpec& spec);

struct Violation {
  std::string kind;
  int species = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(const std::string& kind) const;
};

inline constexpr double kCompatibilityTolerance = 1e-10;

// Collects every violation of the data assumptions; never throws.
ValidationReport validate_spec(const ModelSpec& spec, const Grid& grid);

// Samples the initial data at cell centers.
Field initial_field(const ModelSpec& spec, const Grid& grid);

}  // namespace crossdiff
