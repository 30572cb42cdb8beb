#pragma once

#include <array>

#include "crossdiff/solver.hpp"

namespace crossdiff {

// Decoupled heat equation on [0, 1]: delta = 1, ell = 0, u0 = sin(pi x), zero boundary data.
ModelSpec heat_sine_spec();
// e^{-pi^2 t} sin(pi x).
double heat_sine_exact(double t, double x);

// Two species on the unit square with u_i = a_i + b_i t sin(pi x) sin(pi y), diagonal tensors
// and ell above the solution range, so the truncation is inactive.
struct ManufacturedCase {
  std::array<double, 2> a{0.2, 0.3};
  std::array<double, 2> b{1.0, 0.5};
  std::array<double, 2> delta{0.5, 0.4};
  // K_ij = diag(kx[i][j], ky[i][j])
  std::array<std::array<double, 2>, 2> kx{{{1.0, 0.2}, {0.15, 0.8}}};
  std::array<std::array<double, 2>, 2> ky{{{1.2, 0.2}, {0.15, 0.9}}};
  double ell = 10.0;

  double exact(int i, double t, const Point& x) const;
  // Q_i making `exact` a solution.
  double forcing(int i, double t, const Point& x) const;
  ModelSpec spec() const;
};

}  // namespace crossdiff
