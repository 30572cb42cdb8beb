#include "crossdiff/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "crossdiff/errors.hpp"

namespace crossdiff {

CrossTensor CrossTensor::scalar(double k) {
  CrossTensor t;
  t.dim_ = 1;
  t.entries_ = {k, 0.0, 0.0, 0.0};
  return t;
}

CrossTensor CrossTensor::isotropic(int dim, double k) {
  return dim == 1 ? scalar(k) : diagonal(k, k);
}

CrossTensor CrossTensor::diagonal(double kx, double ky) { return matrix(kx, 0.0, 0.0, ky); }

CrossTensor CrossTensor::matrix(double a00, double a01, double a10, double a11) {
  CrossTensor t;
  t.dim_ = 2;
  t.entries_ = {a00, a01, a10, a11};
  return t;
}

double CrossTensor::quadratic_form(const Point& xi) const {
  if (dim_ == 1) return entries_[0] * xi[0] * xi[0];
  return xi[0] * (entries_[0] * xi[0] + entries_[1] * xi[1]) +
         xi[1] * (entries_[2] * xi[0] + entries_[3] * xi[1]);
}

CrossTensor CrossTensor::scaled(double factor) const {
  CrossTensor t = *this;
  for (double& e : t.entries_) e *= factor;
  return t;
}

EllipticityBounds ellipticity_bounds(const CrossTensor& k) {
  EllipticityBounds b{};
  if (k.dim() == 1) {
    b = {k(0, 0), k(0, 0)};
  } else if (k.dim() == 2) {
    const double a = k(0, 0);
    const double d = k(1, 1);
    const double off = 0.5 * (k(0, 1) + k(1, 0));
    const double mean = 0.5 * (a + d);
    const double radius = std::hypot(0.5 * (a - d), off);
    b = {mean - radius, mean + radius};
  } else {
    throw InvalidParameter(fmt::format("tensor dimension must be 1 or 2, got {}", k.dim()));
  }
  if (!(b.lower > 0.0))
    throw EllipticityViolation(fmt::format("tensor is not uniformly elliptic (K- = {})", b.lower));
  return b;
}

double truncate(double v, double ell) {
  if (!(ell > 0.0)) throw InvalidParameter(fmt::format("truncation level must be positive, got {}", ell));
  return std::max(0.0, std::min(v, ell));
}

double ModelSpec::coupling_coefficient(double u) const {
  if (coupling == Coupling::untruncated) return u;
  if (ell == 0.0) return 0.0;
  return truncate(u, ell);
}

bool ModelSpec::lag_dependent() const {
  if (coupling == Coupling::truncated && ell == 0.0) return false;
  for (const auto& k : K)
    for (int a = 0; a < k.dim(); ++a)
      if (k.normal(a) != 0.0) return true;
  return false;
}

Point species_flux(int i, std::span<const Point> grads, double u_i, const ModelSpec& spec) {
  const int m = spec.species();
  if (static_cast<int>(grads.size()) != m)
    throw InvalidParameter(fmt::format("expected {} gradients, got {}", m, grads.size()));
  const double coeff = spec.coupling_coefficient(u_i);
  Point flux{spec.delta[i] * grads[i][0], spec.delta[i] * grads[i][1]};
  if (coeff == 0.0) return flux;
  for (int j = 0; j < m; ++j) {
    const CrossTensor& k = spec.tensor(i, j);
    if (k.dim() == 1) {
      flux[0] += coeff * k(0, 0) * grads[j][0];
    } else {
      flux[0] += coeff * (k(0, 0) * grads[j][0] + k(0, 1) * grads[j][1]);
      flux[1] += coeff * (k(1, 0) * grads[j][0] + k(1, 1) * grads[j][1]);
    }
  }
  return flux;
}

bool ValidationReport::has(const std::string& kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.kind == kind; });
}

ValidationReport validate_spec(const ModelSpec& spec, const Grid& grid) {
  ValidationReport report;
  auto add = [&](std::string kind, int species, std::string msg) {
    report.violations.push_back({std::move(kind), species, std::move(msg)});
  };

  const int m = spec.species();
  if (m < 1) {
    add("shape", -1, "at least one species is required");
    return report;
  }
  if (static_cast<int>(spec.K.size()) != m * m) {
    add("shape", -1, fmt::format("expected {} tensors, got {}", m * m, spec.K.size()));
    return report;
  }
  if (static_cast<int>(spec.dirichlet.size()) != m || static_cast<int>(spec.initial.size()) != m) {
    add("shape", -1, "boundary and initial data must be given for every species");
    return report;
  }
  if (!(spec.domain == grid.box()))
    add("domain mismatch", -1, "grid box differs from the model domain");
  if (spec.coupling == Coupling::truncated && !(spec.ell >= 0.0))
    add("negative truncation level", -1, fmt::format("ell = {}", spec.ell));

  for (int i = 0; i < m; ++i) {
    if (!(spec.delta[i] > 0.0))
      add("degenerate diffusivity", i, fmt::format("delta_{} = {}", i + 1, spec.delta[i]));
    for (int j = 0; j < m; ++j) {
      const CrossTensor& k = spec.tensor(i, j);
      if (k.dim() != grid.dim()) {
        add("shape", i, fmt::format("K_{}{} has dimension {}, grid has {}", i + 1, j + 1, k.dim(), grid.dim()));
        continue;
      }
      try {
        ellipticity_bounds(k);
      } catch (const EllipticityViolation& e) {
        add("ellipticity", i, fmt::format("K_{}{}: {}", i + 1, j + 1, e.what()));
      }
    }
    if (!spec.initial[i] || !spec.dirichlet[i]) {
      add("shape", i, fmt::format("missing data for species {}", i + 1));
      continue;
    }
    for (int c = 0; c < grid.size(); ++c) {
      const double u0 = spec.initial[i](grid.center(c));
      if (u0 < 0.0) {
        add("negative initial", i, fmt::format("u_{}^0 = {} at cell {}", i + 1, u0, c));
        break;
      }
    }
    // Boundary data is sampled at the initial time; later times are the caller's contract.
    for (const auto& face : grid.boundary_faces()) {
      const double g = spec.dirichlet[i](0.0, face.center);
      if (g < 0.0) {
        add("negative boundary", i, fmt::format("u_{},D = {} on boundary cell {}", i + 1, g, face.cell));
        break;
      }
    }
    for (const auto& face : grid.boundary_faces()) {
      const double g = spec.dirichlet[i](0.0, face.center);
      const double u0 = spec.initial[i](face.center);
      if (std::abs(g - u0) > kCompatibilityTolerance) {
        add("compatibility", i,
            fmt::format("u_{}^0 = {} but u_{},D(0) = {} on boundary cell {}", i + 1, u0, i + 1, g, face.cell));
        break;
      }
    }
  }
  return report;
}

Field initial_field(const ModelSpec& spec, const Grid& grid) {
  Field f(spec.species(), grid.size(), 0.0);
  for (int i = 0; i < spec.species(); ++i)
    for (int c = 0; c < grid.size(); ++c) f.at(i, c) = spec.initial[i](grid.center(c));
  return f;
}

}  // namespace crossdiff
