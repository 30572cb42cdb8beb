#include "crossdiff/reference_cases.hpp"

#include <cmath>
#include <numbers>

namespace crossdiff {

namespace {
constexpr double kPi = std::numbers::pi;
}

ModelSpec heat_sine_spec() {
  ModelSpec s;
  s.domain = Grid::line(0.0, 1.0, 1).box();
  s.delta = {1.0};
  s.K = {CrossTensor::scalar(1.0)};
  s.ell = 0.0;
  s.dirichlet = {[](double, const Point&) { return 0.0; }};
  s.initial = {[](const Point& x) { return std::sin(kPi * x[0]); }};
  return s;
}

double heat_sine_exact(double t, double x) { return std::exp(-kPi * kPi * t) * std::sin(kPi * x); }

double ManufacturedCase::exact(int i, double t, const Point& x) const {
  return a[i] + b[i] * t * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
}

double ManufacturedCase::forcing(int i, double t, const Point& x) const {
  const double sx = std::sin(kPi * x[0]);
  const double sy = std::sin(kPi * x[1]);
  const double cx = std::cos(kPi * x[0]);
  const double cy = std::cos(kPi * x[1]);
  const double phi = sx * sy;
  const double phi_x = kPi * cx * sy;
  const double phi_y = kPi * sx * cy;
  const double phi_xx = -kPi * kPi * phi;
  const double phi_yy = -kPi * kPi * phi;
  const double u_i = exact(i, t, x);

  double q = b[i] * phi - delta[i] * b[i] * t * (phi_xx + phi_yy);
  for (int j = 0; j < 2; ++j) {
    const double grad_dot = kx[i][j] * phi_x * phi_x + ky[i][j] * phi_y * phi_y;
    q -= b[i] * b[j] * t * t * grad_dot + u_i * b[j] * t * (kx[i][j] * phi_xx + ky[i][j] * phi_yy);
  }
  return q;
}

ModelSpec ManufacturedCase::spec() const {
  ModelSpec s;
  s.domain = Grid::rectangle({0.0, 0.0}, {1.0, 1.0}, 1, 1).box();
  s.delta = {delta[0], delta[1]};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s.K.push_back(CrossTensor::diagonal(kx[i][j], ky[i][j]));
  s.ell = ell;
  const ManufacturedCase self = *this;
  for (int i = 0; i < 2; ++i) {
    s.sources.push_back([self, i](double t, const Point& x, std::span<const double>) { return self.forcing(i, t, x); });
    s.dirichlet.push_back([self, i](double t, const Point& x) { return self.exact(i, t, x); });
    s.initial.push_back([self, i](const Point& x) { return self.exact(i, 0.0, x); });
  }
  return s;
}

}  // namespace crossdiff
