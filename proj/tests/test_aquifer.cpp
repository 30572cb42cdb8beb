#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "support.hpp"

#include "crossdiff/aquifer.hpp"
#include "crossdiff/errors.hpp"

using namespace crossdiff;

namespace {

AquiferSpec flat_aquifer(const Grid& grid, double h, double h1) {
  AquiferSpec s;
  s.domain = grid.box();
  s.initial_h = [h](const Point&) { return h; };
  s.initial_h1 = [h1](const Point&) { return h1; };
  s.dirichlet_h = [h](double, const Point&) { return h; };
  s.dirichlet_h1 = [h1](double, const Point&) { return h1; };
  return s;
}

StepperConfig aquifer_stepper(double dt, double t_end) {
  StepperConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.picard_max = 30;
  c.picard_tol = 1e-11;
  c.lin_tol = 1e-12;
  c.snapshot_every = 1;
  return c;
}

double max_abs_diff(const SparseMatrix& a, const SparseMatrix& b) {
  return (Eigen::MatrixXd(a) - Eigen::MatrixXd(b)).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("head maps") {
  const auto u = map_heads(0.6, 0.2, 1.0);
  CHECK(u[0] == doctest::Approx(0.4));
  CHECK(u[1] == doctest::Approx(0.4));
  const auto fresh = map_heads(1.0, 0.0, 1.0);
  CHECK(fresh[0] == 1.0);
  CHECK(fresh[1] == 0.0);

  testing::Gen g(51);
  for (int n = 0; n < 2000; ++n) {
    const double h2 = g.uniform(0.5, 3.0), h = g.uniform(0, h2), h1 = g.uniform(0, h);
    const auto s = map_heads(h, h1, h2);
    const auto back = map_species(s[0], s[1], h2);
    REQUIRE(back[0] == doctest::Approx(h).epsilon(1e-15));
    REQUIRE(back[1] == doctest::Approx(h1).epsilon(1e-14));
  }

  const Grid grid = Grid::rectangle({0, 0}, {1, 1}, 5, 5);
  Field heads(2, grid.size());
  for (int c = 0; c < grid.size(); ++c) {
    heads.at(0, c) = g.uniform(0.3, 0.9);
    heads.at(1, c) = g.uniform(0.0, 0.3);
  }
  const Field round = species_to_heads(heads_to_species(heads, 1.0), 1.0);
  for (std::size_t k = 0; k < heads.values.size(); ++k)
    REQUIRE(round.values[k] == doctest::Approx(heads.values[k]).epsilon(1e-14));
}

TEST_CASE("fresh source throttles extraction near an empty fresh layer") {
  CHECK(fresh_source(-2.0, 0.5, 1.0) == 2.0);
  CHECK(fresh_source(2.0, 0.5, 1.0) == -2.0);
  CHECK(fresh_source(2.0, 0.025, 1.0) == doctest::Approx(-1.0));
  CHECK(fresh_source(2.0, 0.0, 1.0) == 0.0);
  CHECK(fresh_source(2.0, -0.1, 1.0) == 0.0);
}

TEST_CASE("aquifer assembly matches the generic model assembly entry-wise") {
  const Grid grid = Grid::rectangle({0, 0}, {1, 1}, 6, 6);
  AquiferSpec s = flat_aquifer(grid, 0.6, 0.2);
  s.pumping = [](double, const Point& x) { return x[0] > 0.5 ? 0.3 : -0.2; };
  testing::Gen g(52);
  Field old(2, grid.size()), lag(2, grid.size());
  for (int c = 0; c < grid.size(); ++c) {
    old.at(0, c) = g.uniform(0.0, 0.7);
    old.at(1, c) = g.uniform(0.0, 0.7);
    lag.at(0, c) = g.uniform(-0.1, 1.1);
    lag.at(1, c) = g.uniform(-0.1, 1.1);
  }
  old.time = 0.1;
  for (FaceWeighting w : {FaceWeighting::upwind, FaceWeighting::arithmetic}) {
    const auto a = assemble_aquifer_system(s, grid, old, lag, 0.01, false, w);
    const auto b = assemble_system(to_model_spec(s), grid, old, lag, 0.01, w);
    CHECK(max_abs_diff(a.matrix, b.matrix) <= 1e-12);
    CHECK((a.rhs - b.rhs).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(max_abs_diff(a.boundary_matrix, b.boundary_matrix) <= 1e-12);
    CHECK((a.boundary_offset - b.boundary_offset).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("penalized and plain systems coincide when the constraint is inactive") {
  const Grid grid = Grid::rectangle({0, 0}, {1, 1}, 6, 6);
  const AquiferSpec s = flat_aquifer(grid, 0.6, 0.2);
  testing::Gen g(53);
  for (int t = 0; t < 10; ++t) {
    Field lag(2, grid.size());
    for (int c = 0; c < grid.size(); ++c) {
      lag.at(0, c) = g.uniform(0.0, 0.5);
      lag.at(1, c) = g.uniform(0.0, 0.5);  // s <= 1 = h2
    }
    const Field old = lag;
    const auto p = assemble_aquifer_system(s, grid, old, lag, 0.01, true, FaceWeighting::upwind);
    const auto q = assemble_aquifer_system(s, grid, old, lag, 0.01, false, FaceWeighting::upwind);
    CHECK(max_abs_diff(p.matrix, q.matrix) == 0.0);
    CHECK((p.rhs - q.rhs).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("flat interfaces without pumping are steady") {
  const Grid grid = Grid::rectangle({0, 0}, {1, 1}, 8, 8);
  const AquiferSpec s = flat_aquifer(grid, 0.6, 0.2);
  const auto run = run_penalized(s, grid, aquifer_stepper(0.01, 0.05));
  for (const Field& f : run.heads.snapshots)
    for (int c = 0; c < grid.size(); ++c) {
      REQUIRE(std::abs(f.at(0, c) - 0.6) <= 1e-11);
      REQUIRE(std::abs(f.at(1, c) - 0.2) <= 1e-11);
    }
  for (double v : run.confinement.violation) CHECK(v == 0.0);
  for (double r : run.confinement.residual) CHECK(r == 0.0);
  for (double q : run.confinement.q_faces) CHECK(q == 0.0);

  const auto confined = run_confined_aquifer(s, grid, aquifer_stepper(0.01, 0.05));
  for (const Field& f : confined.snapshots)
    for (int c = 0; c < grid.size(); ++c) {
      REQUIRE(std::abs(f.at(0, c) - 0.6) <= 1e-11);
      REQUIRE(std::abs(f.at(1, c) - 0.2) <= 1e-11);  // head equals its constant boundary value
    }
}

TEST_CASE("one step on heads matches the penalized run") {
  const Grid grid = Grid::rectangle({0, 0}, {1, 1}, 6, 6);
  AquiferSpec s = keulegan_scenario(grid, 0.0, 0.4);
  const auto cfg = aquifer_stepper(0.01, 0.01);
  Field heads(2, grid.size());
  for (int c = 0; c < grid.size(); ++c) {
    heads.at(0, c) = s.initial_h(grid.center(c));
    heads.at(1, c) = s.initial_h1(grid.center(c));
  }
  const Field next = step_aquifer(heads, s, grid, cfg, true);
  const auto run = run_penalized(s, grid, cfg);
  for (std::size_t k = 0; k < next.values.size(); ++k)
    CHECK(next.values[k] == doctest::Approx(run.heads.snapshots.back().values[k]).epsilon(1e-10));
}

TEST_CASE("inclined interface flattens monotonically") {
  const Grid grid = Grid::rectangle({0, 0}, {1, 0.25}, 20, 5);
  const AquiferSpec s = keulegan_scenario(grid, 0.0, 0.4);
  auto cfg = aquifer_stepper(0.01, 0.2);
  cfg.snapshot_every = 2;
  const auto run = run_penalized(s, grid, cfg);
  double prev = 1e300;
  for (const Field& f : run.heads.snapshots) {
    const double slope = std::abs(interface_slope(f, grid));
    CHECK(slope < prev);
    prev = slope;
  }
}

TEST_CASE("keulegan scenario parameters and hierarchy") {
  const Grid grid = Grid::rectangle({0, 0}, {1, 0.25}, 20, 5);
  const auto s = keulegan_scenario(grid, 0.0, 0.0);
  CHECK(s.alpha == 0.025);
  const auto flat = run_penalized(s, grid, aquifer_stepper(0.01, 0.03));
  for (const Field& f : flat.heads.snapshots)
    for (int c = 0; c < grid.size(); ++c) REQUIRE(std::abs(f.at(0, c) - 0.5) <= 1e-11);
  CHECK_THROWS_AS(keulegan_scenario(grid, 0.0, 1.5), InvalidParameter);
  CHECK_THROWS_AS(keulegan_scenario(grid, 0.0, -1.5), InvalidParameter);
}

TEST_CASE("aquifer validation") {
  const Grid grid = Grid::rectangle({0, 0}, {1, 1}, 4, 4);
  AquiferSpec s = flat_aquifer(grid, 0.6, 0.2);
  CHECK_NOTHROW(validate_aquifer(s, grid));
  AquiferSpec bad = flat_aquifer(grid, 0.2, 0.6);
  CHECK_THROWS_AS(validate_aquifer(bad, grid), InvalidParameter);
  AquiferSpec steep = s;
  steep.delta = 0.1;
  CHECK_THROWS_AS(validate_aquifer(steep, grid), InvalidParameter);
  AquiferSpec eps = s;
  eps.epsilon = 0.0;
  CHECK_THROWS_AS(validate_aquifer(eps, grid), InvalidParameter);
}

TEST_CASE("penalized tolerance tightens only for small epsilon") {
  CHECK(penalized_lin_tol(1e-10, 1e-2) == 1e-10);
  CHECK(penalized_lin_tol(1e-10, 1e-3) == 1e-10);
  CHECK(penalized_lin_tol(1e-10, 1e-4) == doctest::Approx(1e-14));
}

TEST_CASE("epsilon sweep on a scenario that never hits the constraint") {
  const Grid grid = Grid::rectangle({0, 0}, {1, 1}, 6, 6);
  const AquiferSpec s = flat_aquifer(grid, 0.6, 0.2);
  const auto rep = epsilon_sweep(s, grid, aquifer_stepper(0.01, 0.03), {1e-1, 1e-2});
  for (const auto& row : rep.rows) {
    CHECK(row.ok);
    CHECK(row.final_violation == 0.0);
  }
  CHECK_FALSE(rep.fit_valid);
  CHECK_THROWS_AS(epsilon_sweep(s, grid, aquifer_stepper(0.01, 0.03), {1e-2, 1e-1}), InvalidParameter);
  CHECK_THROWS_AS(epsilon_sweep(s, grid, aquifer_stepper(0.01, 0.03), {1e-2, 1e-2}), InvalidParameter);
}

TEST_CASE("constraint-active recharge produces a bounded violation that shrinks with epsilon") {
  const Grid grid = Grid::rectangle({0, 0}, {1, 1}, 10, 10);
  auto cfg = aquifer_stepper(0.01, 0.2);
  cfg.snapshot_every = 5;
  cfg.lin_tol = 1e-10;
  const auto a = run_penalized(confinement_scenario(grid, 1e-2), grid, cfg);
  const auto b = run_penalized(confinement_scenario(grid, 1e-3), grid, cfg);
  const double va = a.confinement.violation.back(), vb = b.confinement.violation.back();
  CHECK(va > 0.0);
  CHECK(va < 0.1 * grid.measure());
  CHECK(vb < va);
  const auto plain = run_penalized(confinement_scenario(grid, 1e-2), grid, cfg, false);
  CHECK(plain.confinement.violation.back() > va);
}

TEST_CASE("pumping makes the confined and penalized interfaces differ") {
  const Grid grid = Grid::rectangle({0, 0}, {1, 0.25}, 20, 5);
  const AquiferSpec s = keulegan_scenario(grid, 2.0, 0.0);
  const auto cfg = aquifer_stepper(0.01, 0.2);
  const auto pen = run_penalized(s, grid, cfg);
  const auto conf = run_confined_aquifer(s, grid, cfg);
  double diff = 0.0;
  for (int c = 0; c < grid.size(); ++c)
    diff = std::max(diff, std::abs(pen.heads.snapshots.back().at(0, c) - conf.snapshots.back().at(0, c)));
  CHECK(diff > 1e3 * cfg.lin_tol);
}
