#include "crossdiff/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "crossdiff/parallel.hpp"

namespace crossdiff {

std::vector<double> snapshot_weights(const SimulationResult& result) {
  std::vector<double> w(result.snapshots.size(), 0.0);
  for (std::size_t j = 1; j < w.size(); ++j) w[j] = result.snapshots[j].time - result.snapshots[j - 1].time;
  return w;
}

double level_set_measure(const SimulationResult& result, const Grid& grid, int species, double k) {
  const std::vector<double> w = snapshot_weights(result);
  const double vol = grid.cell_volume();
  double mu = 0.0;
  for (std::size_t j = 0; j < result.snapshots.size(); ++j) {
    const auto u = result.snapshots[j].component(species);
    const auto count = std::count_if(u.begin(), u.end(), [k](double v) { return v > k; });
    mu += static_cast<double>(count) * vol * w[j];
  }
  return mu;
}

LevelSetProfile level_set_profile(const SimulationResult& result, const Grid& grid, std::vector<double> levels) {
  LevelSetProfile p;
  std::sort(levels.begin(), levels.end());
  p.levels = std::move(levels);
  const int m = result.snapshots.empty() ? 0 : result.snapshots.front().species;
  for (int i = 0; i < m; ++i) {
    std::vector<double> mu;
    for (double k : p.levels) mu.push_back(level_set_measure(result, grid, i, k));
    p.measures.push_back(std::move(mu));
  }
  return p;
}

double degiorgi_level(int n, double ell0, double m_factor, double m_prime) {
  return m_factor * ell0 * (1.0 + m_prime - std::ldexp(1.0, -n));
}

int degiorgi_first_index(double m_prime) {
  // k_n >= m ell0  <=>  2^-n <= m'
  if (!(m_prime > 0.0)) throw InvalidParameter("m' must be positive");
  int n = 0;
  while (std::ldexp(1.0, -n) > m_prime) ++n;
  return n;
}

DeGiorgiTrace degiorgi_trace(const SimulationResult& result, const Grid& grid, int species, double ell0,
                             double m_factor, double m_prime, const DeGiorgiBudget& budget, int n_max) {
  if (!budget.feasible || !(budget.zeta > 0.0))
    throw InvalidParameter(fmt::format("De Giorgi budget is infeasible (zeta = {})", budget.zeta));
  if (result.snapshots.empty()) throw InvalidParameter("empty simulation result");
  if (n_max < 0) throw InvalidParameter("n_max must be nonnegative");

  DeGiorgiTrace tr;
  tr.species = species < static_cast<int>(result.names.size()) ? result.names[species]
                                                                : fmt::format("u{}", species + 1);
  tr.n0 = degiorgi_first_index(m_prime);
  const double target = m_factor * ell0;
  const double exponent = (budget.s - 2.0) / (2.0 * budget.s);
  const double ci_beta = budget.c_i * budget.sobolev_beta;

  // One extra level so every row can test v_{n+1}.
  std::vector<double> v;
  for (int n = 0; n <= n_max + 1; ++n)
    v.push_back(level_set_measure(result, grid, species, degiorgi_level(n, ell0, m_factor, m_prime)));
  for (int n = 0; n <= n_max; ++n) {
    tr.k.push_back(degiorgi_level(n, ell0, m_factor, m_prime));
    tr.v.push_back(v[n]);
    const double base = std::ldexp(ci_beta, n + 1) * std::pow(v[n], exponent) / target;
    const double rhs = std::pow(base, budget.r);
    tr.recursion_rhs.push_back(rhs);
    tr.holds.push_back(v[n + 1] <= rhs);
  }
  return tr;
}

bool BoundReport::ok() const {
  auto fine = [](const BoundSide& s) { return s.margin >= 0.0; };
  return std::all_of(lower.begin(), lower.end(), fine) && std::all_of(upper.begin(), upper.end(), fine);
}

BoundReport bound_check(const SimulationResult& result, const Grid& grid, double lo, double hi) {
  BoundReport rep;
  if (result.snapshots.empty()) return rep;
  const int m = result.snapshots.front().species;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  rep.lower.assign(m, BoundSide{kInf, 0.0, {0.0, 0.0}});
  rep.upper.assign(m, BoundSide{kInf, 0.0, {0.0, 0.0}});
  for (const Field& f : result.snapshots)
    for (int i = 0; i < m; ++i)
      for (int c = 0; c < f.cells; ++c) {
        const double u = f.at(i, c);
        if (u - lo < rep.lower[i].margin) rep.lower[i] = {u - lo, f.time, grid.center(c)};
        if (hi - u < rep.upper[i].margin) rep.upper[i] = {hi - u, f.time, grid.center(c)};
      }
  return rep;
}

std::vector<Point> cell_gradients(const Field& f, const Grid& grid, int species) {
  std::vector<Point> g(grid.size(), Point{0.0, 0.0});
  const auto u = f.component(species);
  for (int c = 0; c < grid.size(); ++c) {
    const auto ij = grid.coords(c);
    for (int a = 0; a < grid.dim(); ++a) {
      const double h = grid.spacing(a);
      double sum = 0.0;
      int used = 0;
      if (ij[a] > 0) {
        auto nb = ij;
        --nb[a];
        sum += (u[c] - u[grid.index(nb[0], nb[1])]) / h;
        ++used;
      }
      if (ij[a] + 1 < grid.cells(a)) {
        auto nb = ij;
        ++nb[a];
        sum += (u[grid.index(nb[0], nb[1])] - u[c]) / h;
        ++used;
      }
      g[c][a] = used > 0 ? sum / used : 0.0;
    }
  }
  return g;
}

namespace {

double norm2(const Point& p) { return p[0] * p[0] + p[1] * p[1]; }

}  // namespace

std::vector<double> discrete_grad_norm(const SimulationResult& result, const Grid& grid, double s) {
  if (!(s >= 1.0)) throw InvalidParameter(fmt::format("exponent must be >= 1, got {}", s));
  const std::vector<double> w = snapshot_weights(result);
  const int m = result.snapshots.empty() ? 0 : result.snapshots.front().species;
  std::vector<double> out(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < result.snapshots.size(); ++j) {
      if (w[j] == 0.0) continue;
      double inner = 0.0;
      for (const Point& g : cell_gradients(result.snapshots[j], grid, i)) inner += std::pow(std::sqrt(norm2(g)), s);
      sum += w[j] * grid.cell_volume() * inner;
    }
    out[i] = std::pow(sum, 1.0 / s);
  }
  return out;
}

double empirical_sobolev_beta(const SimulationResult& result, const Grid& grid, int species, double r, double q) {
  const std::vector<double> w = snapshot_weights(result);
  const double vol = grid.cell_volume();
  double lrq = 0.0;
  double linf_l2 = 0.0;
  double grad_l2 = 0.0;
  for (std::size_t j = 0; j < result.snapshots.size(); ++j) {
    const auto u = result.snapshots[j].component(species);
    double lq = 0.0;
    double l2 = 0.0;
    for (double v : u) {
      lq += vol * std::pow(std::abs(v), q);
      l2 += vol * v * v;
    }
    linf_l2 = std::max(linf_l2, std::sqrt(l2));
    if (w[j] == 0.0) continue;
    lrq += w[j] * std::pow(lq, r / q);
    double g2 = 0.0;
    for (const Point& g : cell_gradients(result.snapshots[j], grid, species)) g2 += vol * norm2(g);
    grad_l2 += w[j] * g2;
  }
  const double denom = linf_l2 + std::sqrt(grad_l2);
  return denom > 0.0 ? std::pow(lrq, 1.0 / r) / denom : 0.0;
}

std::vector<double> probe_eps_factors() {
  std::vector<double> f;
  for (int k = 0; k <= 12; ++k) f.push_back(std::pow(10.0, -3.0 + 0.25 * k));
  return f;
}

ProbeMargins probe_margins(const ModelSpec& spec, const std::vector<double>& ratio) {
  if (spec.species() != 2) throw InvalidParameter("the energy inequality is stated for two species");
  const double ell = spec.ell;
  double k_plus[2];
  double k_cross[2];  // K_{i,-i}^+
  double k_diag[2];
  for (int i = 0; i < 2; ++i) {
    k_plus[i] = 0.0;
    for (int j = 0; j < 2; ++j) k_plus[i] = std::max(k_plus[i], std::abs(ellipticity_bounds(spec.tensor(i, j)).upper));
    k_cross[i] = ellipticity_bounds(spec.tensor(i, 1 - i)).upper;
    k_diag[i] = ellipticity_bounds(spec.tensor(i, i)).lower;
  }

  auto gradient_margin = [&](int i, double eps_i, double eps_cross) {
    // eps_cross is eps_4 for species 1 and eps_3 for species 2
    const double other = k_cross[1 - i];
    return spec.delta[i] - 2.0 * eps_i - k_plus[i] / (2.0 * eps_i) * ratio[i] - ell * other * other / (4.0 * eps_cross);
  };

  const std::vector<double> f = probe_eps_factors();
  ProbeMargins best;
  best.ratio = ratio;
  best.min_margin = -std::numeric_limits<double>::infinity();
  for (double f1 : f)
    for (double f2 : f)
      for (double f3 : f)
        for (double f4 : f) {
          const double e[4] = {f1 * spec.delta[0], f2 * spec.delta[1], f3 * k_diag[0], f4 * k_diag[1]};
          const std::vector<double> mg = {gradient_margin(0, e[0], e[3]), gradient_margin(1, e[1], e[2]),
                                          k_diag[0] - e[2], k_diag[1] - e[3]};
          const double lo = *std::min_element(mg.begin(), mg.end());
          if (lo > best.min_margin) {
            best.min_margin = lo;
            best.eps.assign(e, e + 4);
            best.margins = mg;
          }
        }
  return best;
}

UniquenessProbeReport uniqueness_probe_from_runs(const SimulationResult& a, const SimulationResult& b,
                                                 const ModelSpec& spec, const Grid& grid,
                                                 const std::vector<int>& rho_cells) {
  if (a.snapshots.size() != b.snapshots.size()) throw InvalidParameter("twin runs have different snapshot counts");
  const int m = spec.species();
  const double vol = grid.cell_volume();
  const std::vector<double> w = snapshot_weights(a);

  UniquenessProbeReport rep;
  rep.grad_energies.assign(m, 0.0);
  rep.cross_energies.assign(m, 0.0);
  rep.weighted_energies.assign(m, std::vector<double>(m, 0.0));

  for (std::size_t j = 0; j < a.snapshots.size(); ++j) {
    const Field& fa = a.snapshots[j];
    const Field& fb = b.snapshots[j];
    Field v(m, grid.size(), fa.time);
    for (std::size_t k = 0; k < v.values.size(); ++k) v.values[k] = fa.values[k] - fb.values[k];

    rep.time.push_back(fa.time);
    std::vector<double> norms;
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (double x : v.component(i)) s += vol * x * x;
      norms.push_back(std::sqrt(s));
      total += s;
    }
    rep.v_norms.push_back(std::move(norms));
    rep.total_norm.push_back(std::sqrt(total));

    if (w[j] == 0.0) continue;
    std::vector<std::vector<Point>> gv;
    std::vector<std::vector<double>> gu2;  // |grad u_j|^2 averaged over the twins
    for (int i = 0; i < m; ++i) {
      gv.push_back(cell_gradients(v, grid, i));
      const auto ga = cell_gradients(fa, grid, i);
      const auto gb = cell_gradients(fb, grid, i);
      std::vector<double> g(grid.size());
      for (int c = 0; c < grid.size(); ++c) g[c] = 0.5 * (norm2(ga[c]) + norm2(gb[c]));
      gu2.push_back(std::move(g));
    }
    for (int i = 0; i < m; ++i)
      for (int c : rho_cells) {
        const double dv = norm2(gv[i][c]);
        const double t = 0.5 * (spec.coupling_coefficient(fa.at(i, c)) + spec.coupling_coefficient(fb.at(i, c)));
        rep.grad_energies[i] += w[j] * vol * dv;
        rep.cross_energies[i] += w[j] * vol * t * dv;
        const double vi2 = v.at(i, c) * v.at(i, c);
        for (int k = 0; k < m; ++k) rep.weighted_energies[i][k] += w[j] * vol * gu2[k][c] * vi2;
      }
  }

  const double v0 = rep.total_norm.empty() ? 0.0 : rep.total_norm.front();
  if (v0 > 0.0) rep.amplification = *std::max_element(rep.total_norm.begin(), rep.total_norm.end()) / v0;

  if (m == 2) {
    std::vector<double> ratio(2, 0.0);
    for (int i = 0; i < 2; ++i)
      if (rep.grad_energies[i] > 0.0)
        ratio[i] = (rep.weighted_energies[i][0] + rep.weighted_energies[i][1]) / (2.0 * rep.grad_energies[i]);
    rep.margins = probe_margins(spec, ratio);
  }
  return rep;
}

UniquenessProbeReport uniqueness_probe(const ModelSpec& spec, const Grid& grid, const StepperConfig& cfg,
                                       const Field& perturbation, const std::vector<int>& rho_cells) {
  const Field base = initial_field(spec, grid);
  if (perturbation.species != base.species || perturbation.cells != base.cells)
    throw InvalidParameter("perturbation shape does not match the model");
  std::vector<bool> inside(grid.size(), false);
  for (int c : rho_cells) inside.at(c) = true;
  for (int i = 0; i < base.species; ++i)
    for (int c = 0; c < grid.size(); ++c)
      if (!inside[c] && perturbation.at(i, c) != 0.0)
        throw InvalidParameter("perturbation is not supported in the probe region");
  for (int c : region_boundary_cells(grid, rho_cells))
    for (int i = 0; i < base.species; ++i)
      if (perturbation.at(i, c) != 0.0) throw InvalidParameter("perturbation must vanish on the region boundary");

  Field shifted = base;
  for (std::size_t k = 0; k < shifted.values.size(); ++k) shifted.values[k] += perturbation.values[k];

  SimulationResult runs[2];
  const Field* starts[2] = {&base, &shifted};
  parallel_for(2, [&](int r) { runs[r] = run_from(*starts[r], spec, grid, cfg); });
  return uniqueness_probe_from_runs(runs[0], runs[1], spec, grid, rho_cells);
}

std::vector<int> disc_cells(const Grid& grid, const Point& center, double rho) {
  std::vector<int> out;
  for (int c = 0; c < grid.size(); ++c) {
    const Point x = grid.center(c);
    if (std::hypot(x[0] - center[0], grid.dim() == 2 ? x[1] - center[1] : 0.0) < rho) out.push_back(c);
  }
  return out;
}

std::vector<int> region_boundary_cells(const Grid& grid, const std::vector<int>& cells) {
  std::vector<bool> inside(grid.size(), false);
  for (int c : cells) inside.at(c) = true;
  std::vector<int> out;
  for (int c : cells) {
    const auto ij = grid.coords(c);
    bool edge = false;
    for (int a = 0; a < grid.dim() && !edge; ++a)
      for (int step : {-1, 1}) {
        auto nb = ij;
        nb[a] += step;
        if (nb[a] < 0 || nb[a] >= grid.cells(a) || !inside[grid.index(nb[0], nb[1])]) {
          edge = true;
          break;
        }
      }
    if (edge) out.push_back(c);
  }
  return out;
}

}  // namespace crossdiff
