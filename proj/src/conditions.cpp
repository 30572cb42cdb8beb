#include "crossdiff/conditions.hpp"

#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "crossdiff/errors.hpp"

namespace crossdiff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_two_species(const ModelSpec& spec) {
  if (spec.species() != 2)
    throw InvalidParameter(fmt::format("condition is stated for two species, got {}", spec.species()));
}

// rhs / ell, with ell == 0 meaning a vanishing coupling.
double over_ell(double numerator, double ell) { return ell == 0.0 ? kInf : numerator / ell; }

}  // namespace

ConditionReport ConditionReport::strict_less(std::string name, double lhs, double rhs) {
  ConditionReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.pass = r.margin > 0.0;
  return r;
}

std::vector<ConditionReport> check_existence(const ModelSpec& spec) {
  require_two_species(spec);
  std::vector<ConditionReport> out;
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const double k_ij_upper = ellipticity_bounds(spec.tensor(i, j)).upper;
    const double k_ii_lower = ellipticity_bounds(spec.tensor(i, i)).lower;
    const double lhs = k_ij_upper * k_ij_upper / k_ii_lower;
    const double rhs = over_ell(4.0 * spec.delta[j], spec.ell);
    out.push_back(ConditionReport::strict_less(fmt::format("existence_{}", i + 1), lhs, rhs));
  }
  return out;
}

MeyersResult meyers_constants(double alpha, double beta, bool symmetric, double g_r) {
  if (!(alpha > 0.0)) throw InvalidParameter(fmt::format("coercivity constant must be positive, got {}", alpha));
  if (!(beta >= alpha)) throw InvalidParameter(fmt::format("need beta >= alpha, got {} < {}", beta, alpha));
  if (!(g_r >= 1.0)) throw InvalidParameter(fmt::format("inverse heat operator norm must be >= 1, got {}", g_r));

  MeyersResult res;
  MeyersConstants& mc = res.constants;
  mc.alpha = alpha;
  mc.beta = beta;
  mc.symmetric = symmetric;
  if (symmetric) {
    mc.c = 0.0;
    mc.nu = 0.0;
    mc.mu = alpha / beta;
  } else {
    mc.c = (beta * beta - alpha * alpha) / (2.0 * alpha) + kMeyersShiftMargin * alpha;
    mc.mu = (alpha + mc.c) / (beta + mc.c);
    mc.nu = std::sqrt(beta * beta + mc.c * mc.c) / (beta + mc.c);
  }
  res.contraction = g_r * (1.0 - mc.mu + mc.nu);
  res.invertible = res.contraction < 1.0;
  return res;
}

std::vector<ConditionReport> check_regularity(const ModelSpec& spec, double g_s) {
  require_two_species(spec);
  std::vector<ConditionReport> rows;
  std::vector<ConditionReport> contractions;
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const double alpha = spec.delta[i];
    const double beta = spec.delta[i] + spec.ell * ellipticity_bounds(spec.tensor(i, i)).upper;
    const MeyersResult mr = meyers_constants(alpha, beta, spec.tensor(i, i).symmetric(), g_s);
    const MeyersConstants& mc = mr.constants;
    const double lhs = ellipticity_bounds(spec.tensor(i, j)).upper;

    const double gap = mc.mu - mc.nu;
    if (gap <= 0.0) {
      ConditionReport r = ConditionReport::strict_less(fmt::format("regularity_{}", i + 1), lhs, -kInf);
      r.infeasible = true;
      rows.push_back(r);
    } else {
      const double rhs = over_ell((mc.beta + mc.c) * gap / 2.0, spec.ell);
      rows.push_back(ConditionReport::strict_less(fmt::format("regularity_{}", i + 1), lhs, rhs));
    }
    contractions.push_back(
        ConditionReport::strict_less(fmt::format("contraction_{}", i + 1), mr.contraction, 1.0));
  }
  rows.insert(rows.end(), contractions.begin(), contractions.end());
  return rows;
}

double degiorgi_max_t_omega(int dim, double s, double m_factor, double ell0, double ci_beta) {
  const double r = dim + 2.0;
  const double zeta = r * (s - 2.0) / (2.0 * s) - 1.0;
  if (!(zeta > 0.0)) return 0.0;
  // Assemble in logs; the individual factors under- or overflow easily.
  const double log_rhs = r * std::log(m_factor - 1.0) + (r / zeta) * std::log(m_factor) -
                         r * (1.0 / zeta + 1.0 / (zeta * zeta)) * std::log(2.0) +
                         r * (1.0 / zeta - 1.0) * std::log(ci_beta) +
                         r * (1.0 + 1.0 / zeta) * std::log(ell0);
  return std::exp(log_rhs / (1.0 + zeta));
}

DeGiorgiBudget degiorgi_budget(const DeGiorgiInputs& in) {
  if (in.dim != 1 && in.dim != 2 && in.dim != 3)
    throw InvalidParameter(fmt::format("dimension must be 1..3, got {}", in.dim));
  if (!(in.s > 2.0)) throw InvalidParameter(fmt::format("regularity exponent must exceed 2, got {}", in.s));
  if (!(in.m_factor > 1.0)) throw InvalidParameter(fmt::format("bound factor must exceed 1, got {}", in.m_factor));
  for (double v : {in.ell0, in.grad_bound, in.k_offdiag_upper, in.k_diag_lower, in.delta, in.ell, in.sobolev_beta})
    if (!(v > 0.0)) throw InvalidParameter("De Giorgi budget inputs must be positive");

  DeGiorgiBudget b;
  b.dim = in.dim;
  b.s = in.s;
  b.r = in.dim + 2.0;
  b.q = b.r;
  b.zeta = b.r * (in.s - 2.0) / (2.0 * in.s) - 1.0;
  b.ell0 = in.ell0;
  b.m_factor = in.m_factor;
  b.sobolev_beta = in.sobolev_beta;

  const double level = std::min(in.m_factor * in.ell0, in.ell);
  b.c_i = std::sqrt(2.0 * in.k_offdiag_upper * level) * in.grad_bound /
          std::min(1.0, std::sqrt(in.delta + in.k_diag_lower * level));

  b.feasible = b.zeta > 0.0;
  if (!b.feasible) return b;

  const double ci_beta = b.c_i * b.sobolev_beta;
  b.max_t_omega = degiorgi_max_t_omega(in.dim, in.s, in.m_factor, in.ell0, ci_beta);
  const double target = in.m_factor * in.ell0;
  b.level_threshold = std::exp((b.r / b.zeta) * std::log(target) -
                               b.r * (1.0 / b.zeta + 1.0 / (b.zeta * b.zeta)) * std::log(2.0) -
                               (b.r / b.zeta) * std::log(ci_beta));
  return b;
}

double degiorgi_min_exponent(int dim) { return 2.0 + 4.0 / dim; }

double degiorgi_statement_exponent(int dim) {
  if (dim < 2) throw InvalidParameter("the quoted exponent 2N/(N-1) needs N >= 2");
  return 2.0 * dim / (dim - 1.0);
}

ConditionReport check_aquifer_admissibility(double h2, double delta, double alpha) {
  if (!(h2 > 0.0)) throw InvalidParameter(fmt::format("aquifer depth must be positive, got {}", h2));
  if (!(delta > 0.0)) throw InvalidParameter(fmt::format("regularization must be positive, got {}", delta));
  if (alpha > 1.0) {
    // Upper bound alpha <= 1 violated; report it as 1 - alpha < 0.
    return ConditionReport::strict_less("aquifer_admissibility", alpha, 1.0);
  }
  return ConditionReport::strict_less("aquifer_admissibility", 1.0 - 4.0 * delta / h2, alpha);
}

}  // namespace crossdiff
