#pragma once

#include <string>
#include <vector>

#include "crossdiff/model.hpp"

namespace crossdiff {

// One evaluated inequality lhs < rhs. pass <=> margin > 0, margin = rhs - lhs.
struct ConditionReport {
  std::string name;
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  // Set when the inequality cannot hold for any value of the left-hand side.
  bool infeasible = false;

  static ConditionReport strict_less(std::string name, double lhs, double rhs);
};

// Two-species existence condition: (K12+)^2 / K11- < 4 delta_2 / ell and the mirror.
std::vector<ConditionReport> check_existence(const ModelSpec& spec);

struct MeyersConstants {
  double alpha = 0.0;
  double beta = 0.0;
  double c = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  bool symmetric = true;
};

struct MeyersResult {
  MeyersConstants constants;
  double contraction = 0.0;  // k(r) = g(r) (1 - mu + nu)
  bool invertible = false;   // k(r) < 1
};

// Margin added to the lower bound of the shift c in the non-symmetric case, relative to alpha.
inline constexpr double kMeyersShiftMargin = 0.1;

MeyersResult meyers_constants(double alpha, double beta, bool symmetric, double g_r);

// Gradient-regularity condition per species plus the contraction k(s) < 1 of each
// diagonal operator. g_s is the operator norm of the inverse heat operator at s.
std::vector<ConditionReport> check_regularity(const ModelSpec& spec, double g_s);

struct DeGiorgiInputs {
  int dim = 2;
  double s = 0.0;             // gradient integrability exponent
  double ell0 = 0.0;          // bound of the data
  double m_factor = 0.0;      // target bound is m_factor * ell0
  double grad_bound = 0.0;    // M_s
  double k_offdiag_upper = 0.0;
  double k_diag_lower = 0.0;
  double delta = 0.0;
  double ell = 0.0;
  double sobolev_beta = 0.0;  // interpolation constant, not the Meyers beta
};

struct DeGiorgiBudget {
  int dim = 2;
  double s = 0.0;
  double r = 0.0;
  double q = 0.0;
  double zeta = 0.0;
  double ell0 = 0.0;
  double m_factor = 0.0;
  double c_i = 0.0;
  double sobolev_beta = 0.0;
  bool feasible = false;
  double max_t_omega = 0.0;      // admissible bound on T |Omega|
  double level_threshold = 0.0;  // bound on the measure at the first target level
};

DeGiorgiBudget degiorgi_budget(const DeGiorgiInputs& in);

// Admissible T|Omega| for given exponents and the product C_i * beta; zero when zeta <= 0.
double degiorgi_max_t_omega(int dim, double s, double m_factor, double ell0, double ci_beta);

// Smallest exponent with a finite budget (s > 2 + 4/N) and the exponent 2N/(N-1)
// quoted in the bound statement, which sits exactly on the infeasible boundary for N = 2.
double degiorgi_min_exponent(int dim);
double degiorgi_statement_exponent(int dim);

// 1 - 4 delta / h2 < alpha <= 1.
ConditionReport check_aquifer_admissibility(double h2, double delta, double alpha);

}  // namespace crossdiff
