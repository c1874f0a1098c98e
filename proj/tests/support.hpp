#pragma once

// Independent checks on LP solutions shared by the test suites.

#include <algorithm>
#include <cmath>

#include "ctax/milp.hpp"

namespace support {

// Dual reduced costs c - A^T y recomputed from the problem data.
inline std::vector<double> dual_reduced_costs(const ctax::milp::MilpProblem& p,
                                              const std::vector<double>& y) {
  std::vector<double> d = p.objective();
  for (int r = 0; r < p.num_rows(); ++r) {
    for (const auto& t : p.rows()[r].terms) d[t.col] -= y[r] * t.coef;
  }
  return d;
}

inline double bound_term(double price, double lo, double hi) {
  if (std::abs(price) < 1e-12) return 0.0;
  return price > 0 ? price * lo : price * hi;
}

// Lagrangian dual value of the row duals in sol; -inf if the duals are not
// dual feasible.
inline double lagrangian_dual_objective(const ctax::milp::MilpProblem& p,
                                        const ctax::milp::MilpSolution& sol) {
  const auto& y = *sol.duals;
  const auto d = dual_reduced_costs(p, y);
  double v = p.objective_offset;
  for (int r = 0; r < p.num_rows(); ++r) {
    v += bound_term(y[r], p.rows()[r].lower(), p.rows()[r].upper());
  }
  for (int j = 0; j < p.num_vars(); ++j) {
    v += bound_term(d[j], p.lower()[j], p.upper()[j]);
  }
  return v;
}

inline double complementary_slackness_violation(
    const ctax::milp::MilpProblem& p, const ctax::milp::MilpSolution& sol) {
  const auto& y = *sol.duals;
  const auto d = dual_reduced_costs(p, y);
  double worst = 0.0;
  for (int r = 0; r < p.num_rows(); ++r) {
    if (std::abs(y[r]) < 1e-9) continue;
    const double a = p.row_activity(r, sol.values);
    const double b = y[r] > 0 ? p.rows()[r].lower() : p.rows()[r].upper();
    worst = std::max(worst, std::abs(y[r]) * std::abs(a - b));
  }
  for (int j = 0; j < p.num_vars(); ++j) {
    if (std::abs(d[j]) < 1e-9) continue;
    const double b = d[j] > 0 ? p.lower()[j] : p.upper()[j];
    worst = std::max(worst, std::abs(d[j]) * std::abs(sol.values[j] - b));
  }
  return worst;
}

}  // namespace support
