#include <algorithm>
#include <cmath>

#include "ctax/errors.hpp"
#include "ctax/format.hpp"
#include "ctax/tax_search.hpp"

namespace ctax::tax {

CoupledModel build_coupled_milp(const SystemData& sys, double cap) {
  CoupledModel out;
  milp::MilpProblem& p = out.problem;
  std::vector<milp::Term> cap_terms;
  double cap_constant = 0.0;
  for (std::size_t a = 0; a < sys.days.size(); ++a) {
    ucct::DayModel m = ucct::build_day_milp(sys, static_cast<int>(a), 0.0);
    const double pi = sys.days[a].probability;
    const std::string prefix = sys.days[a].id + ":";
    const milp::MilpProblem& q = m.problem;
    const int offset = p.num_vars();
    out.column_offset.push_back(offset);
    for (int j = 0; j < q.num_vars(); ++j) {
      p.add_column(prefix + q.column_label(j), q.lower()[j], q.upper()[j],
                   pi * q.objective()[j], q.binary_mask()[j]);
    }
    p.objective_offset += pi * q.objective_offset;
    for (const auto& row : q.rows()) {
      std::vector<milp::Term> terms = row.terms;
      for (auto& t : terms) t.col += offset;
      if (row.sense == milp::Sense::ranged) {
        p.add_ranged_row(prefix + row.label, std::move(terms), row.range_lower,
                         row.rhs);
      } else {
        p.add_row(prefix + row.label, std::move(terms), row.sense, row.rhs);
      }
    }
    const ucct::LinearExpression e = ucct::emission_expression(m);
    for (const auto& t : e.terms) cap_terms.push_back({t.col + offset, pi * t.coef});
    cap_constant += pi * e.constant;
    out.days.push_back(std::move(m));
  }
  out.cap_row = p.add_row("emission_cap", std::move(cap_terms),
                          milp::Sense::less_equal, cap - cap_constant);
  return out;
}

CapSolve solve_with_cap(const SystemData& sys, double cap,
                        const milp::SolverConfig& solver) {
  const CoupledModel cm = build_coupled_milp(sys, cap);
  CapSolve out;
  out.cap = cap;
  const milp::MilpSolution sol = milp::solve_milp(cm.problem, solver);
  if (sol.status == milp::SolveStatus::infeasible) return out;
  if (!sol.has_point()) {
    throw SolveError("capped problem at cap " + fixed6(cap) + ": solver reported " +
                     milp::to_string(sol.status));
  }
  out.feasible = true;
  out.relative_gap = sol.relative_gap;
  for (std::size_t a = 0; a < cm.days.size(); ++a) {
    const int n = cm.days[a].problem.num_vars();
    const auto first = sol.values.begin() + cm.column_offset[a];
    const std::vector<double> x(first, first + n);
    const ucct::UcctDaySolution d = ucct::decode_day(sys, cm.days[a], x);
    out.expected_cost += d.probability * (d.gen_cost + d.shed_cost);
    out.expected_emissions += d.probability * d.emissions;
  }
  const milp::MilpSolution lp = milp::fix_binaries_and_dualize(cm.problem, sol, solver);
  // A looser cap can only lower cost, so the dual is nonpositive.
  out.lambda = std::max(0.0, -(*lp.duals)[cm.cap_row]);
  return out;
}

CemvResult cemv(const SystemData& sys, double target,
                const milp::SolverConfig& solver, int jobs) {
  CemvResult out;
  out.capped = solve_with_cap(sys, target, solver);
  if (!out.capped.feasible) {
    throw InfeasibleError("no commitment meets the emission cap " +
                          fixed6(target) + " t/day");
  }
  out.realized = ucct::solve_ucct(sys, out.capped.lambda, solver, jobs);
  out.realized_emissions = out.realized.expected_emissions;
  out.meets_target =
      out.realized_emissions <= target + 1e-6 * std::max(1.0, std::abs(target));
  return out;
}

}  // namespace ctax::tax
