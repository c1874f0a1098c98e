#include "ctax/errors.hpp"
#include "ctax/format.hpp"
#include "ctax/parallel.hpp"
#include "ctax/tax_search.hpp"

namespace ctax::tax {

ParetoSample sample_pareto_by_cap(const SystemData& sys, int n_points,
                                  double low, double high,
                                  const milp::SolverConfig& solver, int jobs) {
  if (n_points < 1) throw ValidationError("pareto: need at least one point");
  if (n_points > 1 && !(low < high)) {
    throw ValidationError("pareto: cap range must satisfy low < high");
  }
  ParetoSample out;
  out.mode = SweepMode::cap;
  out.points.resize(n_points);
  parallel_for(n_points, jobs, [&](int k) {
    const double cap =
        n_points == 1 ? low : low + (high - low) * k / (n_points - 1);
    const CapSolve s = solve_with_cap(sys, cap, solver);
    ParetoPoint& pt = out.points[k];
    pt.parameter = cap;
    pt.feasible = s.feasible;
    if (s.feasible) {
      pt.expected_cost = s.expected_cost;
      pt.expected_emissions = s.expected_emissions;
      pt.lambda = s.lambda;
    }
  });
  return out;
}

ParetoSample sample_pareto_by_tax(const SystemData& sys,
                                  const std::vector<double>& taxes,
                                  const milp::SolverConfig& solver, int jobs,
                                  SolveCache* cache) {
  SolveCache local;
  SolveCache& memo = cache ? *cache : local;
  const std::uint64_t fp = fingerprint(sys);
  ParetoSample out;
  out.mode = SweepMode::tax;
  out.points.resize(taxes.size());
  parallel_for(static_cast<int>(taxes.size()), jobs, [&](int k) {
    const ucct::UcctResult r = memo.solve(sys, fp, taxes[k], solver, 1);
    ParetoPoint& pt = out.points[k];
    pt.parameter = taxes[k];
    pt.expected_cost = r.expected_cost;
    pt.expected_emissions = r.expected_emissions;
  });
  return out;
}

void write_pareto_csv(const ParetoSample& s, std::ostream& out) {
  out << "mode,parameter,expected_cost,expected_emissions,lambda,feasible\n";
  const char* mode = s.mode == SweepMode::cap ? "cap" : "tax";
  for (const auto& p : s.points) {
    out << mode << ',' << fixed6(p.parameter) << ',';
    if (p.feasible) {
      out << fixed6(p.expected_cost) << ',' << fixed6(p.expected_emissions);
    } else {
      out << ',';
    }
    out << ',' << (p.lambda ? fixed6(*p.lambda) : std::string()) << ','
        << (p.feasible ? 1 : 0) << '\n';
  }
}

}  // namespace ctax::tax
