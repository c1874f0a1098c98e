#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "ctax/errors.hpp"
#include "ctax/milp.hpp"
#include "simplex.hpp"

namespace ctax::milp {

namespace {

using detail::BoundedSimplex;
using detail::LpStatus;

constexpr double kIntegralityTol = 1e-6;

void require_well_formed(const MilpProblem& p, const SolverConfig& cfg) {
  auto issues = p.check();
  if (!issues.empty()) throw Error("malformed problem: " + issues.front());
  auto cfg_issues = cfg.check();
  if (!cfg_issues.empty()) {
    throw Error("invalid solver config: " + cfg_issues.front());
  }
}

SolveStatus map_status(LpStatus s) {
  switch (s) {
    case LpStatus::optimal:
      return SolveStatus::optimal;
    case LpStatus::infeasible:
      return SolveStatus::infeasible;
    case LpStatus::unbounded:
      return SolveStatus::unbounded;
    case LpStatus::iteration_limit:
      return SolveStatus::numerical_failure;
  }
  return SolveStatus::numerical_failure;
}

double relative_gap(double incumbent, double bound) {
  if (!std::isfinite(incumbent)) return kInf;
  return std::max(0.0, incumbent - bound) /
         std::max(1.0, std::abs(incumbent));
}

struct Node {
  // (column, value) pairs fixed on the path from the root.
  std::vector<std::pair<int, int>> fixes;
  double bound = -kInf;
  std::int64_t id = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

MilpSolution solve_lp(const MilpProblem& p, const SolverConfig& cfg) {
  require_well_formed(p, cfg);
  BoundedSimplex lp(p, cfg.feasibility_tolerance);
  const LpStatus st = lp.optimize();
  MilpSolution sol;
  sol.status = map_status(st);
  sol.iterations = lp.iterations();
  sol.nodes = 1;
  if (st == LpStatus::optimal) {
    sol.values = lp.primal();
    sol.objective = lp.objective();
    sol.best_bound = sol.objective;
    sol.relative_gap = 0.0;
    sol.duals = lp.row_duals();
    sol.reduced_costs = lp.reduced_costs();
  }
  return sol;
}

MilpSolution solve_milp(const MilpProblem& p, const SolverConfig& cfg) {
  require_well_formed(p, cfg);

  std::vector<int> binaries;
  for (int j = 0; j < p.num_vars(); ++j) {
    if (p.binary_mask()[j] && p.lower()[j] < p.upper()[j]) {
      binaries.push_back(j);
    }
  }
  if (binaries.empty()) return solve_lp(p, cfg);

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  };

  BoundedSimplex lp(p, cfg.feasibility_tolerance);
  // -1 free, otherwise the value the column is currently fixed to.
  std::vector<int> fixed(p.num_vars(), -1);
  auto apply = [&](const Node& node) {
    std::vector<int> target(p.num_vars(), -1);
    for (auto [col, val] : node.fixes) target[col] = val;
    for (int j : binaries) {
      if (target[j] == fixed[j]) continue;
      if (target[j] < 0) {
        lp.set_bounds(j, p.lower()[j], p.upper()[j]);
      } else {
        lp.set_bounds(j, target[j], target[j]);
      }
      fixed[j] = target[j];
    }
  };

  MilpSolution sol;
  double incumbent = kInf;
  double pruned_bound = kInf;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::optional<Node> current = Node{};
  std::int64_t next_id = 1;
  bool limit_hit = false;
  bool failed = false;
  bool unbounded = false;

  auto cutoff = [&] {
    if (!std::isfinite(incumbent)) return kInf;
    const double slack =
        std::max(cfg.relative_mip_gap * std::max(1.0, std::abs(incumbent)),
                 1e-9 * std::max(1.0, std::abs(incumbent)));
    return incumbent - slack;
  };

  while (true) {
    if (!current) {
      while (!open.empty() && open.top().bound >= cutoff()) {
        pruned_bound = std::min(pruned_bound, open.top().bound);
        open.pop();
      }
      if (open.empty()) break;
      current = open.top();
      open.pop();
    }
    if (std::isfinite(incumbent)) {
      double lb = current->bound;
      if (!open.empty()) lb = std::min(lb, open.top().bound);
      if (relative_gap(incumbent, std::min(lb, pruned_bound)) <=
          cfg.relative_mip_gap) {
        pruned_bound = std::min(pruned_bound, lb);
        break;
      }
    }
    if (sol.nodes >= cfg.max_nodes || elapsed() > cfg.max_seconds) {
      limit_hit = true;
      open.push(*current);
      current.reset();
      break;
    }

    apply(*current);
    const LpStatus st = lp.optimize();
    ++sol.nodes;
    if (st == LpStatus::iteration_limit) {
      failed = true;
      break;
    }
    if (st == LpStatus::unbounded) {
      unbounded = true;
      break;
    }
    if (st == LpStatus::infeasible) {
      current.reset();
      continue;
    }

    const double obj = lp.objective();
    if (obj >= cutoff()) {
      pruned_bound = std::min(pruned_bound, obj);
      current.reset();
      continue;
    }

    const std::vector<double> x = lp.primal();
    int branch = -1;
    double best_score = -1.0;
    for (int j : binaries) {
      const double frac = x[j] - std::floor(x[j]);
      if (frac <= kIntegralityTol || frac >= 1.0 - kIntegralityTol) continue;
      if (cfg.branching == BranchingRule::first_fractional) {
        branch = j;
        break;
      }
      const double score = std::min(frac, 1.0 - frac);
      if (score > best_score) {
        best_score = score;
        branch = j;
      }
    }

    if (branch < 0) {
      // Integral: polish by fixing the binaries so the reported point is
      // exactly integral and its continuous part optimal for that commitment.
      Node polish = *current;
      polish.fixes.clear();
      for (int j : binaries) {
        polish.fixes.emplace_back(j, static_cast<int>(std::lround(x[j])));
      }
      apply(polish);
      double value = obj;
      std::vector<double> point = x;
      if (lp.optimize() == LpStatus::optimal) {
        value = lp.objective();
        point = lp.primal();
      }
      for (int j : binaries) point[j] = std::round(x[j]);
      if (value < incumbent) {
        incumbent = value;
        sol.values = std::move(point);
        sol.incumbent_history.push_back(value);
      }
      current.reset();
      continue;
    }

    // Reduced-cost fixing: a binary at a bound whose reduced cost alone
    // lifts the bound past the cutoff keeps that value in the whole subtree.
    if (std::isfinite(incumbent)) {
      const std::vector<double> d = lp.reduced_costs();
      const double limit = cutoff();
      for (int j : binaries) {
        if (fixed[j] >= 0 || j == branch) continue;
        if (x[j] <= kIntegralityTol && obj + d[j] >= limit) {
          current->fixes.emplace_back(j, 0);
        } else if (x[j] >= 1.0 - kIntegralityTol && obj - d[j] >= limit) {
          current->fixes.emplace_back(j, 1);
        }
      }
    }

    Node down = *current;
    down.fixes.emplace_back(branch, 0);
    down.bound = obj;
    down.id = next_id++;
    Node up = *current;
    up.fixes.emplace_back(branch, 1);
    up.bound = obj;
    up.id = next_id++;
    if (x[branch] >= 0.5) {
      open.push(std::move(down));
      current = std::move(up);
    } else {
      open.push(std::move(up));
      current = std::move(down);
    }
  }

  sol.iterations = lp.iterations();
  double bound = pruned_bound;
  if (!open.empty()) bound = std::min(bound, open.top().bound);
  if (current) bound = std::min(bound, current->bound);
  if (std::isfinite(incumbent)) {
    bound = std::min(bound, incumbent);
    sol.objective = incumbent;
  }
  sol.best_bound = bound;
  sol.relative_gap = relative_gap(incumbent, bound);

  if (failed) {
    sol.status = SolveStatus::numerical_failure;
  } else if (unbounded) {
    sol.status = SolveStatus::unbounded;
    sol.values.clear();
  } else if (limit_hit) {
    sol.status = SolveStatus::gap_limit;
  } else if (std::isfinite(incumbent)) {
    sol.status = SolveStatus::optimal;
  } else {
    sol.status = SolveStatus::infeasible;
  }
  return sol;
}

MilpSolution fix_binaries_and_dualize(const MilpProblem& p,
                                      const MilpSolution& sol,
                                      const SolverConfig& cfg) {
  if (!sol.has_point()) {
    throw SolveError("fix_binaries_and_dualize: solution has no point");
  }
  MilpProblem fixed = p;
  for (int j = 0; j < p.num_vars(); ++j) {
    if (!p.binary_mask()[j]) continue;
    const double v = std::round(sol.values[j]);
    if (std::abs(v - sol.values[j]) > kIntegralityTol) {
      throw SolveError("fix_binaries_and_dualize: binary " +
                       p.column_label(j) + " is fractional");
    }
    fixed.set_bounds(j, v, v);
  }
  MilpSolution lp = solve_lp(fixed, cfg);
  if (lp.status != SolveStatus::optimal) {
    throw SolveError(std::string("fixed-binary LP is ") +
                     to_string(lp.status));
  }
  return lp;
}

}  // namespace ctax::milp
