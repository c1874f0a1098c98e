#pragma once

// Mixed-binary linear programs and a self-contained solver.
//
// Problems are stored row-wise with sparse coefficients. Every row carries a
// sense and right-hand side; ranged rows (lo <= a.x <= hi) are supported so
// two-sided constraints such as ramp limits cost a single row.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ctax::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { less_equal, equal, greater_equal, ranged };

struct Term {
  int col;
  double coef;
};

struct Row {
  std::string label;
  std::vector<Term> terms;
  Sense sense = Sense::less_equal;
  double rhs = 0.0;
  // Lower side of a ranged row; rhs is the upper side.
  double range_lower = 0.0;

  double lower() const;
  double upper() const;
};

class MilpProblem {
 public:
  int add_column(std::string label, double lower, double upper, double cost,
                 bool binary = false);
  int add_row(std::string label, std::vector<Term> terms, Sense sense,
              double rhs);
  int add_ranged_row(std::string label, std::vector<Term> terms, double lower,
                     double upper);

  int num_vars() const { return static_cast<int>(objective_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }

  const std::vector<double>& objective() const { return objective_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<bool>& binary_mask() const { return binary_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::string& column_label(int j) const { return col_labels_[j]; }
  const std::string& row_label(int r) const { return rows_[r].label; }

  std::optional<int> find_column(const std::string& label) const;
  std::optional<int> find_row(const std::string& label) const;

  void set_bounds(int col, double lower, double upper);
  void set_cost(int col, double cost);
  void set_binary(int col, bool binary);

  // Constant added to every objective value (terms fixed by data).
  double objective_offset = 0.0;

  int num_binaries() const;

  // Structural problems, e.g. inverted bounds or duplicate labels. Empty when
  // the problem is well formed.
  std::vector<std::string> check() const;

  // Objective value of a point, including the offset.
  double evaluate(const std::vector<double>& x) const;
  // Largest bound or row violation of a point.
  double max_violation(const std::vector<double>& x) const;
  double row_activity(int r, const std::vector<double>& x) const;

 private:
  std::vector<double> objective_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<bool> binary_;
  std::vector<std::string> col_labels_;
  std::vector<Row> rows_;
  std::unordered_map<std::string, int> col_index_;
  std::unordered_map<std::string, int> row_index_;
};

enum class SolveStatus {
  optimal,
  infeasible,
  unbounded,
  gap_limit,
  numerical_failure,
};

const char* to_string(SolveStatus s);

struct MilpSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  std::vector<double> values;
  double objective = 0.0;
  double relative_gap = 0.0;
  double best_bound = 0.0;
  // Row duals as d(objective)/d(rhs); present only for pure-LP solves.
  std::optional<std::vector<double>> duals;
  std::optional<std::vector<double>> reduced_costs;
  std::int64_t nodes = 0;
  std::int64_t iterations = 0;
  // Incumbent objective each time it improved, in discovery order.
  std::vector<double> incumbent_history;

  bool ok() const { return status == SolveStatus::optimal; }
  bool has_point() const { return !values.empty(); }
};

enum class BranchingRule { most_fractional, first_fractional };

struct SolverConfig {
  double relative_mip_gap = 1e-3;
  double feasibility_tolerance = 1e-7;
  std::int64_t max_nodes = 2'000'000;
  double max_seconds = kInf;
  BranchingRule branching = BranchingRule::most_fractional;

  std::vector<std::string> check() const;
};

// LP solve. Binary flags are ignored: binaries are treated as continuous
// within their bounds, so callers relax or fix them beforehand.
MilpSolution solve_lp(const MilpProblem& p, const SolverConfig& cfg = {});

// Best-bound branch and bound with depth-first plunging.
MilpSolution solve_milp(const MilpProblem& p, const SolverConfig& cfg = {});

// Re-solves p with every binary fixed to its (rounded) value in sol and
// returns the resulting LP solution, duals included. Throws SolveError if the
// fixed problem is infeasible.
MilpSolution fix_binaries_and_dualize(const MilpProblem& p,
                                      const MilpSolution& sol,
                                      const SolverConfig& cfg = {});

// Plain-text listing, one constraint per line. For inspection only.
void write_lp_listing(const MilpProblem& p, std::ostream& os);

}  // namespace ctax::milp
