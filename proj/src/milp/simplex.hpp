#pragma once

// Dense bounded-variable tableau simplex.
//
// Every row r of the problem becomes a_r.x - y_r = 0 with a logical y_r whose
// bounds carry the row sense, so the working system has n + m columns and a
// zero right-hand side. The tableau holds B^-1 [A | -I] in row-major order
// with one row per basic variable; reduced costs are kept alongside and
// updated on each pivot.
//
// Bounds never enter the tableau, only the point, which lets branch and bound
// change bounds in place and reoptimize with the dual method from whatever
// basis the previous node finished in.

#include <cstdint>
#include <vector>

#include "ctax/milp.hpp"

namespace ctax::milp::detail {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

class BoundedSimplex {
 public:
  BoundedSimplex(const MilpProblem& p, double feasibility_tolerance);

  // Changes the bounds of structural column j. Takes effect at the next
  // optimize().
  void set_bounds(int j, double lower, double upper);
  double lower(int j) const { return lo_[j]; }
  double upper(int j) const { return hi_[j]; }

  LpStatus optimize();

  double objective() const;
  std::vector<double> primal() const;
  // d(objective)/d(rhs) per row.
  std::vector<double> row_duals() const;
  std::vector<double> reduced_costs() const;
  std::int64_t iterations() const { return iterations_; }

 private:
  enum class Step { done, progress, blocked };

  double& at(int i, int j) { return tab_[static_cast<std::size_t>(i) * N_ + j]; }
  double at(int i, int j) const {
    return tab_[static_cast<std::size_t>(i) * N_ + j];
  }

  void reset_tableau();
  void reinvert();
  void recompute_basics();
  void pivot(int r, int q);
  void move_nonbasic(int j, double value);

  bool place_nonbasics(bool wide_artificials);
  void drop_artificials();
  bool primal_infeasible() const;
  double row_residual() const;

  LpStatus optimize_once(bool wide_artificials);
  LpStatus dual_simplex();
  LpStatus primal_simplex();
  Step dual_iteration(bool bland);
  Step primal_iteration(bool bland);

  bool at_lower(int j) const { return x_[j] <= wlo_[j]; }
  bool at_upper(int j) const { return x_[j] >= whi_[j]; }

  int m_ = 0;
  int n_ = 0;
  int N_ = 0;
  const MilpProblem* problem_;
  double ptol_;
  double dtol_;

  std::vector<double> tab_;
  std::vector<double> cost_;
  std::vector<double> d_;
  std::vector<double> x_;
  // True bounds and working bounds; they differ while artificial bounds are
  // placed on variables that would otherwise start dual infeasible.
  std::vector<double> lo_, hi_;
  std::vector<double> wlo_, whi_;
  std::vector<int> head_;
  std::vector<int> where_;
  std::vector<int> nz_;

  std::int64_t iterations_ = 0;
  std::int64_t budget_ = 0;
  std::int64_t since_reinvert_ = 0;
  bool artificial_ = false;
  bool retry_wide_ = false;
};

}  // namespace ctax::milp::detail
