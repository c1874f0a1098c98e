#pragma once

// Upper-level tax algorithms: weighted sum bisection (WSB), the constrained
// emission marginal value baseline (CEMV) and Pareto sampling.

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "ctax/milp.hpp"
#include "ctax/system.hpp"
#include "ctax/ucct.hpp"

namespace ctax::tax {

struct TaxSearchConfig {
  double target_emissions = 0.0;  // tons per day, expected
  double tax_low = 0.0;
  double tax_high = 100.0;
  double tolerance = 0.01;
  // When set, a tax is feasible iff Prob[annual emissions <= 365 * target]
  // reaches this level.
  std::optional<double> certainty_level;
  int max_iterations = 64;
  int jobs = 1;

  std::vector<std::string> check() const;
};

enum class Step { upper_check, lower_check, bisection };
const char* to_string(Step s);

struct TaxIteration {
  Step step = Step::bisection;
  double tax = 0.0;
  double emissions = 0.0;      // expected tons per day
  double expected_cost = 0.0;  // $ per day
  // Attainment probability when a certainty level is configured, else NaN.
  double probability = 0.0;
  bool feasible = false;
};

struct TaxSearchResult {
  double optimal_tax = 0.0;
  std::vector<TaxIteration> iterations;
  ucct::UcctResult final;
  bool converged = false;
  int bisection_steps = 0;
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  std::string message;
};

// Memo of UCCT solves keyed by system fingerprint, tax, flags and solver
// settings. Thread safe.
class SolveCache {
 public:
  ucct::UcctResult solve(const SystemData& sys, std::uint64_t fingerprint,
                         double tax, const milp::SolverConfig& cfg, int jobs);
  std::size_t size() const;
  std::size_t hits() const;

 private:
  using Key = std::tuple<std::uint64_t, double, double, double, int>;
  mutable std::mutex mu_;
  std::map<Key, ucct::UcctResult> entries_;
  std::size_t hits_ = 0;
};

// Feasibility test shared by wsb and its callers.
bool meets_target(const ucct::UcctResult& r, const TaxSearchConfig& cfg,
                  double* probability = nullptr);

TaxSearchResult wsb(const SystemData& sys, const TaxSearchConfig& cfg,
                    const milp::SolverConfig& solver = {},
                    SolveCache* cache = nullptr);

// One MILP over all days with a probability-weighted emissions cap.
struct CoupledModel {
  milp::MilpProblem problem;
  std::vector<ucct::DayModel> days;
  std::vector<int> column_offset;  // per day
  int cap_row = -1;
};
CoupledModel build_coupled_milp(const SystemData& sys, double cap);

struct CapSolve {
  bool feasible = false;
  double cap = 0.0;
  double expected_cost = 0.0;
  double expected_emissions = 0.0;
  double lambda = 0.0;  // $/ton, marginal value of the cap
  double relative_gap = 0.0;
};
// Minimum-cost commitment under the cap. Infeasible caps come back with
// feasible = false.
CapSolve solve_with_cap(const SystemData& sys, double cap,
                        const milp::SolverConfig& solver = {});

struct CemvResult {
  CapSolve capped;
  // UCCT re-solved at tax = lambda.
  ucct::UcctResult realized;
  double realized_emissions = 0.0;
  bool meets_target = false;
};
// InfeasibleError when no commitment satisfies the cap.
CemvResult cemv(const SystemData& sys, double target,
                const milp::SolverConfig& solver = {}, int jobs = 1);

enum class SweepMode { cap, tax };

struct ParetoPoint {
  double parameter = 0.0;  // cap (tons/day) or tax ($/ton)
  double expected_cost = 0.0;
  double expected_emissions = 0.0;
  std::optional<double> lambda;
  bool feasible = true;
};

struct ParetoSample {
  SweepMode mode = SweepMode::cap;
  std::vector<ParetoPoint> points;
};

// n equally spaced caps over [low, high], inclusive.
ParetoSample sample_pareto_by_cap(const SystemData& sys, int n_points,
                                  double low, double high,
                                  const milp::SolverConfig& solver = {},
                                  int jobs = 1);
ParetoSample sample_pareto_by_tax(const SystemData& sys,
                                  const std::vector<double>& taxes,
                                  const milp::SolverConfig& solver = {},
                                  int jobs = 1, SolveCache* cache = nullptr);

void write_iterations_csv(const TaxSearchResult& r, std::ostream& out);
void write_pareto_csv(const ParetoSample& s, std::ostream& out);

}  // namespace ctax::tax
