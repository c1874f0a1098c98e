#pragma once

// Unit commitment with a carbon tax, one mixed-binary LP per representative
// day. Day problems are unweighted; probabilities enter at aggregation.

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "ctax/milp.hpp"
#include "ctax/system.hpp"

namespace ctax::ucct {

inline constexpr double kReserveLoadShare = 0.03;
inline constexpr double kReserveRenewableShare = 0.05;

// Column and row indices of one assembled day. -1 marks an entry that does
// not exist in this model (e.g. startups under the TCED relaxation, or any
// commitment variable of a renewable unit).
struct DayModel {
  milp::MilpProblem problem;
  int day = 0;
  double tax = 0.0;
  ModelFlags flags;

  // [generator][hour]
  std::vector<std::vector<int>> u, v, z, g;
  // [generator][block][hour]
  std::vector<std::vector<std::vector<int>>> block;
  // [generator][hour]
  std::vector<std::vector<int>> rho_up, rho_down;
  std::vector<std::vector<int>> flow;       // [line][hour]
  std::vector<std::vector<int>> theta;      // [bus][hour]
  std::vector<std::vector<int>> shed_load;  // [bus][hour]
  std::vector<std::vector<int>> shed_ren;   // [bus][hour]

  std::vector<std::vector<int>> balance_row;  // [bus][hour]
  std::vector<int> reserve_row;               // [hour]
  int gas_row = -1;

  // Generator data as modelled, after the TCED transformation if active.
  std::vector<Generator> units;
  // Renewable availability [generator][hour]; zero rows for thermal units.
  std::vector<std::vector<double>> renewable_cap;
};

// Reserve requirement of one hour: 3% of load + 5% of renewable output + the
// largest unit.
double reserve_requirement(double total_load, double renewable_output,
                           double largest_unit);

// Model the given day. Throws ValidationError for invalid flags or a day whose
// data do not match the horizon.
DayModel build_day_milp(const SystemData& sys, int day, double tax,
                        const ModelFlags& flags);
inline DayModel build_day_milp(const SystemData& sys, int day, double tax) {
  return build_day_milp(sys, day, tax, sys.flags);
}

// Day emissions of a model as a linear expression plus a constant (renewable
// and always-committed terms).
struct LinearExpression {
  std::vector<milp::Term> terms;
  double constant = 0.0;
};
LinearExpression emission_expression(const DayModel& model);

struct UcctDaySolution {
  std::string day_id;
  double probability = 0.0;
  // [generator][hour]; renewable units are reported as committed with g
  // equal to delivered output.
  std::vector<std::vector<int>> u, v, z;
  std::vector<std::vector<double>> g;
  std::vector<std::vector<std::vector<double>>> block;
  std::vector<std::vector<double>> flow;       // [line][hour]
  std::vector<std::vector<double>> theta;      // [bus][hour]
  std::vector<std::vector<double>> shed_load;  // [bus][hour]
  std::vector<std::vector<double>> shed_ren;   // [bus][hour]
  // [bus][hour]; empty until extract_prices.
  std::vector<std::vector<double>> lmp;

  double emissions = 0.0;  // tons
  double gen_cost = 0.0;   // $
  double shed_cost = 0.0;  // $
  double objective = 0.0;  // gen + shed + tax * emissions, as solved
  double relative_gap = 0.0;
  std::int64_t nodes = 0;
  // Raw solver point, kept for price extraction.
  std::vector<double> values;
};

struct UcctResult {
  std::vector<UcctDaySolution> days;
  double tax_rate = 0.0;
  double expected_gen_cost = 0.0;
  double expected_shed_cost = 0.0;
  double expected_cost = 0.0;       // gen + shed
  double expected_emissions = 0.0;  // tons per day
  double tax_revenue = 0.0;         // tax * expected emissions
  double objective = 0.0;           // expected cost + tax revenue
  std::map<Fuel, double> energy_by_fuel;  // expected MWh per day
  // Populated by extract_prices; indexed like SystemData::generators.
  std::vector<double> profit;
  double congestion_surplus = 0.0;
  bool prices_extracted = false;
  ModelFlags flags;
};

// Solves every day (concurrently up to jobs threads) and aggregates in day
// order. InfeasibleError names the first infeasible day.
UcctResult solve_ucct(const SystemData& sys, double tax,
                      const milp::SolverConfig& cfg, const ModelFlags& flags,
                      int jobs = 1);
inline UcctResult solve_ucct(const SystemData& sys, double tax,
                             const milp::SolverConfig& cfg = {}, int jobs = 1) {
  return solve_ucct(sys, tax, cfg, sys.flags, jobs);
}

// Decodes a solver point of a day model into a day solution with its cost and
// emission accounting.
UcctDaySolution decode_day(const SystemData& sys, const DayModel& model,
                           const std::vector<double>& x);

// Fixes each day's binaries, re-solves the LP and fills LMPs, per-generator
// profit and the congestion surplus.
void extract_prices(const SystemData& sys, UcctResult& result,
                    const milp::SolverConfig& cfg = {});

// Largest residual of the equality structure of one day: generation
// identity, startup logic, minimum up and down times, ramps, bus balance,
// flow definition and limits, and shed bounds. Scaled by the largest demand.
struct Residuals {
  double generation = 0.0;
  double logic = 0.0;
  double min_up_down = 0.0;
  double ramp = 0.0;
  double balance = 0.0;
  double flow = 0.0;
  double shed = 0.0;
  double max() const;
};
Residuals day_residuals(const SystemData& sys, const UcctDaySolution& day,
                        const ModelFlags& flags);

// CSV exports (fixed six-decimal formatting).
void write_dispatch_csv(const SystemData& sys, const UcctResult& r,
                        std::ostream& out);
void write_prices_csv(const SystemData& sys, const UcctResult& r,
                      std::ostream& out);
void write_summary_csv(const UcctResult& r, std::ostream& out);
void write_days_csv(const UcctResult& r, std::ostream& out);
void write_generators_csv(const SystemData& sys, const UcctResult& r,
                          std::ostream& out);

}  // namespace ctax::ucct
