#pragma once

// Static description of a power system over a set of representative days,
// plus the scenario transforms used for sensitivity cases.
//
// Everything is carried in physical units (MW, MWh, $, tons). Renewable
// availability is an hourly per-unit ceiling stored on each day.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ctax {

enum class Fuel { coal, gas, oil, nuclear, hydro, wind, other };

const char* to_string(Fuel f);
// Throws ParseError on an unknown name.
Fuel parse_fuel(const std::string& name);

struct Bus {
  std::string id;
  std::string name;
};

struct Line {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double reactance = 0.0;  // ohms
  double capacity = 0.0;   // MW
};

struct CostBlock {
  double width = 0.0;          // MW
  double marginal_cost = 0.0;  // $/MWh
  double marginal_emis = 0.0;  // tons/MWh
};

struct Generator {
  std::string id;
  std::string bus;
  Fuel fuel = Fuel::other;
  bool is_renewable = false;
  double g_min = 0.0;
  double g_max = 0.0;
  std::vector<CostBlock> blocks;
  double c_min = 0.0;      // $/h while committed
  double c_startup = 0.0;  // $ per start
  double e_min = 0.0;      // tons/h while committed
  double e_startup = 0.0;  // tons per start
  int min_up = 1;
  int min_down = 1;
  double ramp_up = 0.0;    // MW/h
  double ramp_down = 0.0;  // MW/h
};

struct RepresentativeDay {
  std::string id;
  double probability = 0.0;
  // demand[b][t], b in the order of SystemData::buses.
  std::vector<std::vector<double>> demand;
  // Hourly availability ceiling per renewable generator id.
  std::map<std::string, std::vector<double>> renewable_cap;
  // Flexibility requirements. Empty means derived from the day's data: 1% of
  // hourly system load for load ramps, 20% of hourly wind availability for
  // each wind direction.
  std::vector<double> load_ramp_req;
  std::vector<double> wind_up_req;
  std::vector<double> wind_down_req;
};

// Switches set by scenario transforms and consumed by the model builder.
struct ModelFlags {
  // Daily gas energy as a fraction of daily demand.
  std::optional<double> gas_energy_fraction;
  bool relax_flexibility = false;
  bool tced_relaxation = false;

  bool operator==(const ModelFlags&) const = default;
};

struct SystemData {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<RepresentativeDay> days;
  double shed_penalty = 10000.0;  // $/MWh
  double spill_penalty = 20.0;    // $/MWh
  int horizon = 24;
  ModelFlags flags;

  std::optional<int> bus_index(const std::string& id) const;
  std::optional<int> generator_index(const std::string& id) const;
};

// Effective hourly flexibility requirements for day a.
struct FlexRequirement {
  std::vector<double> load_ramp;
  std::vector<double> wind_up;
  std::vector<double> wind_down;
};
FlexRequirement flex_requirement(const SystemData& sys, int day);

// Every violated invariant, in a fixed order. Empty iff the system is valid.
std::vector<std::string> validate(const SystemData& sys);

// Parse and validate. ParseError for malformed documents, ValidationError
// naming the first violation otherwise.
SystemData load_system(const std::string& path);
SystemData parse_system(const std::string& json_text);
std::string to_json_text(const SystemData& sys, int indent = 2);
// Serialized representative days only, as they appear in a system file.
std::string days_to_json_text(const std::vector<RepresentativeDay>& days,
                              const std::vector<Bus>& buses, int indent = 2);

// FNV-1a over the canonical serialization.
std::uint64_t fingerprint(const SystemData& sys);

namespace scenario {

struct WindScale {
  double factor;
};
struct RetireCoal {
  std::optional<int> count;
  std::vector<std::string> ids;
};
struct AddGenerator {
  Generator generator;
};
struct GasPriceScale {
  double factor;
};
struct GasEnergyLimit {
  double fraction;
};
struct LoadScale {
  double factor;
};
struct TransmissionScale {
  double factor;
};
struct RelaxFlexibility {
  bool enabled = true;
};
struct TcedRelaxation {
  bool enabled = true;
};

using Transform =
    std::variant<WindScale, RetireCoal, AddGenerator, GasPriceScale,
                 GasEnergyLimit, LoadScale, TransmissionScale,
                 RelaxFlexibility, TcedRelaxation>;

}  // namespace scenario

struct ScenarioSpec {
  std::vector<scenario::Transform> transforms;
};

ScenarioSpec load_scenario(const std::string& path);
ScenarioSpec parse_scenario(const std::string& json_text);
std::string to_json_text(const ScenarioSpec& spec, int indent = 2);

// Coal units in retirement order: highest first-block marginal cost first,
// ties by id.
std::vector<std::string> coal_retirement_order(const SystemData& sys);

// New system with the transforms applied in order. Throws ValidationError
// when a transform does not fit the system.
SystemData apply_scenario(const SystemData& base, const ScenarioSpec& spec);

}  // namespace ctax
