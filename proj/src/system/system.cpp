#include "ctax/system.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ctax/errors.hpp"
#include "json.hpp"

namespace ctax {

using nlohmann::json;

namespace {

constexpr const char* kFuelNames[] = {"coal",    "gas",   "oil", "nuclear",
                                      "hydro",   "wind",  "other"};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Field access with the location named in every error.
const json& need(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field \"" + key + "\"");
  }
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ParseError(where + ": expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ParseError(where + ": expected true or false");
  return v.get<bool>();
}

double num_or(const json& obj, const char* key, double fallback,
              const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return as_number(*it, where + "." + key);
}

std::vector<double> as_series(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(as_number(v[k], where + "[" + std::to_string(k) + "]"));
  }
  return out;
}

const json& as_array(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array");
  return v;
}

// Standard generator shape; defaults documented in docs/formats.md.
Generator parse_generator(const json& g, const std::string& where) {
  Generator out;
  out.id = as_string(need(g, "id", where), where + ".id");
  const std::string at = "generator " + out.id;
  out.bus = as_string(need(g, "bus", at), at + ".bus");
  out.fuel = parse_fuel(as_string(need(g, "fuel", at), at + ".fuel"));
  if (auto it = g.find("is_renewable"); it != g.end()) {
    out.is_renewable = as_bool(*it, at + ".is_renewable");
  } else {
    out.is_renewable = out.fuel == Fuel::wind;
  }
  out.g_max = as_number(need(g, "g_max", at), at + ".g_max");
  out.g_min = num_or(g, "g_min", 0.0, at);
  const json& blocks = as_array(need(g, "blocks", at), at + ".blocks");
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    const std::string bw = at + ".blocks[" + std::to_string(s) + "]";
    CostBlock b;
    b.width = as_number(need(blocks[s], "width", bw), bw + ".width");
    b.marginal_cost =
        as_number(need(blocks[s], "marginal_cost", bw), bw + ".marginal_cost");
    b.marginal_emis =
        as_number(need(blocks[s], "marginal_emis", bw), bw + ".marginal_emis");
    out.blocks.push_back(b);
  }
  out.c_min = num_or(g, "c_min", 0.0, at);
  out.c_startup = num_or(g, "c_startup", 0.0, at);
  out.e_min = num_or(g, "e_min", 0.0, at);
  out.e_startup = num_or(g, "e_startup", 0.0, at);
  if (auto it = g.find("min_up"); it != g.end()) {
    out.min_up = as_int(*it, at + ".min_up");
  }
  if (auto it = g.find("min_down"); it != g.end()) {
    out.min_down = as_int(*it, at + ".min_down");
  }
  out.ramp_up = num_or(g, "ramp_up", out.g_max, at);
  out.ramp_down = num_or(g, "ramp_down", out.g_max, at);
  return out;
}

json generator_json(const Generator& g) {
  json blocks = json::array();
  for (const auto& b : g.blocks) {
    blocks.push_back({{"width", b.width},
                      {"marginal_cost", b.marginal_cost},
                      {"marginal_emis", b.marginal_emis}});
  }
  return {{"id", g.id},
          {"bus", g.bus},
          {"fuel", to_string(g.fuel)},
          {"is_renewable", g.is_renewable},
          {"g_min", g.g_min},
          {"g_max", g.g_max},
          {"blocks", blocks},
          {"c_min", g.c_min},
          {"c_startup", g.c_startup},
          {"e_min", g.e_min},
          {"e_startup", g.e_startup},
          {"min_up", g.min_up},
          {"min_down", g.min_down},
          {"ramp_up", g.ramp_up},
          {"ramp_down", g.ramp_down}};
}

json day_json(const RepresentativeDay& d, const std::vector<Bus>& buses) {
  json demand = json::object();
  for (std::size_t b = 0; b < buses.size() && b < d.demand.size(); ++b) {
    demand[buses[b].id] = d.demand[b];
  }
  json caps = json::object();
  for (const auto& [id, series] : d.renewable_cap) caps[id] = series;
  json out = {{"id", d.id},
              {"probability", d.probability},
              {"demand", demand},
              {"renewable_cap", caps}};
  if (!d.load_ramp_req.empty()) out["load_ramp_req"] = d.load_ramp_req;
  if (!d.wind_up_req.empty()) out["wind_up_req"] = d.wind_up_req;
  if (!d.wind_down_req.empty()) out["wind_down_req"] = d.wind_down_req;
  return out;
}

json system_json(const SystemData& sys) {
  json buses = json::array();
  for (const auto& b : sys.buses) buses.push_back({{"id", b.id}, {"name", b.name}});
  json lines = json::array();
  for (const auto& l : sys.lines) {
    lines.push_back({{"id", l.id},
                     {"from_bus", l.from_bus},
                     {"to_bus", l.to_bus},
                     {"reactance", l.reactance},
                     {"capacity", l.capacity}});
  }
  json gens = json::array();
  for (const auto& g : sys.generators) gens.push_back(generator_json(g));
  json days = json::array();
  for (const auto& d : sys.days) days.push_back(day_json(d, sys.buses));
  json out = {{"buses", buses},
              {"lines", lines},
              {"generators", gens},
              {"days", days},
              {"penalties",
               {{"shed_penalty", sys.shed_penalty},
                {"spill_penalty", sys.spill_penalty}}},
              {"horizon", sys.horizon}};
  json flags = json::object();
  if (sys.flags.gas_energy_fraction) {
    flags["gas_energy_fraction"] = *sys.flags.gas_energy_fraction;
  }
  if (sys.flags.relax_flexibility) flags["relax_flexibility"] = true;
  if (sys.flags.tced_relaxation) flags["tced_relaxation"] = true;
  if (!flags.empty()) out["flags"] = flags;
  return out;
}

RepresentativeDay parse_day(const json& d, const std::vector<Bus>& buses,
                            const std::string& where) {
  RepresentativeDay out;
  out.id = as_string(need(d, "id", where), where + ".id");
  const std::string at = "day " + out.id;
  out.probability = as_number(need(d, "probability", at), at + ".probability");
  const json& demand = need(d, "demand", at);
  if (!demand.is_object()) {
    throw ParseError(at + ".demand: expected an object keyed by bus id");
  }
  for (const auto& [key, _] : demand.items()) {
    const bool known = std::any_of(buses.begin(), buses.end(),
                                   [&](const Bus& b) { return b.id == key; });
    if (!known) throw ParseError(at + ".demand: unknown bus \"" + key + "\"");
  }
  for (const auto& b : buses) {
    auto it = demand.find(b.id);
    if (it == demand.end()) {
      throw ParseError(at + ".demand: missing bus \"" + b.id + "\"");
    }
    out.demand.push_back(as_series(*it, at + ".demand." + b.id));
  }
  if (auto it = d.find("renewable_cap"); it != d.end()) {
    if (!it->is_object()) {
      throw ParseError(at + ".renewable_cap: expected an object");
    }
    for (const auto& [key, series] : it->items()) {
      out.renewable_cap[key] =
          as_series(series, at + ".renewable_cap." + key);
    }
  }
  if (auto it = d.find("load_ramp_req"); it != d.end()) {
    out.load_ramp_req = as_series(*it, at + ".load_ramp_req");
  }
  if (auto it = d.find("wind_up_req"); it != d.end()) {
    out.wind_up_req = as_series(*it, at + ".wind_up_req");
  }
  if (auto it = d.find("wind_down_req"); it != d.end()) {
    out.wind_down_req = as_series(*it, at + ".wind_down_req");
  }
  return out;
}

SystemData parse_system_json(const json& doc) {
  SystemData sys;
  const std::string top = "system";
  for (const auto& b : as_array(need(doc, "buses", top), "buses")) {
    Bus bus;
    bus.id = as_string(need(b, "id", "bus"), "bus.id");
    bus.name = b.contains("name") ? as_string(b["name"], "bus.name") : bus.id;
    sys.buses.push_back(bus);
  }
  for (const auto& l : as_array(need(doc, "lines", top), "lines")) {
    Line line;
    line.id = as_string(need(l, "id", "line"), "line.id");
    const std::string at = "line " + line.id;
    line.from_bus = as_string(need(l, "from_bus", at), at + ".from_bus");
    line.to_bus = as_string(need(l, "to_bus", at), at + ".to_bus");
    line.reactance = as_number(need(l, "reactance", at), at + ".reactance");
    line.capacity = as_number(need(l, "capacity", at), at + ".capacity");
    sys.lines.push_back(line);
  }
  const json& gens = as_array(need(doc, "generators", top), "generators");
  for (std::size_t k = 0; k < gens.size(); ++k) {
    sys.generators.push_back(
        parse_generator(gens[k], "generators[" + std::to_string(k) + "]"));
  }
  const json& pen = need(doc, "penalties", top);
  sys.shed_penalty =
      as_number(need(pen, "shed_penalty", "penalties"), "penalties.shed_penalty");
  sys.spill_penalty = as_number(need(pen, "spill_penalty", "penalties"),
                                "penalties.spill_penalty");
  sys.horizon = as_int(need(doc, "horizon", top), "horizon");
  const json& days = as_array(need(doc, "days", top), "days");
  for (std::size_t k = 0; k < days.size(); ++k) {
    sys.days.push_back(
        parse_day(days[k], sys.buses, "days[" + std::to_string(k) + "]"));
  }
  if (auto it = doc.find("flags"); it != doc.end()) {
    const json& f = *it;
    if (!f.is_object()) throw ParseError("flags: expected an object");
    if (auto g = f.find("gas_energy_fraction"); g != f.end()) {
      sys.flags.gas_energy_fraction =
          as_number(*g, "flags.gas_energy_fraction");
    }
    if (auto g = f.find("relax_flexibility"); g != f.end()) {
      sys.flags.relax_flexibility = as_bool(*g, "flags.relax_flexibility");
    }
    if (auto g = f.find("tced_relaxation"); g != f.end()) {
      sys.flags.tced_relaxation = as_bool(*g, "flags.tced_relaxation");
    }
  }
  return sys;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

void check_series(std::vector<std::string>& out, const std::string& what,
                  const std::vector<double>& series, int horizon,
                  bool allow_empty) {
  if (series.empty() && allow_empty) return;
  if (static_cast<int>(series.size()) != horizon) {
    out.push_back(what + " has " + std::to_string(series.size()) +
                  " hours, expected " + std::to_string(horizon));
    return;
  }
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (!(series[t] >= 0.0) || !std::isfinite(series[t])) {
      out.push_back(what + " hour " + std::to_string(t) +
                    " is negative or not finite");
      return;
    }
  }
}

}  // namespace

const char* to_string(Fuel f) { return kFuelNames[static_cast<int>(f)]; }

Fuel parse_fuel(const std::string& name) {
  for (int k = 0; k < 7; ++k) {
    if (name == kFuelNames[k]) return static_cast<Fuel>(k);
  }
  throw ParseError("unknown fuel \"" + name + "\"");
}

std::optional<int> SystemData::bus_index(const std::string& id) const {
  for (std::size_t b = 0; b < buses.size(); ++b) {
    if (buses[b].id == id) return static_cast<int>(b);
  }
  return std::nullopt;
}

std::optional<int> SystemData::generator_index(const std::string& id) const {
  for (std::size_t i = 0; i < generators.size(); ++i) {
    if (generators[i].id == id) return static_cast<int>(i);
  }
  return std::nullopt;
}

FlexRequirement flex_requirement(const SystemData& sys, int day) {
  const RepresentativeDay& d = sys.days[day];
  const int T = sys.horizon;
  FlexRequirement req;
  if (!d.load_ramp_req.empty()) {
    req.load_ramp = d.load_ramp_req;
  } else {
    req.load_ramp.assign(T, 0.0);
    for (const auto& row : d.demand) {
      for (int t = 0; t < T; ++t) req.load_ramp[t] += 0.01 * row[t];
    }
  }
  std::vector<double> wind(T, 0.0);
  for (const auto& g : sys.generators) {
    if (g.fuel != Fuel::wind) continue;
    auto it = d.renewable_cap.find(g.id);
    if (it == d.renewable_cap.end()) continue;
    for (int t = 0; t < T; ++t) wind[t] += 0.2 * it->second[t];
  }
  req.wind_up = d.wind_up_req.empty() ? wind : d.wind_up_req;
  req.wind_down = d.wind_down_req.empty() ? wind : d.wind_down_req;
  return req;
}

std::vector<std::string> validate(const SystemData& sys) {
  std::vector<std::string> out;
  if (sys.horizon < 1) out.push_back("horizon must be at least 1 hour");
  if (sys.buses.empty()) out.push_back("system has no buses");
  std::set<std::string> ids;
  for (const auto& b : sys.buses) {
    if (b.id.empty()) out.push_back("bus with empty id");
    if (!ids.insert(b.id).second) out.push_back("duplicate bus id " + b.id);
  }
  ids.clear();
  for (const auto& l : sys.lines) {
    const std::string at = "line " + l.id;
    if (!ids.insert(l.id).second) out.push_back("duplicate line id " + l.id);
    if (!sys.bus_index(l.from_bus)) {
      out.push_back(at + " starts at unknown bus " + l.from_bus);
    }
    if (!sys.bus_index(l.to_bus)) {
      out.push_back(at + " ends at unknown bus " + l.to_bus);
    }
    if (l.from_bus == l.to_bus) out.push_back(at + " connects a bus to itself");
    if (!(l.reactance > 0.0)) out.push_back(at + " reactance must be positive");
    if (!(l.capacity >= 0.0)) out.push_back(at + " capacity must be nonnegative");
  }
  ids.clear();
  for (const auto& g : sys.generators) {
    const std::string at = "generator " + g.id;
    if (!ids.insert(g.id).second) out.push_back("duplicate generator id " + g.id);
    if (!sys.bus_index(g.bus)) out.push_back(at + " at unknown bus " + g.bus);
    if (!(g.g_min >= 0.0) || !(g.g_min <= g.g_max)) {
      out.push_back(at + " needs 0 <= g_min <= g_max (g_min " + fmt(g.g_min) +
                    ", g_max " + fmt(g.g_max) + ")");
    }
    double width = 0.0;
    bool negative = false;
    for (std::size_t s = 0; s < g.blocks.size(); ++s) {
      const auto& b = g.blocks[s];
      width += b.width;
      negative = negative || !(b.width >= 0.0) || !(b.marginal_cost >= 0.0) ||
                 !(b.marginal_emis >= 0.0);
      if (s > 0 && b.marginal_cost < g.blocks[s - 1].marginal_cost) {
        out.push_back(at + " block costs must be nondecreasing");
      }
    }
    if (std::abs(width - (g.g_max - g.g_min)) >
        1e-9 * std::max(1.0, g.g_max)) {
      out.push_back(at + " block widths sum to " + fmt(width) +
                    ", expected g_max - g_min = " + fmt(g.g_max - g.g_min));
    }
    if (negative || !(g.c_min >= 0.0) || !(g.c_startup >= 0.0) ||
        !(g.e_min >= 0.0) || !(g.e_startup >= 0.0)) {
      out.push_back(at + " has a negative cost, emission or width");
    }
    if (g.min_up < 1 || g.min_up > sys.horizon || g.min_down < 1 ||
        g.min_down > sys.horizon) {
      out.push_back(at + " min up/down times must lie in [1, horizon]");
    }
    if (!(g.ramp_up > 0.0) || !(g.ramp_down > 0.0)) {
      out.push_back(at + " ramp rates must be positive");
    }
  }

  if (sys.days.empty()) out.push_back("system has no representative days");
  ids.clear();
  double total = 0.0;
  for (const auto& d : sys.days) {
    const std::string at = "day " + d.id;
    if (!ids.insert(d.id).second) out.push_back("duplicate day id " + d.id);
    if (!(d.probability >= 0.0 && d.probability <= 1.0)) {
      out.push_back(at + " probability must lie in [0, 1]");
    }
    total += d.probability;
    if (d.demand.size() != sys.buses.size()) {
      out.push_back(at + " demand needs one row per bus");
    } else {
      for (std::size_t b = 0; b < d.demand.size(); ++b) {
        check_series(out, at + " demand at " + sys.buses[b].id, d.demand[b],
                     sys.horizon, false);
      }
    }
    for (const auto& [id, series] : d.renewable_cap) {
      auto gi = sys.generator_index(id);
      if (!gi || !sys.generators[*gi].is_renewable) {
        out.push_back(at + " renewable_cap names " + id +
                      ", which is not a renewable generator");
        continue;
      }
      check_series(out, at + " renewable_cap of " + id, series, sys.horizon,
                   false);
    }
    for (const auto& g : sys.generators) {
      if (g.is_renewable && !d.renewable_cap.count(g.id)) {
        out.push_back(at + " lacks renewable_cap for " + g.id);
      }
    }
    check_series(out, at + " load_ramp_req", d.load_ramp_req, sys.horizon, true);
    check_series(out, at + " wind_up_req", d.wind_up_req, sys.horizon, true);
    check_series(out, at + " wind_down_req", d.wind_down_req, sys.horizon, true);
  }
  if (!sys.days.empty() && std::abs(total - 1.0) > 1e-9) {
    out.push_back("day probabilities sum to " + fmt(total) + ", expected 1");
  }
  if (!(sys.shed_penalty >= 0.0) || !(sys.spill_penalty >= 0.0)) {
    out.push_back("penalties must be nonnegative");
  }
  if (sys.flags.gas_energy_fraction) {
    const double f = *sys.flags.gas_energy_fraction;
    if (!(f > 0.0 && f <= 1.0)) {
      out.push_back("gas energy fraction must lie in (0, 1]");
    }
  }
  return out;
}

SystemData parse_system(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("system file is not valid JSON: ") + e.what());
  }
  SystemData sys = parse_system_json(doc);
  auto issues = validate(sys);
  if (!issues.empty()) throw ValidationError(issues.front());
  return sys;
}

SystemData load_system(const std::string& path) {
  return parse_system(read_file(path));
}

std::string to_json_text(const SystemData& sys, int indent) {
  return system_json(sys).dump(indent);
}

std::string days_to_json_text(const std::vector<RepresentativeDay>& days,
                              const std::vector<Bus>& buses, int indent) {
  json arr = json::array();
  for (const auto& d : days) arr.push_back(day_json(d, buses));
  return json{{"days", arr}}.dump(indent);
}

std::uint64_t fingerprint(const SystemData& sys) {
  const std::string text = system_json(sys).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Scenarios

namespace {

double positive_factor(const json& t, const std::string& where) {
  const double f = as_number(need(t, "factor", where), where + ".factor");
  if (!(f > 0.0)) throw ValidationError(where + ": factor must be positive");
  return f;
}

bool enabled_or_true(const json& t, const std::string& where) {
  auto it = t.find("enabled");
  return it == t.end() ? true : as_bool(*it, where + ".enabled");
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario file is not valid JSON: ") +
                     e.what());
  }
  ScenarioSpec spec;
  const json& list = as_array(need(doc, "transforms", "scenario"), "transforms");
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string where = "transforms[" + std::to_string(k) + "]";
    const json& t = list[k];
    const std::string type = as_string(need(t, "type", where), where + ".type");
    using namespace scenario;
    if (type == "wind_scale") {
      spec.transforms.push_back(WindScale{positive_factor(t, where)});
    } else if (type == "retire_coal") {
      RetireCoal r;
      if (auto it = t.find("count"); it != t.end()) {
        r.count = as_int(*it, where + ".count");
        if (*r.count < 0) throw ValidationError(where + ": negative count");
      }
      if (auto it = t.find("ids"); it != t.end()) {
        for (const auto& id : as_array(*it, where + ".ids")) {
          r.ids.push_back(as_string(id, where + ".ids"));
        }
      }
      if (r.count.has_value() == !r.ids.empty()) {
        throw ParseError(where + ": retire_coal takes exactly one of count, ids");
      }
      spec.transforms.push_back(r);
    } else if (type == "add_generator") {
      spec.transforms.push_back(AddGenerator{
          parse_generator(need(t, "generator", where), where + ".generator")});
    } else if (type == "gas_price_scale") {
      spec.transforms.push_back(GasPriceScale{positive_factor(t, where)});
    } else if (type == "gas_energy_limit") {
      const double f =
          as_number(need(t, "fraction", where), where + ".fraction");
      if (!(f > 0.0 && f <= 1.0)) {
        throw ValidationError(where + ": fraction must lie in (0, 1]");
      }
      spec.transforms.push_back(GasEnergyLimit{f});
    } else if (type == "load_scale") {
      spec.transforms.push_back(LoadScale{positive_factor(t, where)});
    } else if (type == "transmission_scale") {
      spec.transforms.push_back(TransmissionScale{positive_factor(t, where)});
    } else if (type == "relax_flexibility") {
      spec.transforms.push_back(RelaxFlexibility{enabled_or_true(t, where)});
    } else if (type == "tced_relaxation") {
      spec.transforms.push_back(TcedRelaxation{enabled_or_true(t, where)});
    } else {
      throw ParseError(where + ": unknown transform type \"" + type + "\"");
    }
  }
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  return parse_scenario(read_file(path));
}

std::string to_json_text(const ScenarioSpec& spec, int indent) {
  using namespace scenario;
  json list = json::array();
  for (const auto& tr : spec.transforms) {
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, WindScale>) {
            list.push_back({{"type", "wind_scale"}, {"factor", t.factor}});
          } else if constexpr (std::is_same_v<T, RetireCoal>) {
            json j = {{"type", "retire_coal"}};
            if (t.count) j["count"] = *t.count;
            if (!t.ids.empty()) j["ids"] = t.ids;
            list.push_back(j);
          } else if constexpr (std::is_same_v<T, AddGenerator>) {
            list.push_back({{"type", "add_generator"},
                            {"generator", generator_json(t.generator)}});
          } else if constexpr (std::is_same_v<T, GasPriceScale>) {
            list.push_back({{"type", "gas_price_scale"}, {"factor", t.factor}});
          } else if constexpr (std::is_same_v<T, GasEnergyLimit>) {
            list.push_back(
                {{"type", "gas_energy_limit"}, {"fraction", t.fraction}});
          } else if constexpr (std::is_same_v<T, LoadScale>) {
            list.push_back({{"type", "load_scale"}, {"factor", t.factor}});
          } else if constexpr (std::is_same_v<T, TransmissionScale>) {
            list.push_back(
                {{"type", "transmission_scale"}, {"factor", t.factor}});
          } else if constexpr (std::is_same_v<T, RelaxFlexibility>) {
            list.push_back(
                {{"type", "relax_flexibility"}, {"enabled", t.enabled}});
          } else {
            list.push_back(
                {{"type", "tced_relaxation"}, {"enabled", t.enabled}});
          }
        },
        tr);
  }
  return json{{"transforms", list}}.dump(indent);
}

std::vector<std::string> coal_retirement_order(const SystemData& sys) {
  std::vector<const Generator*> coal;
  for (const auto& g : sys.generators) {
    if (g.fuel == Fuel::coal) coal.push_back(&g);
  }
  auto first_cost = [](const Generator* g) {
    return g->blocks.empty() ? 0.0 : g->blocks.front().marginal_cost;
  };
  std::sort(coal.begin(), coal.end(), [&](const Generator* a, const Generator* b) {
    if (first_cost(a) != first_cost(b)) return first_cost(a) > first_cost(b);
    return a->id < b->id;
  });
  std::vector<std::string> out;
  for (const auto* g : coal) out.push_back(g->id);
  return out;
}

namespace {

void retire(SystemData& sys, const std::set<std::string>& ids) {
  sys.generators.erase(
      std::remove_if(sys.generators.begin(), sys.generators.end(),
                     [&](const Generator& g) { return ids.count(g.id) > 0; }),
      sys.generators.end());
  for (auto& d : sys.days) {
    for (const auto& id : ids) d.renewable_cap.erase(id);
  }
}

}  // namespace

SystemData apply_scenario(const SystemData& base, const ScenarioSpec& spec) {
  using namespace scenario;
  SystemData sys = base;
  for (const auto& tr : spec.transforms) {
    if (auto* t = std::get_if<WindScale>(&tr)) {
      if (!(t->factor > 0.0)) throw ValidationError("wind_scale factor must be positive");
      for (auto& d : sys.days) {
        for (auto& [id, series] : d.renewable_cap) {
          auto gi = sys.generator_index(id);
          if (!gi || sys.generators[*gi].fuel != Fuel::wind) continue;
          for (auto& v : series) v *= t->factor;
        }
        for (auto& v : d.wind_up_req) v *= t->factor;
        for (auto& v : d.wind_down_req) v *= t->factor;
      }
    } else if (auto* t = std::get_if<RetireCoal>(&tr)) {
      const auto order = coal_retirement_order(sys);
      std::set<std::string> ids;
      if (t->count) {
        if (*t->count > static_cast<int>(order.size())) {
          throw ValidationError("retire_coal count " + std::to_string(*t->count) +
                                " exceeds the " + std::to_string(order.size()) +
                                " coal units");
        }
        ids.insert(order.begin(), order.begin() + *t->count);
      } else {
        for (const auto& id : t->ids) {
          auto gi = sys.generator_index(id);
          if (!gi) throw ValidationError("retire_coal: unknown generator id " + id);
          if (sys.generators[*gi].fuel != Fuel::coal) {
            throw ValidationError("retire_coal: generator " + id + " is not coal");
          }
          ids.insert(id);
        }
      }
      retire(sys, ids);
    } else if (auto* t = std::get_if<AddGenerator>(&tr)) {
      if (t->generator.is_renewable) {
        throw ValidationError(
            "add_generator: renewable units need per-day availability; add "
            "them to the system file instead");
      }
      if (sys.generator_index(t->generator.id)) {
        throw ValidationError("add_generator: duplicate generator id " +
                              t->generator.id);
      }
      sys.generators.push_back(t->generator);
    } else if (auto* t = std::get_if<GasPriceScale>(&tr)) {
      if (!(t->factor > 0.0)) throw ValidationError("gas_price_scale factor must be positive");
      for (auto& g : sys.generators) {
        if (g.fuel != Fuel::gas) continue;
        for (auto& b : g.blocks) b.marginal_cost *= t->factor;
      }
    } else if (auto* t = std::get_if<GasEnergyLimit>(&tr)) {
      sys.flags.gas_energy_fraction = t->fraction;
    } else if (auto* t = std::get_if<LoadScale>(&tr)) {
      if (!(t->factor > 0.0)) throw ValidationError("load_scale factor must be positive");
      for (auto& d : sys.days) {
        for (auto& row : d.demand) {
          for (auto& v : row) v *= t->factor;
        }
        for (auto& v : d.load_ramp_req) v *= t->factor;
      }
    } else if (auto* t = std::get_if<TransmissionScale>(&tr)) {
      if (!(t->factor > 0.0)) throw ValidationError("transmission_scale factor must be positive");
      for (auto& l : sys.lines) l.capacity *= t->factor;
    } else if (auto* t = std::get_if<RelaxFlexibility>(&tr)) {
      sys.flags.relax_flexibility = t->enabled;
    } else if (auto* t = std::get_if<TcedRelaxation>(&tr)) {
      sys.flags.tced_relaxation = t->enabled;
    }
  }
  auto issues = validate(sys);
  if (!issues.empty()) throw ValidationError("scenario result: " + issues.front());
  return sys;
}

}  // namespace ctax
