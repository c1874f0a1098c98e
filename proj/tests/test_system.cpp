#include <algorithm>

#include "ctax/errors.hpp"
#include "ctax/system.hpp"
#include "doctest.h"
#include "paths.hpp"

using namespace ctax;

namespace {

Generator coal(const std::string& id, double first_cost) {
  Generator g;
  g.id = id;
  g.bus = "B1";
  g.fuel = Fuel::coal;
  g.g_min = 0.0;
  g.g_max = 100.0;
  g.blocks = {{100.0, first_cost, 1.0}};
  g.ramp_up = g.ramp_down = 100.0;
  return g;
}

SystemData three_coal() {
  SystemData s = load_system(fixture("two_unit.json"));
  s.generators = {coal("K1", 30.0), coal("K2", 25.0), coal("K3", 28.0)};
  Generator gas = coal("G1", 40.0);
  gas.fuel = Fuel::gas;
  s.generators.push_back(gas);
  return s;
}

ScenarioSpec one(scenario::Transform t) {
  ScenarioSpec s;
  s.transforms.push_back(std::move(t));
  return s;
}

}  // namespace

TEST_CASE("minimal file loads") {
  const SystemData s = load_system(fixture("minimal.json"));
  CHECK(s.buses.size() == 1);
  CHECK(s.generators.size() == 1);
  CHECK(s.days.size() == 1);
  CHECK(s.horizon == 2);
  CHECK(s.generators[0].ramp_up == 100.0);
}

TEST_CASE("probabilities must sum to one") {
  try {
    load_system(fixture("bad_probability.json"));
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("day probabilities") != std::string::npos);
  }
}

TEST_CASE("demo system census") {
  const SystemData s = load_system(demo_system());
  CHECK(s.buses.size() == 3);
  CHECK(s.lines.size() == 3);
  CHECK(s.generators.size() == 4);
  CHECK(s.days.size() == 2);
  CHECK(validate(s).empty());
}

TEST_CASE("malformed input is a parse error") {
  CHECK_THROWS_AS(parse_system("{\"buses\": ["), ParseError);
  CHECK_THROWS_AS(parse_system("[]"), ParseError);
  CHECK_THROWS_AS(load_system(fixture("does_not_exist.json")), ParseError);
}

TEST_CASE("validate names each violation") {
  SystemData s = load_system(fixture("two_unit.json"));
  CHECK(validate(s).empty());

  SystemData a = s;
  a.generators[0].g_min = 300.0;
  a.generators[0].blocks[0].width = -100.0;
  auto v = validate(a);
  REQUIRE(!v.empty());
  CHECK(v.front().find("DIRTY") != std::string::npos);

  SystemData b = s;
  b.generators[1].g_min = 250.0;
  b.generators[1].blocks.clear();
  b.generators[1].g_max = 200.0;
  v = validate(b);
  CHECK(std::count_if(v.begin(), v.end(), [](const std::string& m) {
          return m.find("g_min") != std::string::npos;
        }) >= 1);

  SystemData c = s;
  c.generators[1].blocks[0].width = 150.0;
  v = validate(c);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("block widths") != std::string::npos);

  SystemData d = s;
  d.generators[0].bus = "nowhere";
  CHECK(validate(d).size() == 1);

  SystemData e = s;
  e.generators[0].min_up = 9;
  CHECK(validate(e).size() == 1);
}

TEST_CASE("round trip through JSON") {
  const SystemData s = load_system(demo_system());
  const SystemData t = parse_system(to_json_text(s));
  CHECK(to_json_text(s) == to_json_text(t));
  CHECK(fingerprint(s) == fingerprint(t));
  SystemData u = s;
  u.days[0].demand[0][3] += 1.0;
  CHECK(fingerprint(u) != fingerprint(s));
}

TEST_CASE("load_scale and transmission_scale") {
  const SystemData base = load_system(demo_system());
  const SystemData l = apply_scenario(base, one(scenario::LoadScale{1.02}));
  for (std::size_t a = 0; a < base.days.size(); ++a) {
    for (std::size_t b = 0; b < base.buses.size(); ++b) {
      for (int t = 0; t < base.horizon; ++t) {
        CHECK(l.days[a].demand[b][t] == doctest::Approx(1.02 * base.days[a].demand[b][t]));
      }
    }
  }
  const SystemData x = apply_scenario(base, one(scenario::TransmissionScale{1.2}));
  for (std::size_t k = 0; k < base.lines.size(); ++k) {
    CHECK(x.lines[k].capacity == doctest::Approx(1.2 * base.lines[k].capacity));
  }
}

TEST_CASE("retire_coal removes the highest first-block costs") {
  const SystemData s = three_coal();
  CHECK(coal_retirement_order(s) == std::vector<std::string>{"K1", "K3", "K2"});
  scenario::RetireCoal r;
  r.count = 2;
  const SystemData out = apply_scenario(s, one(r));
  REQUIRE(out.generators.size() == s.generators.size() - 2);
  CHECK(out.generator_index("K2").has_value());
  CHECK(!out.generator_index("K1").has_value());
  CHECK(!out.generator_index("K3").has_value());
  CHECK(out.generator_index("G1").has_value());

  scenario::RetireCoal too_many;
  too_many.count = 4;
  CHECK_THROWS_AS(apply_scenario(s, one(too_many)), ValidationError);
  scenario::RetireCoal bad_id;
  bad_id.ids = {"NOPE"};
  CHECK_THROWS_AS(apply_scenario(s, one(bad_id)), ValidationError);
  scenario::RetireCoal not_coal;
  not_coal.ids = {"G1"};
  CHECK_THROWS_AS(apply_scenario(s, one(not_coal)), ValidationError);
}

TEST_CASE("retire_coal ties break by id") {
  SystemData s = three_coal();
  s.generators[2].blocks[0].marginal_cost = 30.0;  // K3 ties K1
  CHECK(coal_retirement_order(s) == std::vector<std::string>{"K1", "K3", "K2"});
}

TEST_CASE("gas price, wind and flags") {
  const SystemData base = load_system(demo_system());
  const SystemData g = apply_scenario(base, one(scenario::GasPriceScale{1.5}));
  for (std::size_t i = 0; i < base.generators.size(); ++i) {
    const double f = base.generators[i].fuel == Fuel::gas ? 1.5 : 1.0;
    for (std::size_t s = 0; s < base.generators[i].blocks.size(); ++s) {
      CHECK(g.generators[i].blocks[s].marginal_cost ==
            doctest::Approx(f * base.generators[i].blocks[s].marginal_cost));
    }
  }
  const SystemData w = apply_scenario(base, one(scenario::WindScale{2.0}));
  CHECK(w.days[0].renewable_cap.at("WIND3")[5] ==
        doctest::Approx(2.0 * base.days[0].renewable_cap.at("WIND3")[5]));

  ScenarioSpec flags;
  flags.transforms = {scenario::GasEnergyLimit{0.4}, scenario::RelaxFlexibility{true},
                      scenario::TcedRelaxation{true}};
  const SystemData f = apply_scenario(base, flags);
  CHECK(f.flags.gas_energy_fraction.value() == 0.4);
  CHECK(f.flags.relax_flexibility);
  CHECK(f.flags.tced_relaxation);
  CHECK(!base.flags.tced_relaxation);

  CHECK_THROWS_AS(apply_scenario(base, one(scenario::LoadScale{0.0})), ValidationError);
  CHECK_THROWS_AS(apply_scenario(base, one(scenario::GasEnergyLimit{1.5})), ValidationError);
}

TEST_CASE("add_generator") {
  const SystemData base = load_system(fixture("two_unit.json"));
  Generator g = base.generators[1];
  g.id = "NEWGAS";
  const SystemData out = apply_scenario(base, one(scenario::AddGenerator{g}));
  CHECK(out.generators.size() == 3);
  CHECK_THROWS_AS(apply_scenario(out, one(scenario::AddGenerator{g})), ValidationError);
}

TEST_CASE("apply_scenario is pure and independent transforms commute") {
  const SystemData base = load_system(demo_system());
  const std::string before = to_json_text(base);
  ScenarioSpec ab;
  ab.transforms = {scenario::LoadScale{1.02}, scenario::TransmissionScale{1.2}};
  ScenarioSpec ba;
  ba.transforms = {scenario::TransmissionScale{1.2}, scenario::LoadScale{1.02}};
  const std::string one_run = to_json_text(apply_scenario(base, ab));
  CHECK(one_run == to_json_text(apply_scenario(base, ab)));
  CHECK(one_run == to_json_text(apply_scenario(base, ba)));
  CHECK(to_json_text(base) == before);
}

TEST_CASE("scenario files") {
  const ScenarioSpec s = load_scenario(fixture("scenario.json"));
  REQUIRE(s.transforms.size() == 4);
  CHECK(std::holds_alternative<scenario::LoadScale>(s.transforms[0]));
  CHECK(to_json_text(parse_scenario(to_json_text(s))) == to_json_text(s));
  CHECK_THROWS_AS(parse_scenario(R"({"transforms":[{"type":"warp_speed"}]})"), ParseError);
  CHECK_THROWS_AS(parse_scenario(
                      R"({"transforms":[{"type":"retire_coal","count":1,"ids":["X"]}]})"),
                  ParseError);
}

TEST_CASE("default flexibility requirements") {
  const SystemData s = load_system(demo_system());
  const FlexRequirement r = flex_requirement(s, 0);
  double load = 0.0;
  for (const auto& row : s.days[0].demand) load += row[4];
  CHECK(r.load_ramp[4] == doctest::Approx(0.01 * load));
  CHECK(r.wind_up[4] == doctest::Approx(0.2 * s.days[0].renewable_cap.at("WIND3")[4]));
  CHECK(r.wind_down == r.wind_up);
}
