#include <algorithm>
#include <cmath>
#include <sstream>

#include "ctax/errors.hpp"
#include "ctax/ucct.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "paths.hpp"

using namespace ctax;

namespace {

milp::SolverConfig exact() {
  milp::SolverConfig c;
  c.relative_mip_gap = 1e-9;
  return c;
}

std::vector<double> rotated(const std::vector<double>& v, int k) {
  std::vector<double> out(v.size());
  for (std::size_t t = 0; t < v.size(); ++t) out[(t + k) % v.size()] = v[t];
  return out;
}

SystemData rotate_days(SystemData s, int k) {
  for (auto& d : s.days) {
    for (auto& row : d.demand) row = rotated(row, k);
    for (auto& [id, row] : d.renewable_cap) row = rotated(row, k);
    if (!d.load_ramp_req.empty()) d.load_ramp_req = rotated(d.load_ramp_req, k);
    if (!d.wind_up_req.empty()) d.wind_up_req = rotated(d.wind_up_req, k);
    if (!d.wind_down_req.empty()) d.wind_down_req = rotated(d.wind_down_req, k);
  }
  return s;
}

// Two buses: DIRTY (cheap) at B1 exports over a 50 MW line to CLEAN and the
// load at B2.
SystemData two_bus() {
  SystemData s = load_system(fixture("two_unit.json"));
  s.buses.push_back({"B2", "import"});
  s.lines.push_back({"L12", "B1", "B2", 0.1, 50.0});
  s.generators[1].bus = "B2";
  s.days[0].demand = {std::vector<double>(4, 0.0), std::vector<double>(4, 100.0)};
  REQUIRE(validate(s).empty());
  return s;
}

double relative(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

}  // namespace

TEST_CASE("reserve requirement is 3% load plus 5% renewables plus largest unit") {
  CHECK(ucct::reserve_requirement(1000.0, 100.0, 200.0) == doctest::Approx(235.0));
}

TEST_CASE("variable and row census of a one-unit two-hour day") {
  const SystemData s = load_system(fixture("minimal.json"));
  const ucct::DayModel m = ucct::build_day_milp(s, 0, 0.0);
  // Per hour: u, v, z, g, one block, rho_up, rho_down; plus load shed per
  // bus-hour. No lines, so no flows or angles; no renewables, so no spill.
  CHECK(m.problem.num_vars() == 2 * (3 + 1 + 1 + 2) + 2);
  CHECK(m.problem.num_binaries() == 6);
  // Per unit-hour: generation identity, block limit, v+z, logic, min up, min
  // down, ramp, four flexibility rows. Per hour: balance, reserve, two
  // flexibility totals.
  CHECK(m.problem.num_rows() == 2 * (11 + 4));
  CHECK(m.problem.check().empty());
}

TEST_CASE("tax enters only through emission coefficients") {
  SystemData s = load_system(fixture("tced_gap.json"));
  const ucct::DayModel zero = ucct::build_day_milp(s, 0, 0.0);
  const ucct::DayModel taxed = ucct::build_day_milp(s, 0, 10.0);
  const int u = zero.u[0][1];
  const int v = zero.v[0][1];
  CHECK(zero.problem.objective()[u] == 0.0);  // c_min = 0, e_min = 30
  CHECK(zero.problem.objective()[v] == 0.0);  // c_su = 0, e_su = 5
  CHECK(taxed.problem.objective()[u] == doctest::Approx(300.0));
  CHECK(taxed.problem.objective()[v] == doctest::Approx(50.0));
}

TEST_CASE("two-unit fixture matches commitment enumeration") {
  const SystemData s = load_system(fixture("two_unit.json"));
  for (double tax : {0.0, 10.0, 26.0, 26.5, 50.0, 100.0}) {
    CAPTURE(tax);
    const auto r = ucct::solve_ucct(s, tax, exact());
    const auto o = oracle::brute_force_uc(s, 0, tax);
    REQUIRE(o.has_value());
    CHECK(relative(r.days[0].objective, o->objective) < 1e-6);
    CHECK(r.expected_emissions == doctest::Approx(o->emissions));
  }
  const auto low = ucct::solve_ucct(s, 0.0);
  const auto high = ucct::solve_ucct(s, 100.0);
  for (int t = 0; t < 4; ++t) {
    CHECK(low.days[0].g[0][t] == doctest::Approx(100.0));
    CHECK(high.days[0].g[1][t] == doctest::Approx(100.0));
  }
}

TEST_CASE("notch and tced_gap fixtures match commitment enumeration") {
  for (const char* name : {"notch.json", "tced_gap.json"}) {
    const SystemData s = load_system(fixture(name));
    for (double tax : {0.0, 5.0, 9.0, 11.0, 30.0, 110.0}) {
      CAPTURE(name);
      CAPTURE(tax);
      const auto r = ucct::solve_ucct(s, tax, exact());
      const auto o = oracle::brute_force_uc(s, 0, tax);
      REQUIRE(o.has_value());
      CHECK(relative(r.days[0].objective, o->objective) < 1e-6);
    }
  }
}

TEST_CASE("a cheap clean unit yields zero emissions at any tax") {
  SystemData s = load_system(fixture("two_unit.json"));
  s.generators[1].blocks[0] = {200.0, 5.0, 0.0};
  for (double tax : {0.0, 20.0, 80.0}) {
    CHECK(ucct::solve_ucct(s, tax).expected_emissions == doctest::Approx(0.0));
  }
}

TEST_CASE("accounting matches an independent pass over u, v and blocks") {
  const SystemData s = load_system(demo_system());
  const ucct::UcctResult r = ucct::solve_ucct(s, 20.0);
  double expected = 0.0, cost = 0.0;
  for (const auto& d : r.days) {
    double e = 0.0, c = 0.0;
    for (std::size_t i = 0; i < s.generators.size(); ++i) {
      const Generator& g = s.generators[i];
      for (int t = 0; t < s.horizon; ++t) {
        e += g.e_min * d.u[i][t] + g.e_startup * d.v[i][t];
        c += g.c_min * d.u[i][t] + g.c_startup * d.v[i][t];
        for (std::size_t k = 0; k < g.blocks.size(); ++k) {
          e += g.blocks[k].marginal_emis * d.block[i][k][t];
          c += g.blocks[k].marginal_cost * d.block[i][k][t];
        }
      }
    }
    CHECK(d.emissions == doctest::Approx(e));
    CHECK(d.gen_cost == doctest::Approx(c));
    expected += d.probability * e;
    cost += d.probability * (c + d.shed_cost);
  }
  CHECK(relative(r.expected_emissions, expected) < 1e-9);
  CHECK(relative(r.expected_cost, cost) < 1e-9);
  CHECK(r.tax_revenue == doctest::Approx(20.0 * r.expected_emissions));
  CHECK(r.objective == doctest::Approx(r.expected_cost + r.tax_revenue));
}

TEST_CASE("reported objective equals the model objective at the solution") {
  const SystemData s = load_system(demo_system());
  const ucct::UcctResult r = ucct::solve_ucct(s, 20.0);
  for (std::size_t a = 0; a < s.days.size(); ++a) {
    const ucct::DayModel m = ucct::build_day_milp(s, static_cast<int>(a), 20.0);
    const auto& d = r.days[a];
    CHECK(relative(d.objective, m.problem.evaluate(d.values)) < 1e-6);
    CHECK(relative(d.objective, d.gen_cost + d.shed_cost + 20.0 * d.emissions) < 1e-9);
    CHECK(m.problem.max_violation(d.values) < 1e-6);
  }
}

TEST_CASE("structural residuals and integral logic on the demo") {
  const SystemData s = load_system(demo_system());
  for (double tax : {0.0, 20.0, 60.0}) {
    const ucct::UcctResult r = ucct::solve_ucct(s, tax);
    for (std::size_t a = 0; a < r.days.size(); ++a) {
      const auto& d = r.days[a];
      CAPTURE(d.day_id);
      CHECK(ucct::day_residuals(s, d, s.flags).max() <= 1e-6);
      for (std::size_t i = 0; i < s.generators.size(); ++i) {
        if (s.generators[i].is_renewable) continue;
        for (int t = 0; t < s.horizon; ++t) {
          const int p = (t + s.horizon - 1) % s.horizon;
          CHECK(d.v[i][t] + d.z[i][t] <= 1);
          CHECK(d.v[i][t] - d.z[i][t] == d.u[i][t] - d.u[i][p]);
        }
      }
      // Wind: delivered plus spill equals availability.
      const int w = *s.generator_index("WIND3");
      const int b = *s.bus_index("N3");
      const auto& cap = s.days[a].renewable_cap.at("WIND3");
      for (int t = 0; t < s.horizon; ++t) {
        CHECK(d.g[w][t] + d.shed_ren[b][t] == doctest::Approx(cap[t]));
        CHECK(d.u[w][t] == 1);
      }
    }
  }
}

TEST_CASE("rotating the hourly profiles leaves the day objective unchanged") {
  SystemData s = load_system(fixture("tced_gap.json"));
  s.days[0].demand[0] = {80.0, 120.0, 150.0, 90.0};
  for (double tax : {0.0, 30.0}) {
    const double base = ucct::solve_ucct(s, tax, exact()).objective;
    for (int k = 1; k < 4; ++k) {
      CHECK(relative(ucct::solve_ucct(rotate_days(s, k), tax, exact()).objective, base) <
            1e-6);
    }
  }
  const SystemData demo = load_system(demo_system());
  SystemData winter = demo;
  winter.days = {demo.days[0]};
  winter.days[0].probability = 1.0;
  const double base = ucct::solve_ucct(winter, 20.0, exact()).objective;
  for (int k : {5, 13}) {
    CHECK(relative(ucct::solve_ucct(rotate_days(winter, k), 20.0, exact()).objective,
                   base) < 1e-6);
  }
}

TEST_CASE("TCED relaxation bounds the UCCT objective from below") {
  for (const std::string& path : {fixture("tced_gap.json"), demo_system()}) {
    SystemData s = load_system(path);
    SystemData t = s;
    t.flags.tced_relaxation = true;
    for (double tax : {0.0, 25.0}) {
      const double full = ucct::solve_ucct(s, tax, exact()).objective;
      const double relaxed = ucct::solve_ucct(t, tax, exact()).objective;
      CHECK(relaxed <= full + 1e-6 * std::max(1.0, full));
    }
  }
}

TEST_CASE("TCED model has no commitment variables") {
  SystemData s = load_system(fixture("tced_gap.json"));
  s.flags.tced_relaxation = true;
  const ucct::DayModel m = ucct::build_day_milp(s, 0, 10.0);
  CHECK(m.problem.num_binaries() == 0);
  CHECK(m.units[0].g_min == 0.0);
  CHECK(m.units[0].e_min == 0.0);
  CHECK(m.units[0].c_min == 0.0);
}

TEST_CASE("relaxing flexibility can only lower the objective") {
  SystemData s = load_system(demo_system());
  SystemData r = s;
  r.flags.relax_flexibility = true;
  const double full = ucct::solve_ucct(s, 10.0, exact()).objective;
  const double relaxed = ucct::solve_ucct(r, 10.0, exact()).objective;
  CHECK(relaxed <= full + 1e-6 * full);
  CHECK(ucct::build_day_milp(r, 0, 0.0).problem.num_vars() <
        ucct::build_day_milp(s, 0, 0.0).problem.num_vars());
}

TEST_CASE("gas energy limit caps daily gas output") {
  SystemData s = load_system(demo_system());
  s.flags.gas_energy_fraction = 0.2;
  const ucct::UcctResult r = ucct::solve_ucct(s, 0.0);
  const int gas = *s.generator_index("GAS1");
  for (std::size_t a = 0; a < s.days.size(); ++a) {
    double d = 0.0, g = 0.0;
    for (const auto& row : s.days[a].demand) {
      for (double v : row) d += v;
    }
    for (double v : r.days[a].g[gas]) g += v;
    CHECK(g <= 0.2 * d + 1e-6);
  }
}

TEST_CASE("single-bus LMP is the marginal block cost plus tax") {
  const SystemData s = load_system(fixture("two_unit.json"));
  for (double tax : {0.0, 10.0}) {
    ucct::UcctResult r = ucct::solve_ucct(s, tax);
    ucct::extract_prices(s, r);
    REQUIRE(r.prices_extracted);
    for (int t = 0; t < 4; ++t) {
      CHECK(r.days[0].lmp[0][t] == doctest::Approx(20.0 + tax * 1.0));
    }
    CHECK(r.congestion_surplus == doctest::Approx(0.0));
    // The marginal unit earns exactly its costs.
    CHECK(r.profit[0] == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("copper plate network prices every bus alike") {
  SystemData s = load_system(demo_system());
  for (auto& l : s.lines) l.capacity *= 100.0;
  ucct::UcctResult r = ucct::solve_ucct(s, 15.0);
  ucct::extract_prices(s, r);
  for (const auto& d : r.days) {
    for (int t = 0; t < s.horizon; ++t) {
      CHECK(d.lmp[1][t] == doctest::Approx(d.lmp[0][t]));
      CHECK(d.lmp[2][t] == doctest::Approx(d.lmp[0][t]));
    }
  }
  CHECK(std::abs(r.congestion_surplus) < 1e-6);
}

TEST_CASE("a binding line separates prices and collects surplus") {
  const SystemData s = two_bus();
  ucct::UcctResult r = ucct::solve_ucct(s, 0.0);
  ucct::extract_prices(s, r);
  for (int t = 0; t < 4; ++t) {
    CHECK(r.days[0].flow[0][t] == doctest::Approx(50.0));
    CHECK(r.days[0].lmp[0][t] == doctest::Approx(20.0));
    CHECK(r.days[0].lmp[1][t] == doctest::Approx(41.003));
  }
  // 50 MW across a 21.003 $/MWh spread for four hours.
  CHECK(r.congestion_surplus == doctest::Approx(4 * 50.0 * 21.003));
}

TEST_CASE("infeasible day is named") {
  const SystemData s = load_system(fixture("minimal.json"));
  try {
    ucct::solve_ucct(s, 0.0);
    FAIL("expected infeasibility");
  } catch (const InfeasibleError& e) {
    CHECK(std::string(e.what()).find("d1") != std::string::npos);
  }
}

TEST_CASE("solves are deterministic and concurrency does not change results") {
  const SystemData s = load_system(demo_system());
  const auto a = ucct::solve_ucct(s, 20.0, {}, 1);
  const auto b = ucct::solve_ucct(s, 20.0, {}, 2);
  REQUIRE(a.days.size() == b.days.size());
  for (std::size_t k = 0; k < a.days.size(); ++k) {
    CHECK(a.days[k].values == b.days[k].values);
    CHECK(a.days[k].nodes == b.days[k].nodes);
  }
  CHECK(a.expected_emissions == b.expected_emissions);
}

TEST_CASE("CSV exports") {
  const SystemData s = load_system(fixture("two_unit.json"));
  ucct::UcctResult r = ucct::solve_ucct(s, 0.0);
  ucct::extract_prices(s, r);
  std::ostringstream dispatch, prices, summary;
  ucct::write_dispatch_csv(s, r, dispatch);
  ucct::write_prices_csv(s, r, prices);
  ucct::write_summary_csv(r, summary);
  CHECK(dispatch.str().rfind("day,hour,generator,u,g\nflat,0,DIRTY,1,100.000000\n", 0) == 0);
  CHECK(prices.str().rfind("day,hour,bus,lmp\nflat,0,B1,20.000000\n", 0) == 0);
  CHECK(summary.str().find("0.000000,8000.000000,8000.000000,0.000000,400.000000") !=
        std::string::npos);
}
