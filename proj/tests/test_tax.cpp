#include <cmath>
#include <sstream>

#include "ctax/errors.hpp"
#include "ctax/tax_search.hpp"
#include "doctest.h"
#include "paths.hpp"

using namespace ctax;

namespace {

constexpr double kThreshold = (41.003 - 20.0) / (1.0 - 0.2);  // $/ton

tax::TaxSearchConfig target(double tons) {
  tax::TaxSearchConfig c;
  c.target_emissions = tons;
  return c;
}

// Two days of the two-unit fixture with different loads.
SystemData two_day() {
  SystemData s = load_system(fixture("two_unit.json"));
  RepresentativeDay light = s.days[0];
  light.id = "light";
  light.demand[0].assign(4, 60.0);
  s.days[0].probability = 0.5;
  light.probability = 0.5;
  s.days.push_back(light);
  REQUIRE(validate(s).empty());
  return s;
}

}  // namespace

TEST_CASE("search configuration is checked") {
  tax::TaxSearchConfig c = target(100.0);
  CHECK(c.check().empty());
  c.tax_low = 100.0;
  CHECK(!c.check().empty());
  c = target(100.0);
  c.tolerance = 0.0;
  CHECK(!c.check().empty());
  c = target(100.0);
  c.certainty_level = 1.0;
  CHECK(!c.check().empty());
  const SystemData s = load_system(fixture("two_unit.json"));
  CHECK_THROWS_AS(tax::wsb(s, c), ValidationError);
}

TEST_CASE("wsb brackets the two-unit switching threshold") {
  const SystemData s = load_system(fixture("two_unit.json"));
  const tax::TaxSearchResult r = tax::wsb(s, target(200.0));
  CHECK(r.converged);
  CHECK(r.bisection_steps == 14);
  CHECK(r.iterations.size() == 16);
  CHECK(r.iterations[0].step == tax::Step::upper_check);
  CHECK(r.iterations[1].step == tax::Step::lower_check);
  CHECK(r.optimal_tax > kThreshold);
  CHECK(r.optimal_tax <= kThreshold + 0.01);
  CHECK(r.bracket_high - r.bracket_low <= 0.01);
  CHECK(r.final.expected_emissions <= 200.0);
  CHECK(r.final.tax_rate == r.optimal_tax);
  CHECK(ucct::solve_ucct(s, r.optimal_tax - 0.01).expected_emissions > 200.0);
  // Recorded emissions never rise with the tax.
  for (const auto& a : r.iterations) {
    for (const auto& b : r.iterations) {
      if (a.tax < b.tax) CHECK(b.emissions <= a.emissions + 1e-9);
    }
  }
  CHECK(std::isnan(r.iterations[0].probability));
}

TEST_CASE("wsb returns the lower bracket when it already meets the target") {
  const SystemData s = load_system(fixture("two_unit.json"));
  const double e0 = ucct::solve_ucct(s, 0.0).expected_emissions;
  const tax::TaxSearchResult r = tax::wsb(s, target(e0));  // equality counts
  CHECK(r.converged);
  CHECK(r.optimal_tax == 0.0);
  CHECK(r.bisection_steps == 0);
  CHECK(r.iterations.size() == 2);
}

TEST_CASE("wsb reports an unreachable target") {
  const SystemData s = load_system(fixture("two_unit.json"));
  const tax::TaxSearchResult r = tax::wsb(s, target(50.0));
  CHECK(!r.converged);
  CHECK(r.iterations.size() == 1);
  CHECK(r.final.expected_emissions == doctest::Approx(80.0));
  CHECK(r.message.find("upper tax") != std::string::npos);
}

TEST_CASE("wsb stops at max_iterations with the bracket") {
  const SystemData s = load_system(fixture("two_unit.json"));
  tax::TaxSearchConfig c = target(200.0);
  c.max_iterations = 3;
  const tax::TaxSearchResult r = tax::wsb(s, c);
  CHECK(!r.converged);
  CHECK(r.bisection_steps == 3);
  CHECK(r.bracket_low < kThreshold);
  CHECK(r.bracket_high > kThreshold);
  CHECK(r.bracket_high - r.bracket_low == doctest::Approx(12.5));
}

TEST_CASE("iteration count bound for other brackets") {
  const SystemData s = load_system(fixture("two_unit.json"));
  tax::TaxSearchConfig c = target(200.0);
  c.tax_low = 5.0;
  c.tax_high = 205.0;
  c.tolerance = 0.05;
  const tax::TaxSearchResult r = tax::wsb(s, c);
  const int bound = static_cast<int>(std::ceil(std::log2(200.0 / 0.05)));
  CHECK(r.bisection_steps <= bound);
  CHECK(static_cast<int>(r.iterations.size()) <= bound + 2);
  CHECK(r.optimal_tax > kThreshold);
  CHECK(r.optimal_tax <= kThreshold + 0.05);
}

TEST_CASE("certainty-adjusted search") {
  const SystemData s = two_day();
  // Day emissions 400 and 240 at low tax, 80 and 48 above the threshold.
  const auto low = ucct::solve_ucct(s, 0.0);
  CHECK(low.expected_emissions == doctest::Approx(320.0));
  tax::TaxSearchConfig c = target(100.0);
  double p = 0.0;
  const auto high = ucct::solve_ucct(s, 50.0);
  CHECK(tax::meets_target(high, c, &p));
  CHECK(std::isnan(p));
  c.certainty_level = 0.5;
  CHECK(tax::meets_target(high, c, &p));
  CHECK(p > 0.5);
  double prev = -1.0;
  for (double level : {0.5, 0.8, 0.95}) {
    c.certainty_level = level;
    const tax::TaxSearchResult r = tax::wsb(s, c);
    CHECK(r.converged);
    CHECK(r.optimal_tax >= prev);
    CHECK(r.iterations.back().probability >= 0.0);
    prev = r.optimal_tax;
  }
}

TEST_CASE("solve cache") {
  const SystemData s = load_system(fixture("two_unit.json"));
  tax::SolveCache cache;
  const auto fp = fingerprint(s);
  const auto a = cache.solve(s, fp, 10.0, {}, 1);
  const auto b = cache.solve(s, fp, 10.0, {}, 1);
  cache.solve(s, fp, 11.0, {}, 1);
  CHECK(cache.size() == 2);
  CHECK(cache.hits() == 1);
  CHECK(a.expected_emissions == b.expected_emissions);
  tax::wsb(s, target(200.0), {}, &cache);
  const std::size_t after = cache.hits();
  tax::wsb(s, target(200.0), {}, &cache);
  CHECK(cache.hits() == after + 16);
}

TEST_CASE("coupled model census") {
  const SystemData s = two_day();
  const tax::CoupledModel m = tax::build_coupled_milp(s, 200.0);
  int cols = 0, rows = 0;
  for (const auto& d : m.days) {
    cols += d.problem.num_vars();
    rows += d.problem.num_rows();
  }
  CHECK(m.problem.num_vars() == cols);
  CHECK(m.problem.num_rows() == rows + 1);
  CHECK(m.cap_row == rows);
  CHECK(m.column_offset == std::vector<int>{0, m.days[0].problem.num_vars()});
  CHECK(m.problem.check().empty());
}

TEST_CASE("cemv on the two-unit fixture") {
  const SystemData s = load_system(fixture("two_unit.json"));
  const tax::CapSolve c = tax::solve_with_cap(s, 200.0);
  REQUIRE(c.feasible);
  CHECK(c.expected_emissions == doctest::Approx(200.0));
  CHECK(c.expected_cost == doctest::Approx(8000.0 + kThreshold * 200.0));
  CHECK(c.lambda == doctest::Approx(kThreshold));
  const tax::TaxSearchResult w = tax::wsb(s, target(200.0));
  CHECK(std::abs(c.lambda - w.optimal_tax) <= 0.01);

  const tax::CemvResult slack = tax::cemv(s, 1000.0);
  CHECK(slack.capped.lambda == 0.0);
  CHECK(slack.realized_emissions == doctest::Approx(400.0));
  CHECK(slack.meets_target);

  const tax::CemvResult edge = tax::cemv(s, 400.0);
  CHECK(edge.capped.lambda == doctest::Approx(0.0));
  CHECK(edge.realized_emissions == doctest::Approx(400.0));

  // Shedding load emits nothing, so only a negative cap is out of reach.
  const tax::CapSolve shed = tax::solve_with_cap(s, 10.0);
  CHECK(shed.feasible);
  CHECK(shed.expected_emissions <= 10.0 + 1e-9);
  CHECK_THROWS_AS(tax::cemv(s, -1.0), InfeasibleError);
  CHECK(!tax::solve_with_cap(s, -1.0).feasible);
}

TEST_CASE("cemv misses a target inside a concave notch while wsb meets it") {
  const SystemData s = load_system(fixture("notch.json"));
  const tax::CemvResult c = tax::cemv(s, 60.0);
  CHECK(c.capped.expected_emissions == doctest::Approx(60.0));
  CHECK(c.capped.lambda == doctest::Approx(0.0));
  CHECK(c.realized_emissions == doctest::Approx(100.0));
  CHECK(!c.meets_target);
  const tax::TaxSearchResult w = tax::wsb(s, target(60.0));
  CHECK(w.converged);
  CHECK(w.final.expected_emissions <= 60.0);
  CHECK(w.optimal_tax == doctest::Approx(10.0).epsilon(0.002));
}

TEST_CASE("cap sweep follows the two-unit frontier") {
  const SystemData s = load_system(fixture("two_unit.json"));
  const tax::ParetoSample p = tax::sample_pareto_by_cap(s, 5, 80.0, 400.0);
  REQUIRE(p.points.size() == 5);
  for (std::size_t k = 0; k < p.points.size(); ++k) {
    const auto& pt = p.points[k];
    CHECK(pt.feasible);
    CHECK(pt.parameter == doctest::Approx(80.0 + 80.0 * k));
    CHECK(pt.expected_cost == doctest::Approx(8000.0 + kThreshold * (400.0 - pt.parameter)));
    if (k > 0) CHECK(pt.expected_cost <= p.points[k - 1].expected_cost);
    if (k + 1 < p.points.size()) CHECK(pt.lambda.value() == doctest::Approx(kThreshold));
  }
  const tax::ParetoSample q = tax::sample_pareto_by_cap(s, 3, -200.0, 400.0);
  CHECK(!q.points[0].feasible);
  CHECK(!q.points[0].lambda);
  CHECK(q.points[1].feasible);
}

TEST_CASE("tax sweep") {
  const SystemData s = load_system(fixture("notch.json"));
  const tax::ParetoSample zero = tax::sample_pareto_by_tax(s, {0.0});
  const ucct::UcctResult r = ucct::solve_ucct(s, 0.0);
  REQUIRE(zero.points.size() == 1);
  CHECK(zero.points[0].expected_cost == r.expected_cost);
  CHECK(zero.points[0].expected_emissions == r.expected_emissions);

  // Weighted-sum optima sit on or above the cap frontier.
  const tax::ParetoSample taxes = tax::sample_pareto_by_tax(s, {0.0, 5.0, 9.0, 11.0, 20.0});
  for (const auto& pt : taxes.points) {
    const tax::CapSolve c = tax::solve_with_cap(s, pt.expected_emissions);
    REQUIRE(c.feasible);
    CHECK(pt.expected_cost >= c.expected_cost - 1e-6);
  }
}

TEST_CASE("search and sweep CSVs") {
  const SystemData s = load_system(fixture("two_unit.json"));
  std::ostringstream it, par;
  tax::write_iterations_csv(tax::wsb(s, target(200.0)), it);
  CHECK(it.str().rfind(
            "index,step,tax,expected_emissions,expected_cost,probability,feasible\n"
            "0,upper_check,100.000000,80.000000,16401.200000,,1\n"
            "1,lower_check,0.000000,400.000000,8000.000000,,0\n"
            "2,bisection,50.000000,",
            0) == 0);
  tax::write_pareto_csv(tax::sample_pareto_by_cap(s, 2, -1.0, 400.0), par);
  CHECK(par.str() ==
        "mode,parameter,expected_cost,expected_emissions,lambda,feasible\n"
        "cap,-1.000000,,,,0\n"
        "cap,400.000000,8000.000000,400.000000,0.000000,1\n");
}
