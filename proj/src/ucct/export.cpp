#include <ostream>

#include "ctax/format.hpp"
#include "ctax/ucct.hpp"

namespace ctax::ucct {

void write_dispatch_csv(const SystemData& sys, const UcctResult& r,
                        std::ostream& out) {
  out << "day,hour,generator,u,g\n";
  for (const auto& d : r.days) {
    for (int t = 0; t < sys.horizon; ++t) {
      for (std::size_t i = 0; i < sys.generators.size(); ++i) {
        out << d.day_id << ',' << t << ',' << sys.generators[i].id << ','
            << d.u[i][t] << ',' << fixed6(d.g[i][t]) << '\n';
      }
    }
  }
}

void write_prices_csv(const SystemData& sys, const UcctResult& r,
                      std::ostream& out) {
  out << "day,hour,bus,lmp\n";
  for (const auto& d : r.days) {
    if (d.lmp.empty()) continue;
    for (int t = 0; t < sys.horizon; ++t) {
      for (std::size_t b = 0; b < sys.buses.size(); ++b) {
        out << d.day_id << ',' << t << ',' << sys.buses[b].id << ','
            << fixed6(d.lmp[b][t]) << '\n';
      }
    }
  }
}

void write_summary_csv(const UcctResult& r, std::ostream& out) {
  out << "tax_rate,expected_cost,expected_gen_cost,expected_shed_cost,"
         "expected_emissions,tax_revenue,objective,congestion_surplus\n";
  out << fixed6(r.tax_rate) << ',' << fixed6(r.expected_cost) << ','
      << fixed6(r.expected_gen_cost) << ',' << fixed6(r.expected_shed_cost)
      << ',' << fixed6(r.expected_emissions) << ',' << fixed6(r.tax_revenue)
      << ',' << fixed6(r.objective) << ',' << fixed6(r.congestion_surplus)
      << '\n';
}

void write_days_csv(const UcctResult& r, std::ostream& out) {
  out << "day,probability,emissions,gen_cost,shed_cost,objective,relative_gap,"
         "nodes\n";
  for (const auto& d : r.days) {
    out << d.day_id << ',' << fixed6(d.probability) << ','
        << fixed6(d.emissions) << ',' << fixed6(d.gen_cost) << ','
        << fixed6(d.shed_cost) << ',' << fixed6(d.objective) << ','
        << fixed6(d.relative_gap) << ',' << d.nodes << '\n';
  }
}

void write_generators_csv(const SystemData& sys, const UcctResult& r,
                          std::ostream& out) {
  out << "generator,fuel,bus,energy,profit\n";
  for (std::size_t i = 0; i < sys.generators.size(); ++i) {
    double energy = 0.0;
    for (const auto& d : r.days) {
      for (double v : d.g[i]) energy += d.probability * v;
    }
    const double profit = r.profit.empty() ? 0.0 : r.profit[i];
    out << sys.generators[i].id << ',' << to_string(sys.generators[i].fuel)
        << ',' << sys.generators[i].bus << ',' << fixed6(energy) << ','
        << fixed6(profit) << '\n';
  }
}

}  // namespace ctax::ucct
