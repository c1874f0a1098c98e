#include <algorithm>
#include <cmath>

#include "ctax/errors.hpp"
#include "ctax/parallel.hpp"
#include "ctax/ucct.hpp"
#include "model_detail.hpp"

namespace ctax::ucct {

namespace {

double value_at(const std::vector<double>& x, int col, double fallback = 0.0) {
  return col >= 0 ? x[col] : fallback;
}

int binary_at(const std::vector<double>& x, int col, int fallback) {
  return col >= 0 ? static_cast<int>(std::lround(x[col])) : fallback;
}

int day_index(const SystemData& sys, const std::string& id) {
  for (std::size_t a = 0; a < sys.days.size(); ++a) {
    if (sys.days[a].id == id) return static_cast<int>(a);
  }
  throw ValidationError("unknown day " + id);
}

// Generation cost and emissions of one unit-hour.
struct UnitHour {
  double cost = 0.0;
  double emissions = 0.0;
};

UnitHour unit_hour(const Generator& g, int u, int v,
                   const std::vector<double>& blocks) {
  UnitHour out;
  out.cost = g.c_min * u + g.c_startup * v;
  out.emissions = g.e_min * u + g.e_startup * v;
  for (std::size_t s = 0; s < g.blocks.size(); ++s) {
    out.cost += g.blocks[s].marginal_cost * blocks[s];
    out.emissions += g.blocks[s].marginal_emis * blocks[s];
  }
  return out;
}

std::vector<double> hour_blocks(const UcctDaySolution& d, int i, int t) {
  std::vector<double> out(d.block[i].size());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = d.block[i][s][t];
  return out;
}

}  // namespace

UcctDaySolution decode_day(const SystemData& sys, const DayModel& m,
                           const std::vector<double>& x) {
  const int T = sys.horizon;
  const int ng = static_cast<int>(m.units.size());
  const int nb = static_cast<int>(sys.buses.size());
  const int nl = static_cast<int>(sys.lines.size());
  const RepresentativeDay& day = sys.days[m.day];

  UcctDaySolution out;
  out.day_id = day.id;
  out.probability = day.probability;
  out.values = x;
  const int on = 1;
  out.u.assign(ng, std::vector<int>(T, 0));
  out.v = out.z = out.u;
  out.g.assign(ng, std::vector<double>(T, 0.0));
  out.block.resize(ng);
  out.flow.assign(nl, std::vector<double>(T, 0.0));
  out.theta.assign(nb, std::vector<double>(T, 0.0));
  out.shed_load = out.shed_ren = out.theta;

  for (int b = 0; b < nb; ++b) {
    for (int t = 0; t < T; ++t) {
      out.theta[b][t] = value_at(x, m.theta[b][t]);
      out.shed_load[b][t] = value_at(x, m.shed_load[b][t]);
      out.shed_ren[b][t] = value_at(x, m.shed_ren[b][t]);
    }
  }
  for (int l = 0; l < nl; ++l) {
    for (int t = 0; t < T; ++t) out.flow[l][t] = value_at(x, m.flow[l][t]);
  }

  std::vector<int> unit_bus(ng);
  for (int i = 0; i < ng; ++i) unit_bus[i] = *sys.bus_index(m.units[i].bus);
  for (int i = 0; i < ng; ++i) {
    const Generator& g = m.units[i];
    const int S = static_cast<int>(g.blocks.size());
    out.block[i].assign(S, std::vector<double>(T, 0.0));
    for (int t = 0; t < T; ++t) {
      if (g.is_renewable) {
        // Spill at a bus is shared among its renewable units by availability.
        double bus_cap = 0.0;
        for (int k = 0; k < ng; ++k) {
          if (m.units[k].is_renewable && unit_bus[k] == unit_bus[i]) {
            bus_cap += m.renewable_cap[k][t];
          }
        }
        const double cap = m.renewable_cap[i][t];
        const double spill =
            bus_cap > 0.0 ? out.shed_ren[unit_bus[i]][t] * cap / bus_cap : 0.0;
        out.u[i][t] = on;
        out.g[i][t] = cap - spill;
        const auto fill = detail::renewable_blocks(g, cap);
        for (int s = 0; s < S; ++s) out.block[i][s][t] = fill[s];
        continue;
      }
      out.u[i][t] = binary_at(x, m.u[i][t], on);
      out.v[i][t] = binary_at(x, m.v[i][t], 0);
      out.z[i][t] = binary_at(x, m.z[i][t], 0);
      out.g[i][t] = value_at(x, m.g[i][t]);
      for (int s = 0; s < S; ++s) out.block[i][s][t] = value_at(x, m.block[i][s][t]);
    }
  }

  for (int i = 0; i < ng; ++i) {
    for (int t = 0; t < T; ++t) {
      const UnitHour uh = unit_hour(m.units[i], out.u[i][t], out.v[i][t],
                                    hour_blocks(out, i, t));
      out.gen_cost += uh.cost;
      out.emissions += uh.emissions;
    }
  }
  for (int b = 0; b < nb; ++b) {
    for (int t = 0; t < T; ++t) {
      out.shed_cost += sys.shed_penalty * out.shed_load[b][t] +
                       sys.spill_penalty * out.shed_ren[b][t];
    }
  }
  out.objective = out.gen_cost + out.shed_cost + m.tax * out.emissions;
  return out;
}

UcctResult solve_ucct(const SystemData& sys, double tax,
                      const milp::SolverConfig& cfg, const ModelFlags& flags,
                      int jobs) {
  const int n = static_cast<int>(sys.days.size());
  UcctResult result;
  result.tax_rate = tax;
  result.flags = flags;
  result.days.resize(n);

  parallel_for(n, jobs, [&](int a) {
    const DayModel m = build_day_milp(sys, a, tax, flags);
    const milp::MilpSolution sol = milp::solve_milp(m.problem, cfg);
    const std::string& id = sys.days[a].id;
    switch (sol.status) {
      case milp::SolveStatus::optimal:
      case milp::SolveStatus::gap_limit:
        if (!sol.has_point()) {
          throw SolveError("day " + id + ": no feasible commitment found "
                           "within the solver limits");
        }
        break;
      case milp::SolveStatus::infeasible:
        throw InfeasibleError("day " + id +
                              " is infeasible: the fleet cannot meet its "
                              "reserve, flexibility or network limits");
      default:
        throw SolveError("day " + id + ": solver reported " +
                         milp::to_string(sol.status));
    }
    UcctDaySolution ds = decode_day(sys, m, sol.values);
    ds.relative_gap = sol.relative_gap;
    ds.nodes = sol.nodes;
    result.days[a] = std::move(ds);
  });

  // Deterministic reduction in day order.
  const auto units = detail::modelled_units(sys, flags);
  for (const auto& d : result.days) {
    result.expected_gen_cost += d.probability * d.gen_cost;
    result.expected_shed_cost += d.probability * d.shed_cost;
    result.expected_emissions += d.probability * d.emissions;
    for (std::size_t i = 0; i < units.size(); ++i) {
      double e = 0.0;
      for (double v : d.g[i]) e += v;
      result.energy_by_fuel[units[i].fuel] += d.probability * e;
    }
  }
  result.expected_cost = result.expected_gen_cost + result.expected_shed_cost;
  result.tax_revenue = tax * result.expected_emissions;
  result.objective = result.expected_cost + result.tax_revenue;
  return result;
}

void extract_prices(const SystemData& sys, UcctResult& result,
                    const milp::SolverConfig& cfg) {
  const int T = sys.horizon;
  const int nb = static_cast<int>(sys.buses.size());
  const auto units = detail::modelled_units(sys, result.flags);
  const auto from = detail::line_from(sys);
  const auto to = detail::line_to(sys);
  result.profit.assign(units.size(), 0.0);
  result.congestion_surplus = 0.0;
  for (auto& d : result.days) {
    const int a = day_index(sys, d.day_id);
    const DayModel m = build_day_milp(sys, a, result.tax_rate, result.flags);
    milp::MilpSolution point;
    point.status = milp::SolveStatus::optimal;
    point.values = d.values;
    milp::MilpSolution lp;
    try {
      lp = milp::fix_binaries_and_dualize(m.problem, point, cfg);
    } catch (const SolveError& e) {
      throw SolveError("day " + d.day_id + ": price extraction failed: " +
                       e.what());
    }
    const auto& y = *lp.duals;
    d.lmp.assign(nb, std::vector<double>(T, 0.0));
    for (int b = 0; b < nb; ++b) {
      for (int t = 0; t < T; ++t) d.lmp[b][t] = y[m.balance_row[b][t]];
    }
    for (std::size_t l = 0; l < sys.lines.size(); ++l) {
      for (int t = 0; t < T; ++t) {
        result.congestion_surplus += d.probability * d.flow[l][t] *
                                     (d.lmp[to[l]][t] - d.lmp[from[l]][t]);
      }
    }
    for (std::size_t i = 0; i < units.size(); ++i) {
      const int b = *sys.bus_index(units[i].bus);
      double profit = 0.0;
      for (int t = 0; t < T; ++t) {
        const UnitHour uh = unit_hour(units[i], d.u[i][t], d.v[i][t],
                                      hour_blocks(d, static_cast<int>(i), t));
        profit += d.lmp[b][t] * d.g[i][t] - uh.cost -
                  result.tax_rate * uh.emissions;
      }
      result.profit[i] += d.probability * profit;
    }
  }
  result.prices_extracted = true;
}

double Residuals::max() const {
  return std::max({generation, logic, min_up_down, ramp, balance, flow, shed});
}

Residuals day_residuals(const SystemData& sys, const UcctDaySolution& d,
                        const ModelFlags& flags) {
  const int a = day_index(sys, d.day_id);
  const RepresentativeDay& day = sys.days[a];
  const auto units = detail::modelled_units(sys, flags);
  const auto cap = detail::renewable_matrix(sys, a);
  const auto from = detail::line_from(sys);
  const auto to = detail::line_to(sys);
  const int T = sys.horizon;
  const int ng = static_cast<int>(units.size());
  const int nb = static_cast<int>(sys.buses.size());
  double scale = 1.0;
  for (const auto& row : day.demand) {
    for (double v : row) scale = std::max(scale, v);
  }
  auto over = [](double value, double limit) {
    return std::max(0.0, value - limit);
  };
  Residuals r;
  for (int i = 0; i < ng; ++i) {
    const Generator& g = units[i];
    if (g.is_renewable) continue;
    for (int t = 0; t < T; ++t) {
      const int p = (t - 1 + T) % T;
      double sum = g.g_min * d.u[i][t];
      for (std::size_t s = 0; s < g.blocks.size(); ++s) {
        const double gs = d.block[i][s][t];
        sum += gs;
        r.generation = std::max({r.generation, over(-gs, 0.0),
                                 over(gs, g.blocks[s].width * d.u[i][t])});
      }
      r.generation = std::max(r.generation, std::abs(d.g[i][t] - sum));
      if (flags.tced_relaxation) continue;
      r.logic = std::max<double>(
          {r.logic, over(d.v[i][t] + d.z[i][t], 1.0),
           static_cast<double>(std::abs((d.v[i][t] - d.z[i][t]) - (d.u[i][t] - d.u[i][p])))});
      int starts = 0, stops = 0;
      for (int k = 0; k < std::min(g.min_up, T); ++k) starts += d.v[i][(t - k + T) % T];
      for (int k = 0; k < std::min(g.min_down, T); ++k) stops += d.z[i][(t - k + T) % T];
      r.min_up_down = std::max<double>(
          {r.min_up_down, over(starts, d.u[i][t]), over(stops, 1 - d.u[i][t])});
      if (p != t) {
        const double step = d.g[i][t] - d.g[i][p];
        r.ramp = std::max({r.ramp, over(step, g.ramp_up), over(-step, g.ramp_down)});
      }
    }
  }
  for (int t = 0; t < T; ++t) {
    for (int b = 0; b < nb; ++b) {
      double ren_cap = 0.0;
      double net = 0.0;
      for (int i = 0; i < ng; ++i) {
        if (*sys.bus_index(units[i].bus) != b) continue;
        if (units[i].is_renewable) {
          // Balance in the model's form: availability less spill.
          ren_cap += cap[i][t];
        } else {
          net += d.g[i][t];
        }
      }
      net += ren_cap - d.shed_ren[b][t];
      for (std::size_t l = 0; l < sys.lines.size(); ++l) {
        if (from[l] == b) net -= d.flow[l][t];
        if (to[l] == b) net += d.flow[l][t];
      }
      r.balance = std::max(
          r.balance, std::abs(net - (day.demand[b][t] - d.shed_load[b][t])));
      r.shed = std::max({r.shed, over(-d.shed_load[b][t], 0.0),
                         over(d.shed_load[b][t], day.demand[b][t]),
                         over(-d.shed_ren[b][t], 0.0),
                         over(d.shed_ren[b][t], ren_cap)});
    }
    for (std::size_t l = 0; l < sys.lines.size(); ++l) {
      const auto& line = sys.lines[l];
      const double f = d.flow[l][t];
      const double def = (d.theta[from[l]][t] - d.theta[to[l]][t]) / line.reactance;
      r.flow = std::max({r.flow, std::abs(f - def), over(std::abs(f), line.capacity)});
    }
  }
  r.generation /= scale;
  r.logic /= scale;
  r.min_up_down /= scale;
  r.ramp /= scale;
  r.balance /= scale;
  r.flow /= scale;
  r.shed /= scale;
  return r;
}

}  // namespace ctax::ucct
