#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctax/errors.hpp"
#include "ctax/ucct.hpp"
#include "model_detail.hpp"

namespace ctax::ucct {

using milp::kInf;
using milp::Sense;
using milp::Term;

double reserve_requirement(double total_load, double renewable_output,
                           double largest_unit) {
  return kReserveLoadShare * total_load +
         kReserveRenewableShare * renewable_output + largest_unit;
}

namespace detail {

std::vector<Generator> modelled_units(const SystemData& sys,
                                      const ModelFlags& flags) {
  std::vector<Generator> units = sys.generators;
  if (!flags.tced_relaxation) return units;
  for (auto& g : units) {
    if (g.is_renewable) continue;
    // The capacity below g_min stays available as a free block so the
    // relaxation keeps the unit's full range.
    if (g.g_min > 0.0) {
      g.blocks.insert(g.blocks.begin(), CostBlock{g.g_min, 0.0, 0.0});
    }
    g.g_min = 0.0;
    g.c_min = 0.0;
    g.e_min = 0.0;
  }
  return units;
}

std::vector<std::vector<double>> renewable_matrix(const SystemData& sys,
                                                  int day) {
  const int T = sys.horizon;
  std::vector<std::vector<double>> cap(sys.generators.size(),
                                       std::vector<double>(T, 0.0));
  const auto& d = sys.days[day];
  for (std::size_t i = 0; i < sys.generators.size(); ++i) {
    if (!sys.generators[i].is_renewable) continue;
    auto it = d.renewable_cap.find(sys.generators[i].id);
    if (it != d.renewable_cap.end()) cap[i] = it->second;
  }
  return cap;
}

std::vector<double> renewable_blocks(const Generator& g, double output) {
  std::vector<double> fill(g.blocks.size(), 0.0);
  double rest = std::max(0.0, output - g.g_min);
  for (std::size_t s = 0; s < g.blocks.size(); ++s) {
    fill[s] = std::min(rest, g.blocks[s].width);
    rest -= fill[s];
  }
  return fill;
}

std::vector<int> line_from(const SystemData& sys) {
  std::vector<int> out;
  for (const auto& l : sys.lines) out.push_back(*sys.bus_index(l.from_bus));
  return out;
}

std::vector<int> line_to(const SystemData& sys) {
  std::vector<int> out;
  for (const auto& l : sys.lines) out.push_back(*sys.bus_index(l.to_bus));
  return out;
}

}  // namespace detail

namespace {

std::string tag(const std::string& name, const std::string& a, int t) {
  return name + "[" + a + "," + std::to_string(t) + "]";
}

// Buses whose angle is a variable: every bus on a line except the lowest
// indexed bus of each connected component, which serves as its reference.
std::vector<bool> angle_buses(const SystemData& sys) {
  const int nb = static_cast<int>(sys.buses.size());
  std::vector<int> parent(nb);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int b) {
    while (parent[b] != b) b = parent[b] = parent[parent[b]];
    return b;
  };
  std::vector<bool> touched(nb, false);
  for (const auto& l : sys.lines) {
    const int a = *sys.bus_index(l.from_bus);
    const int b = *sys.bus_index(l.to_bus);
    touched[a] = touched[b] = true;
    const int ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<bool> out(nb, false);
  for (int b = 0; b < nb; ++b) out[b] = touched[b] && find(b) != b;
  return out;
}

}  // namespace

DayModel build_day_milp(const SystemData& sys, int day, double tax,
                        const ModelFlags& flags) {
  if (day < 0 || day >= static_cast<int>(sys.days.size())) {
    throw ValidationError("day index out of range");
  }
  if (!(tax >= 0.0) || !std::isfinite(tax)) {
    throw ValidationError("tax rate must be finite and nonnegative");
  }
  if (flags.gas_energy_fraction &&
      !(*flags.gas_energy_fraction > 0.0 && *flags.gas_energy_fraction <= 1.0)) {
    throw ValidationError("gas energy fraction must lie in (0, 1]");
  }
  const RepresentativeDay& d = sys.days[day];
  const int T = sys.horizon;
  const int nb = static_cast<int>(sys.buses.size());
  const int ng = static_cast<int>(sys.generators.size());
  const int nl = static_cast<int>(sys.lines.size());
  if (static_cast<int>(d.demand.size()) != nb) {
    throw ValidationError("day " + d.id + " demand does not match the buses");
  }
  for (const auto& row : d.demand) {
    if (static_cast<int>(row.size()) != T) {
      throw ValidationError("day " + d.id + " does not match the horizon");
    }
  }
  const bool tced = flags.tced_relaxation;
  const bool flex = !flags.relax_flexibility;

  DayModel m;
  m.day = day;
  m.tax = tax;
  m.flags = flags;
  m.units = detail::modelled_units(sys, flags);
  m.renewable_cap = detail::renewable_matrix(sys, day);
  for (const auto& [id, series] : d.renewable_cap) {
    if (static_cast<int>(series.size()) != T) {
      throw ValidationError("day " + d.id + " renewable_cap of " + id +
                            " does not match the horizon");
    }
  }
  const FlexRequirement req = flex_requirement(sys, day);
  auto& p = m.problem;
  auto prev = [T](int t) { return (t - 1 + T) % T; };

  auto grid = [](int a, int b) {
    return std::vector<std::vector<int>>(a, std::vector<int>(b, -1));
  };
  m.u = m.v = m.z = m.g = m.rho_up = m.rho_down = grid(ng, T);
  m.block.resize(ng);
  m.flow = grid(nl, T);
  m.theta = m.shed_load = m.shed_ren = m.balance_row = grid(nb, T);
  m.reserve_row.assign(T, -1);

  std::vector<int> unit_bus(ng);
  for (int i = 0; i < ng; ++i) unit_bus[i] = *sys.bus_index(m.units[i].bus);
  double largest = 0.0;
  for (const auto& g : m.units) largest = std::max(largest, g.g_max);

  // Columns.
  for (int i = 0; i < ng; ++i) {
    const Generator& g = m.units[i];
    const int S = static_cast<int>(g.blocks.size());
    m.block[i].assign(S, std::vector<int>(T, -1));
    if (g.is_renewable) {
      for (int t = 0; t < T; ++t) {
        const auto fill = detail::renewable_blocks(g, m.renewable_cap[i][t]);
        p.objective_offset += g.c_min + tax * g.e_min;
        for (int s = 0; s < S; ++s) {
          p.objective_offset +=
              fill[s] * (g.blocks[s].marginal_cost + tax * g.blocks[s].marginal_emis);
        }
      }
      continue;
    }
    for (int t = 0; t < T; ++t) {
      if (!tced) {
        m.u[i][t] = p.add_column(tag("u", g.id, t), 0, 1, g.c_min + tax * g.e_min,
                                 true);
        m.v[i][t] = p.add_column(tag("v", g.id, t), 0, 1,
                                 g.c_startup + tax * g.e_startup, true);
        m.z[i][t] = p.add_column(tag("z", g.id, t), 0, 1, 0.0, true);
      }
      m.g[i][t] = p.add_column(tag("g", g.id, t), 0, g.g_max, 0.0);
      for (int s = 0; s < S; ++s) {
        const auto& b = g.blocks[s];
        m.block[i][s][t] =
            p.add_column(tag("gs" + std::to_string(s), g.id, t), 0, b.width,
                         b.marginal_cost + tax * b.marginal_emis);
      }
      if (flex) {
        m.rho_up[i][t] = p.add_column(tag("rup", g.id, t), 0, g.ramp_up, 0.0);
        m.rho_down[i][t] =
            p.add_column(tag("rdn", g.id, t), 0, g.ramp_down, 0.0);
      }
    }
  }
  const std::vector<bool> has_angle = angle_buses(sys);
  for (int t = 0; t < T; ++t) {
    for (int l = 0; l < nl; ++l) {
      const double cap = sys.lines[l].capacity;
      m.flow[l][t] = p.add_column(tag("f", sys.lines[l].id, t), -cap, cap, 0.0);
    }
    for (int b = 0; b < nb; ++b) {
      if (has_angle[b]) {
        m.theta[b][t] = p.add_column(tag("th", sys.buses[b].id, t), -kInf, kInf, 0.0);
      }
      m.shed_load[b][t] = p.add_column(tag("sl", sys.buses[b].id, t), 0,
                                       d.demand[b][t], sys.shed_penalty);
      double ren = 0.0;
      bool any = false;
      for (int i = 0; i < ng; ++i) {
        if (m.units[i].is_renewable && unit_bus[i] == b) {
          ren += m.renewable_cap[i][t];
          any = true;
        }
      }
      if (any) {
        m.shed_ren[b][t] = p.add_column(tag("sr", sys.buses[b].id, t), 0, ren,
                                        sys.spill_penalty);
      }
    }
  }

  // u as a term, or its constant value 1 under the relaxation.
  auto u_term = [&](std::vector<Term>& terms, double& constant, int i, int t,
                    double coef) {
    if (m.u[i][t] >= 0) {
      terms.push_back({m.u[i][t], coef});
    } else {
      constant += coef;
    }
  };

  // Unit rows.
  for (int i = 0; i < ng; ++i) {
    const Generator& g = m.units[i];
    if (g.is_renewable) continue;
    const int S = static_cast<int>(g.blocks.size());
    for (int t = 0; t < T; ++t) {
      std::vector<Term> gen{{m.g[i][t], 1.0}};
      double c = 0.0;
      if (g.g_min != 0.0) u_term(gen, c, i, t, -g.g_min);
      for (int s = 0; s < S; ++s) gen.push_back({m.block[i][s][t], -1.0});
      p.add_row(tag("gen", g.id, t), gen, Sense::equal, -c);
      if (!tced) {
        for (int s = 0; s < S; ++s) {
          p.add_row(tag("seg" + std::to_string(s), g.id, t),
                    {{m.block[i][s][t], 1.0}, {m.u[i][t], -g.blocks[s].width}},
                    Sense::less_equal, 0.0);
        }
        p.add_row(tag("vz", g.id, t), {{m.v[i][t], 1.0}, {m.z[i][t], 1.0}},
                  Sense::less_equal, 1.0);
        std::vector<Term> logic{{m.v[i][t], 1.0}, {m.z[i][t], -1.0}};
        if (prev(t) != t) {
          logic.push_back({m.u[i][t], -1.0});
          logic.push_back({m.u[i][prev(t)], 1.0});
        }
        p.add_row(tag("logic", g.id, t), logic, Sense::equal, 0.0);
        std::vector<Term> up{{m.u[i][t], -1.0}};
        for (int k = 0; k < std::min(g.min_up, T); ++k) {
          up.push_back({m.v[i][(t - k + T) % T], 1.0});
        }
        p.add_row(tag("minup", g.id, t), up, Sense::less_equal, 0.0);
        std::vector<Term> down{{m.u[i][t], 1.0}};
        for (int k = 0; k < std::min(g.min_down, T); ++k) {
          down.push_back({m.z[i][(t - k + T) % T], 1.0});
        }
        p.add_row(tag("mindn", g.id, t), down, Sense::less_equal, 1.0);
        if (prev(t) != t) {
          p.add_ranged_row(tag("ramp", g.id, t),
                           {{m.g[i][t], 1.0}, {m.g[i][prev(t)], -1.0}},
                           -g.ramp_down, g.ramp_up);
        }
      }
      if (flex) {
        if (!tced) {
          p.add_row(tag("rupu", g.id, t),
                    {{m.rho_up[i][t], 1.0}, {m.u[i][t], -g.ramp_up}},
                    Sense::less_equal, 0.0);
          p.add_row(tag("rdnu", g.id, t),
                    {{m.rho_down[i][t], 1.0}, {m.u[i][t], -g.ramp_down}},
                    Sense::less_equal, 0.0);
        }
        p.add_row(tag("rupg", g.id, t), {{m.rho_up[i][t], 1.0}, {m.g[i][t], 1.0}},
                  Sense::less_equal, g.g_max);
        std::vector<Term> dn{{m.rho_down[i][t], 1.0}, {m.g[i][t], -1.0}};
        double c2 = 0.0;
        if (g.g_min != 0.0) u_term(dn, c2, i, t, g.g_min);
        p.add_row(tag("rdng", g.id, t), dn, Sense::less_equal, -c2);
      }
    }
  }

  // System rows.
  const auto from = detail::line_from(sys);
  const auto to = detail::line_to(sys);
  for (int t = 0; t < T; ++t) {
    double load = 0.0;
    double ren_out = 0.0;
    double ren_down = 0.0;
    for (int b = 0; b < nb; ++b) {
      std::vector<Term> terms;
      double rhs = d.demand[b][t];
      load += d.demand[b][t];
      for (int i = 0; i < ng; ++i) {
        if (unit_bus[i] != b) continue;
        if (m.units[i].is_renewable) {
          rhs -= m.renewable_cap[i][t];
        } else {
          terms.push_back({m.g[i][t], 1.0});
        }
      }
      for (int l = 0; l < nl; ++l) {
        if (from[l] == b) terms.push_back({m.flow[l][t], -1.0});
        if (to[l] == b) terms.push_back({m.flow[l][t], 1.0});
      }
      if (m.shed_ren[b][t] >= 0) terms.push_back({m.shed_ren[b][t], -1.0});
      terms.push_back({m.shed_load[b][t], 1.0});
      m.balance_row[b][t] =
          p.add_row(tag("bal", sys.buses[b].id, t), terms, Sense::equal, rhs);
    }
    for (int l = 0; l < nl; ++l) {
      // x f - theta_from + theta_to = 0
      std::vector<Term> terms{{m.flow[l][t], sys.lines[l].reactance}};
      if (m.theta[from[l]][t] >= 0) terms.push_back({m.theta[from[l]][t], -1.0});
      if (m.theta[to[l]][t] >= 0) terms.push_back({m.theta[to[l]][t], 1.0});
      p.add_row(tag("dc", sys.lines[l].id, t), terms, Sense::equal, 0.0);
    }
    for (int i = 0; i < ng; ++i) {
      if (!m.units[i].is_renewable) continue;
      const double cap = m.renewable_cap[i][t];
      ren_out += cap;
      ren_down += std::min(m.units[i].ramp_down,
                           std::max(0.0, cap - m.units[i].g_min));
    }
    std::vector<Term> res;
    double c = 0.0;
    for (int i = 0; i < ng; ++i) {
      if (m.units[i].is_renewable) continue;
      u_term(res, c, i, t, m.units[i].g_max);
      res.push_back({m.g[i][t], -1.0});
    }
    m.reserve_row[t] = p.add_row(tag("res", "sys", t), res, Sense::greater_equal,
                                 reserve_requirement(load, ren_out, largest) - c);
    if (flex) {
      std::vector<Term> up, dn;
      for (int i = 0; i < ng; ++i) {
        if (m.units[i].is_renewable) continue;
        up.push_back({m.rho_up[i][t], 1.0});
        dn.push_back({m.rho_down[i][t], 1.0});
      }
      p.add_row(tag("flexup", "sys", t), up, Sense::greater_equal,
                req.wind_up[t] + req.load_ramp[t]);
      p.add_row(tag("flexdn", "sys", t), dn, Sense::greater_equal,
                req.wind_down[t] + req.load_ramp[t] - ren_down);
    }
  }
  if (flags.gas_energy_fraction) {
    std::vector<Term> terms;
    double energy = 0.0;
    for (const auto& row : d.demand) {
      for (double v : row) energy += v;
    }
    for (int i = 0; i < ng; ++i) {
      if (m.units[i].is_renewable || m.units[i].fuel != Fuel::gas) continue;
      for (int t = 0; t < T; ++t) terms.push_back({m.g[i][t], 1.0});
    }
    m.gas_row = p.add_row("gas_limit", terms, Sense::less_equal,
                          *flags.gas_energy_fraction * energy);
  }
  return m;
}

LinearExpression emission_expression(const DayModel& m) {
  LinearExpression e;
  const int T = static_cast<int>(m.reserve_row.size());
  for (std::size_t i = 0; i < m.units.size(); ++i) {
    const Generator& g = m.units[i];
    for (int t = 0; t < T; ++t) {
      if (g.is_renewable) {
        const auto fill = detail::renewable_blocks(g, m.renewable_cap[i][t]);
        e.constant += g.e_min;
        for (std::size_t s = 0; s < fill.size(); ++s) {
          e.constant += fill[s] * g.blocks[s].marginal_emis;
        }
        continue;
      }
      if (m.u[i][t] >= 0) {
        if (g.e_min != 0.0) e.terms.push_back({m.u[i][t], g.e_min});
      } else {
        e.constant += g.e_min;
      }
      if (m.v[i][t] >= 0 && g.e_startup != 0.0) {
        e.terms.push_back({m.v[i][t], g.e_startup});
      }
      for (std::size_t s = 0; s < g.blocks.size(); ++s) {
        if (g.blocks[s].marginal_emis != 0.0) {
          e.terms.push_back({m.block[i][s][t], g.blocks[s].marginal_emis});
        }
      }
    }
  }
  return e;
}

}  // namespace ctax::ucct
