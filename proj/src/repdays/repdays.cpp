#include "ctax/repdays.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "ctax/errors.hpp"

namespace ctax::repdays {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double number(const std::string& s, int line) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

YearData parse_year_csv(std::istream& in, int horizon) {
  if (horizon < 1) throw ValidationError("horizon must be at least 1 hour");
  YearData year;
  year.horizon = horizon;
  std::string raw;
  int line = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s[0] == '#') {
      const std::string key = "participation:";
      const auto at = s.find(key);
      if (at == std::string::npos) continue;
      for (const auto& item : split(s.substr(at + key.size()), ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
          throw ParseError("line " + std::to_string(line) +
                           ": participation entry needs bus=factor");
        }
        year.participation.emplace_back(trim(item.substr(0, eq)),
                                         number(trim(item.substr(eq + 1)), line));
      }
      continue;
    }
    const auto cells = split(s, ',');
    if (!have_header) {
      if (cells.size() < 2 || cells[0] != "timestamp" || cells[1] != "load") {
        throw ParseError("line " + std::to_string(line) +
                         ": header must start with timestamp,load");
      }
      year.wind_ids.assign(cells.begin() + 2, cells.end());
      have_header = true;
      continue;
    }
    if (cells.size() != year.wind_ids.size() + 2) {
      throw ParseError("line " + std::to_string(line) + ": expected " +
                       std::to_string(year.wind_ids.size() + 2) + " fields");
    }
    const auto cut = cells[0].find_first_of("T ");
    const std::string date = cells[0].substr(0, cut);
    if (date.empty()) throw ParseError("line " + std::to_string(line) + ": empty timestamp");
    if (year.days.empty() || year.days.back().date != date) {
      for (const auto& d : year.days) {
        if (d.date == date) {
          throw ParseError("line " + std::to_string(line) + ": rows of " + date +
                           " are not contiguous");
        }
      }
      YearDay d;
      d.date = date;
      d.wind.resize(year.wind_ids.size());
      year.days.push_back(std::move(d));
    }
    YearDay& d = year.days.back();
    if (static_cast<int>(d.load.size()) == horizon) {
      throw ParseError("line " + std::to_string(line) + ": day " + date +
                       " has more than " + std::to_string(horizon) + " rows");
    }
    d.load.push_back(number(cells[1], line));
    for (std::size_t w = 0; w < year.wind_ids.size(); ++w) {
      d.wind[w].push_back(number(cells[w + 2], line));
    }
  }
  if (!have_header) throw ParseError("missing header line");
  if (year.days.empty()) throw ParseError("no data rows");
  for (const auto& d : year.days) {
    if (static_cast<int>(d.load.size()) != horizon) {
      throw ParseError("day " + d.date + " has " + std::to_string(d.load.size()) +
                       " rows, expected " + std::to_string(horizon));
    }
  }
  if (year.participation.empty()) {
    throw ParseError("missing '# participation:' line");
  }
  double total = 0.0;
  for (const auto& [bus, f] : year.participation) {
    if (f < 0.0) throw ValidationError("negative participation for bus " + bus);
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("participation factors sum to " + std::to_string(total) +
                          ", expected 1");
  }
  return year;
}

YearData load_year_csv(const std::string& path, int horizon) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return parse_year_csv(in, horizon);
}

std::vector<DailyProfile> make_profiles(const YearData& year) {
  const int T = year.horizon;
  const std::size_t n = year.days.size();
  std::vector<DailyProfile> out(n);
  for (std::size_t a = 0; a < n; ++a) {
    const YearDay& d = year.days[a];
    out[a].date = d.date;
    out[a].features.assign(2 * T, 0.0);
    for (int t = 0; t < T; ++t) {
      out[a].features[t] = d.load[t];
      for (const auto& w : d.wind) out[a].features[T + t] += w[t];
    }
  }
  for (int k = 0; k < 2 * T; ++k) {
    double mean = 0.0;
    for (const auto& p : out) mean += p.features[k];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& p : out) var += (p.features[k] - mean) * (p.features[k] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (auto& p : out) p.features[k] = sd > 0.0 ? (p.features[k] - mean) / sd : 0.0;
  }
  return out;
}

Clustering cluster_profiles(const std::vector<DailyProfile>& input, int k) {
  const int n = static_cast<int>(input.size());
  if (k < 1 || k > n) {
    throw ValidationError("k must lie in [1, " + std::to_string(n) + "], got " +
                          std::to_string(k));
  }
  for (const auto& p : input) {
    if (p.features.size() != input.front().features.size()) {
      throw ValidationError("profile " + p.date + " has a different feature dimension");
    }
  }
  // Work in date order.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return input[a].date < input[b].date; });
  for (int i = 1; i < n; ++i) {
    if (input[order[i]].date == input[order[i - 1]].date) {
      throw ValidationError("duplicate profile date " + input[order[i]].date);
    }
  }
  auto feat = [&](int i) -> const std::vector<double>& {
    return input[order[i]].features;
  };

  // Ward linkage on squared Euclidean distances (Lance-Williams update).
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) d[i][j] = d[j][i] = sq_distance(feat(i), feat(j));
  }
  std::vector<std::vector<int>> members(n);
  for (int i = 0; i < n; ++i) members[i] = {i};
  std::vector<bool> alive(n, true);
  for (int clusters = n; clusters > k; --clusters) {
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    // Slots are indexed by their earliest member, so scanning order breaks
    // ties by date.
    for (int i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (alive[j] && d[i][j] < best) {
          best = d[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    const double ni = static_cast<double>(members[bi].size());
    const double nj = static_cast<double>(members[bj].size());
    for (int m = 0; m < n; ++m) {
      if (!alive[m] || m == bi || m == bj) continue;
      const double nm = static_cast<double>(members[m].size());
      const double v =
          ((ni + nm) * d[bi][m] + (nj + nm) * d[bj][m] - nm * d[bi][bj]) /
          (ni + nj + nm);
      d[bi][m] = d[m][bi] = v;
    }
    members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
    std::sort(members[bi].begin(), members[bi].end());
    members[bj].clear();
    alive[bj] = false;
  }

  struct Group {
    std::vector<int> members;
    int medoid;
  };
  std::vector<Group> groups;
  for (int i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    int medoid = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int a : members[i]) {  // date order, strict < keeps the earliest
      double s = 0.0;
      for (int b : members[i]) s += std::sqrt(sq_distance(feat(a), feat(b)));
      if (s < best) {
        best = s;
        medoid = a;
      }
    }
    groups.push_back({members[i], medoid});
  }
  std::sort(groups.begin(), groups.end(),
            [](const Group& a, const Group& b) { return a.medoid < b.medoid; });

  Clustering out;
  double assigned = 0.0;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    std::vector<int> orig;
    for (int i : groups[c].members) orig.push_back(order[i]);
    out.members.push_back(orig);
    out.medoids.push_back(order[groups[c].medoid]);
    double p = static_cast<double>(groups[c].members.size()) / n;
    if (c + 1 == groups.size()) {
      p = 1.0 - assigned;
      // Nudge until the left-to-right sum lands on 1 exactly.
      for (int guard = 0; guard < 8 && assigned + p != 1.0; ++guard) {
        p = std::nextafter(p, assigned + p < 1.0 ? 2.0 : -1.0);
      }
    }
    out.probabilities.push_back(p);
    assigned += p;
  }
  return out;
}

std::vector<Bus> participation_buses(const YearData& year) {
  std::vector<Bus> out;
  for (const auto& [id, f] : year.participation) out.push_back({id, id});
  return out;
}

std::vector<RepresentativeDay> cluster_days(const YearData& year, int k) {
  const Clustering c = cluster_profiles(make_profiles(year), k);
  const int T = year.horizon;
  std::vector<RepresentativeDay> out;
  for (std::size_t a = 0; a < c.medoids.size(); ++a) {
    const YearDay& src = year.days[c.medoids[a]];
    RepresentativeDay d;
    d.id = src.date;
    d.probability = c.probabilities[a];
    for (const auto& [bus, f] : year.participation) {
      std::vector<double> row(T);
      for (int t = 0; t < T; ++t) row[t] = f * src.load[t];
      d.demand.push_back(std::move(row));
    }
    std::vector<double> wind(T, 0.0);
    for (std::size_t w = 0; w < year.wind_ids.size(); ++w) {
      d.renewable_cap[year.wind_ids[w]] = src.wind[w];
      for (int t = 0; t < T; ++t) wind[t] += src.wind[w][t];
    }
    d.load_ramp_req.resize(T);
    for (int t = 0; t < T; ++t) d.load_ramp_req[t] = 0.01 * src.load[t];
    d.wind_up_req.resize(T);
    for (int t = 0; t < T; ++t) d.wind_up_req[t] = 0.2 * wind[t];
    d.wind_down_req = d.wind_up_req;
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace ctax::repdays
