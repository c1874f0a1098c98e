#include "ctax/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ctax/errors.hpp"
#include "ctax/format.hpp"
#include "ctax/repdays.hpp"
#include "ctax/system.hpp"
#include "ctax/tax_search.hpp"
#include "ctax/ucct.hpp"
#include "json.hpp"

namespace ctax::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Common {
  std::string system;
  std::string scenario;
  double gap = 1e-3;
  int jobs = 1;
  std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("system", c.system, "system JSON file")->required();
  cmd->add_option("--scenario", c.scenario, "scenario JSON file");
  cmd->add_option("--gap", c.gap, "relative MIP gap")->check(CLI::NonNegativeNumber);
  cmd->add_option("--jobs", c.jobs, "concurrent day solves")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "output directory");
}

std::pair<double, double> parse_pair(const std::string& s, const char* what) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) {
    throw CLI::ValidationError(what, "expected lo,hi");
  }
  try {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError(what, "expected two numbers, got '" + s + "'");
  }
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(what, "bad number '" + item + "'");
    }
  }
  return out;
}

// Output files of one run, recorded for the manifest.
class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }
  void write(const std::string& name, const std::function<void(std::ostream&)>& f) {
    const fs::path p = fs::path(dir_) / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("cannot write " + p.string());
    f(os);
    files_.push_back(name);
  }
  const std::string& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

struct Session {
  std::vector<std::string> argv;
  std::string command;
  Json inputs = Json::object();
  Json config = Json::object();
  Json results = Json::object();
  Json scenario;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void finish(Outputs& o) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Json m;
    m["command"] = command;
    m["argv"] = argv;
    m["inputs"] = inputs;
    m["scenario"] = scenario;
    m["config"] = config;
    m["results"] = results;
    m["tool_version"] = kVersion;
    m["wall_time_seconds"] = wall;
    std::vector<std::string> files = o.files();
    files.push_back("manifest.json");
    m["outputs"] = files;
    o.write("manifest.json", [&](std::ostream& os) { os << m.dump(2) << '\n'; });
  }
};

SystemData load_case(const Common& c, Session& s) {
  SystemData sys = load_system(c.system);
  s.inputs["system"] = c.system;
  if (!c.scenario.empty()) {
    const ScenarioSpec spec = load_scenario(c.scenario);
    s.inputs["scenario"] = c.scenario;
    s.scenario = Json::parse(to_json_text(spec));
    sys = apply_scenario(sys, spec);
  }
  s.config["gap"] = c.gap;
  s.config["jobs"] = c.jobs;
  return sys;
}

milp::SolverConfig solver_config(const Common& c) {
  milp::SolverConfig cfg;
  cfg.relative_mip_gap = c.gap;
  return cfg;
}

void write_result(const SystemData& sys, const ucct::UcctResult& r, Outputs& o) {
  o.write("dispatch.csv", [&](std::ostream& os) { ucct::write_dispatch_csv(sys, r, os); });
  o.write("prices.csv", [&](std::ostream& os) { ucct::write_prices_csv(sys, r, os); });
  o.write("summary.csv", [&](std::ostream& os) { ucct::write_summary_csv(r, os); });
  o.write("days.csv", [&](std::ostream& os) { ucct::write_days_csv(r, os); });
  o.write("generators.csv",
          [&](std::ostream& os) { ucct::write_generators_csv(sys, r, os); });
}

void print_result(const ucct::UcctResult& r, std::ostream& out) {
  out << "expected_cost " << fixed6(r.expected_cost) << '\n'
      << "expected_emissions " << fixed6(r.expected_emissions) << '\n'
      << "tax_revenue " << fixed6(r.tax_revenue) << '\n';
}

// Minimal CSV table keyed by header names.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw ParseError("missing column " + name);
  }
};

Table read_table(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ParseError("cannot open " + p.string());
  Table t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw ParseError(p.string() + " is empty");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
    if (t.rows.back().size() != t.header.size()) {
      throw ParseError(p.string() + ": ragged row '" + line + "'");
    }
  }
  return t;
}

double to_number(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "'");
  }
}

int report(const std::string& dir, std::ostream& out) {
  const fs::path base(dir);
  const Table gens = read_table(base / "generators.csv");
  const Table prices = read_table(base / "prices.csv");
  const Table days = read_table(base / "days.csv");
  const Table summary = read_table(base / "summary.csv");

  std::map<std::string, double> energy, profit;
  {
    const int fuel = gens.column("fuel");
    const int e = gens.column("energy");
    const int p = gens.column("profit");
    for (const auto& r : gens.rows) {
      energy[r[fuel]] += to_number(r[e]);
      profit[r[fuel]] += to_number(r[p]);
    }
  }
  std::map<std::string, double> prob;
  for (const auto& r : days.rows) {
    prob[r[days.column("day")]] = to_number(r[days.column("probability")]);
  }
  // Probability-weighted hourly LMP moments per bus.
  std::vector<std::string> bus_order;
  std::map<std::string, std::vector<std::pair<double, double>>> samples;
  std::map<std::string, int> hours;
  {
    const int dcol = prices.column("day");
    const int bcol = prices.column("bus");
    const int lcol = prices.column("lmp");
    for (const auto& r : prices.rows) {
      if (!samples.count(r[bcol])) bus_order.push_back(r[bcol]);
      auto it = prob.find(r[dcol]);
      if (it == prob.end()) throw ParseError("prices.csv names unknown day " + r[dcol]);
      samples[r[bcol]].push_back({it->second, to_number(r[lcol])});
      ++hours[r[dcol] + "\n" + r[bcol]];
    }
  }

  out << "energy by fuel (MWh/day)\n";
  for (const auto& [f, v] : energy) out << "  " << f << ' ' << fixed6(v) << '\n';
  out << "profit by fuel ($/day)\n";
  for (const auto& [f, v] : profit) out << "  " << f << ' ' << fixed6(v) << '\n';
  out << "lmp by bus ($/MWh): mean stddev\n";
  for (const auto& b : bus_order) {
    double w = 0.0, mean = 0.0;
    for (const auto& [p, v] : samples[b]) {
      w += p;
      mean += p * v;
    }
    mean = w > 0.0 ? mean / w : 0.0;
    double var = 0.0;
    for (const auto& [p, v] : samples[b]) var += p * (v - mean) * (v - mean);
    var = w > 0.0 ? var / w : 0.0;
    out << "  " << b << ' ' << fixed6(mean) << ' ' << fixed6(std::sqrt(var)) << '\n';
  }
  if (summary.rows.empty()) throw ParseError("summary.csv has no data row");
  const auto& s = summary.rows.front();
  out << "congestion_surplus " << s[summary.column("congestion_surplus")] << '\n';
  out << "tax_revenue " << s[summary.column("tax_revenue")] << '\n';
  return kOk;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err, int depth);

int replay(const std::string& manifest_path, const std::string& out_dir,
           std::ostream& out, std::ostream& err, int depth) {
  std::ifstream in(manifest_path);
  if (!in) throw ParseError("cannot open " + manifest_path);
  Json m;
  try {
    m = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(manifest_path + ": " + e.what());
  }
  if (!m.contains("argv") || !m["argv"].is_array()) {
    throw ParseError(manifest_path + ": missing argv");
  }
  std::vector<std::string> args = m["argv"].get<std::vector<std::string>>();
  if (!out_dir.empty()) {
    bool replaced = false;
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--out") {
        args[i + 1] = out_dir;
        replaced = true;
      }
    }
    if (!replaced) {
      args.push_back("--out");
      args.push_back(out_dir);
    }
  }
  return dispatch(args, out, err, depth + 1);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err, int depth) {
  CLI::App app{"carbon tax planning over representative days", "ctax"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common c;
  double tax = 0.0;
  auto* solve = app.add_subcommand("solve", "unit commitment at a fixed tax");
  add_common(solve, c);
  solve->add_option("--tax", tax, "$/ton")->check(CLI::NonNegativeNumber);

  auto* find = app.add_subcommand("find-tax", "minimal tax meeting a target");
  add_common(find, c);
  std::optional<double> target_tons, target_reduction, certainty;
  std::string bracket = "0,100";
  double tolerance = 0.01;
  int max_iterations = 64;
  std::string method = "wsb";
  auto* tons = find->add_option("--target-tons", target_tons, "expected tons per day");
  auto* pct = find->add_option("--target-reduction", target_reduction,
                               "percent below the zero-tax emissions")
                  ->check(CLI::Range(0.0, 100.0));
  tons->excludes(pct);
  find->add_option("--certainty", certainty, "required attainment probability")
      ->check(CLI::Range(0.0, 1.0));
  find->add_option("--bracket", bracket, "lo,hi in $/ton");
  find->add_option("--tolerance", tolerance, "$/ton")->check(CLI::PositiveNumber);
  find->add_option("--max-iterations", max_iterations)->check(CLI::PositiveNumber);
  find->add_option("--method", method)->check(CLI::IsMember({"wsb", "cemv"}));

  auto* pareto = app.add_subcommand("pareto", "sample the cost/emissions frontier");
  add_common(pareto, c);
  std::string mode = "cap";
  int points = 11;
  std::string taxes, caps, tax_range = "0,100";
  pareto->add_option("--mode", mode)->check(CLI::IsMember({"cap", "tax"}));
  pareto->add_option("--points", points)->check(CLI::PositiveNumber);
  pareto->add_option("--tax", taxes, "explicit tax list a,b,c (tax mode)");
  pareto->add_option("--caps", caps, "cap range lo,hi in tons/day (cap mode)");
  pareto->add_option("--bracket", tax_range, "tax range lo,hi");

  auto* cluster = app.add_subcommand("cluster", "representative days from a year CSV");
  std::string year_csv;
  int k = 5, horizon = 24;
  std::string cluster_out = "out";
  cluster->add_option("year", year_csv, "hourly year CSV")->required();
  cluster->add_option("--k", k, "number of representative days")->check(CLI::PositiveNumber);
  cluster->add_option("--horizon", horizon, "hours per day")->check(CLI::PositiveNumber);
  cluster->add_option("--out", cluster_out, "output directory");

  auto* rep = app.add_subcommand("report", "summary table from result CSVs");
  std::string result_dir;
  rep->add_option("dir", result_dir, "directory holding the CSVs")->required();

  auto* rerun = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  std::string manifest_path, replay_out;
  rerun->add_option("manifest", manifest_path)->required();
  rerun->add_option("--out", replay_out, "output directory override");

  std::vector<const char*> cargv{"ctax"};
  for (const auto& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  Session session;
  session.argv = args;

  if (*solve) {
    session.command = "solve";
    const SystemData sys = load_case(c, session);
    const milp::SolverConfig cfg = solver_config(c);
    session.config["tax"] = tax;
    ucct::UcctResult r = ucct::solve_ucct(sys, tax, cfg, c.jobs);
    ucct::extract_prices(sys, r, cfg);
    Outputs o(c.out);
    write_result(sys, r, o);
    session.results["expected_cost"] = r.expected_cost;
    session.results["expected_emissions"] = r.expected_emissions;
    session.finish(o);
    out << "tax " << fixed6(tax) << '\n';
    print_result(r, out);
    return kOk;
  }

  if (*find) {
    session.command = "find-tax";
    if (!target_tons && !target_reduction) {
      err << "find-tax: give --target-tons or --target-reduction\n";
      return kUsage;
    }
    const SystemData sys = load_case(c, session);
    const milp::SolverConfig cfg = solver_config(c);
    tax::SolveCache cache;
    const std::uint64_t fp = fingerprint(sys);
    double target = 0.0;
    if (target_tons) {
      target = *target_tons;
    } else {
      const ucct::UcctResult base = cache.solve(sys, fp, 0.0, cfg, c.jobs);
      target = base.expected_emissions * (1.0 - *target_reduction / 100.0);
      session.results["baseline_emissions"] = base.expected_emissions;
    }
    session.config["target_emissions"] = target;
    session.config["method"] = method;
    Outputs o(c.out);

    if (method == "cemv") {
      const tax::CemvResult r = tax::cemv(sys, target, cfg, c.jobs);
      ucct::UcctResult realized = r.realized;
      ucct::extract_prices(sys, realized, cfg);
      write_result(sys, realized, o);
      session.results["lambda"] = r.capped.lambda;
      session.results["capped_emissions"] = r.capped.expected_emissions;
      session.results["realized_emissions"] = r.realized_emissions;
      session.results["meets_target"] = r.meets_target;
      session.finish(o);
      out << "lambda " << fixed6(r.capped.lambda) << '\n'
          << "target " << fixed6(target) << '\n'
          << "realized_emissions " << fixed6(r.realized_emissions) << '\n'
          << "meets_target " << (r.meets_target ? "yes" : "no") << '\n';
      return kOk;
    }

    tax::TaxSearchConfig tc;
    tc.target_emissions = target;
    std::tie(tc.tax_low, tc.tax_high) = parse_pair(bracket, "--bracket");
    tc.tolerance = tolerance;
    tc.certainty_level = certainty;
    tc.max_iterations = max_iterations;
    tc.jobs = c.jobs;
    session.config["bracket"] = {tc.tax_low, tc.tax_high};
    session.config["tolerance"] = tc.tolerance;
    session.config["max_iterations"] = tc.max_iterations;
    session.config["certainty"] = certainty ? Json(*certainty) : Json(nullptr);
    const tax::TaxSearchResult r = tax::wsb(sys, tc, cfg, &cache);
    ucct::UcctResult fin = r.final;
    ucct::extract_prices(sys, fin, cfg);
    o.write("iterations.csv", [&](std::ostream& os) { tax::write_iterations_csv(r, os); });
    write_result(sys, fin, o);
    session.results["optimal_tax"] = r.optimal_tax;
    session.results["converged"] = r.converged;
    session.results["bisection_iterations"] = r.bisection_steps;
    session.results["evaluations"] = r.iterations.size();
    session.results["bracket"] = {r.bracket_low, r.bracket_high};
    session.results["expected_emissions"] = fin.expected_emissions;
    session.results["message"] = r.message;
    session.finish(o);
    if (!r.converged) {
      err << "find-tax: " << r.message << '\n';
      return kNoConvergence;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", r.optimal_tax);
    out << "tax " << buf << '\n'
        << "target " << fixed6(target) << '\n'
        << "bisection_steps " << r.bisection_steps << '\n';
    print_result(fin, out);
    return kOk;
  }

  if (*pareto) {
    session.command = "pareto";
    const SystemData sys = load_case(c, session);
    const milp::SolverConfig cfg = solver_config(c);
    const auto [tlo, thi] = parse_pair(tax_range, "--bracket");
    session.config["mode"] = mode;
    session.config["points"] = points;
    tax::ParetoSample sample;
    tax::SolveCache cache;
    if (mode == "tax") {
      std::vector<double> list;
      if (!taxes.empty()) {
        list = parse_list(taxes, "--tax");
        if (static_cast<int>(list.size()) != points && pareto->count("--points")) {
          err << "pareto: --points disagrees with the --tax list\n";
          return kUsage;
        }
      } else {
        for (int i = 0; i < points; ++i) {
          list.push_back(points == 1 ? tlo : tlo + (thi - tlo) * i / (points - 1));
        }
      }
      session.config["taxes"] = list;
      sample = tax::sample_pareto_by_tax(sys, list, cfg, c.jobs, &cache);
    } else {
      double lo = 0.0, hi = 0.0;
      if (!caps.empty()) {
        std::tie(lo, hi) = parse_pair(caps, "--caps");
      } else {
        // Frontier between the zero-tax point and the upper bracket tax.
        const std::uint64_t fp = fingerprint(sys);
        lo = cache.solve(sys, fp, thi, cfg, c.jobs).expected_emissions;
        hi = cache.solve(sys, fp, tlo, cfg, c.jobs).expected_emissions;
      }
      session.config["caps"] = {lo, hi};
      sample = tax::sample_pareto_by_cap(sys, points, lo, hi, cfg, c.jobs);
    }
    Outputs o(c.out);
    o.write("pareto.csv", [&](std::ostream& os) { tax::write_pareto_csv(sample, os); });
    session.finish(o);
    out << "points " << sample.points.size() << '\n';
    return kOk;
  }

  if (*cluster) {
    session.command = "cluster";
    const repdays::YearData year = repdays::load_year_csv(year_csv, horizon);
    session.inputs["year"] = year_csv;
    session.config["k"] = k;
    session.config["horizon"] = horizon;
    const auto days = repdays::cluster_days(year, k);
    const std::string text =
        days_to_json_text(days, repdays::participation_buses(year));
    Outputs o(cluster_out);
    o.write("days.json", [&](std::ostream& os) { os << text << '\n'; });
    session.finish(o);
    out << text << '\n';
    return kOk;
  }

  if (*rep) return report(result_dir, out);

  if (*rerun) {
    if (depth > 0) throw ValidationError("a manifest cannot replay another replay");
    return replay(manifest_path, replay_out, out, err, depth);
  }
  return kUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err, 0);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ConvergenceError& e) {
    err << "no convergence: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const SolveError& e) {
    err << "solve failure: " << e.what() << '\n';
    return kSolveFailure;
  } catch (const CLI::Error& e) {
    err << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace ctax::cli
