#include <cmath>
#include <limits>

#include "ctax/errors.hpp"
#include "ctax/format.hpp"
#include "ctax/tax_search.hpp"
#include "ctax/uncertainty.hpp"

namespace ctax::tax {

std::vector<std::string> TaxSearchConfig::check() const {
  std::vector<std::string> out;
  if (!(tax_low >= 0.0)) out.push_back("tax_low must be nonnegative");
  if (!(tax_low < tax_high)) out.push_back("tax_low must be below tax_high");
  if (!(tolerance > 0.0)) out.push_back("tolerance must be positive");
  if (certainty_level &&
      !(*certainty_level > 0.0 && *certainty_level < 1.0)) {
    out.push_back("certainty level must lie strictly between 0 and 1");
  }
  if (max_iterations < 1) out.push_back("max_iterations must be at least 1");
  if (!std::isfinite(target_emissions)) out.push_back("target must be finite");
  return out;
}

const char* to_string(Step s) {
  switch (s) {
    case Step::upper_check:
      return "upper_check";
    case Step::lower_check:
      return "lower_check";
    case Step::bisection:
      return "bisection";
  }
  return "?";
}

ucct::UcctResult SolveCache::solve(const SystemData& sys,
                                   std::uint64_t fingerprint, double tax,
                                   const milp::SolverConfig& cfg, int jobs) {
  const Key key{fingerprint, tax, cfg.relative_mip_gap,
                cfg.feasibility_tolerance, static_cast<int>(cfg.branching)};
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      ++hits_;
      return it->second;
    }
  }
  ucct::UcctResult r = ucct::solve_ucct(sys, tax, cfg, jobs);
  std::lock_guard<std::mutex> lock(mu_);
  entries_.emplace(key, r);
  return r;
}

std::size_t SolveCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

std::size_t SolveCache::hits() const {
  std::lock_guard<std::mutex> lock(mu_);
  return hits_;
}

bool meets_target(const ucct::UcctResult& r, const TaxSearchConfig& cfg,
                  double* probability) {
  if (!cfg.certainty_level) {
    if (probability) *probability = std::numeric_limits<double>::quiet_NaN();
    // Meeting the target exactly counts.
    return r.expected_emissions <= cfg.target_emissions;
  }
  const auto dist = uncertainty::emissions_distribution(r);
  const double p = uncertainty::attainment_probability(
      dist, uncertainty::kDaysPerYear * cfg.target_emissions);
  if (probability) *probability = p;
  return p >= *cfg.certainty_level;
}

TaxSearchResult wsb(const SystemData& sys, const TaxSearchConfig& cfg,
                    const milp::SolverConfig& solver, SolveCache* cache) {
  auto issues = cfg.check();
  if (!issues.empty()) throw ValidationError("tax search: " + issues.front());
  SolveCache local;
  SolveCache& memo = cache ? *cache : local;
  const std::uint64_t fp = fingerprint(sys);

  TaxSearchResult out;
  auto evaluate = [&](double tax, Step step, ucct::UcctResult* keep) {
    ucct::UcctResult r = memo.solve(sys, fp, tax, solver, cfg.jobs);
    TaxIteration it;
    it.step = step;
    it.tax = tax;
    it.emissions = r.expected_emissions;
    it.expected_cost = r.expected_cost;
    it.feasible = meets_target(r, cfg, &it.probability);
    out.iterations.push_back(it);
    if (keep) *keep = std::move(r);
    return it.feasible;
  };

  double lo = cfg.tax_low;
  double hi = cfg.tax_high;
  ucct::UcctResult at_hi;
  if (!evaluate(hi, Step::upper_check, &at_hi)) {
    out.optimal_tax = hi;
    out.final = std::move(at_hi);
    out.bracket_low = lo;
    out.bracket_high = hi;
    out.message = "target not met at the upper tax " + fixed6(hi) +
                  " (expected emissions " + fixed6(out.final.expected_emissions) +
                  "); raise the bracket or relax the target";
    return out;
  }
  ucct::UcctResult at_lo;
  if (evaluate(lo, Step::lower_check, &at_lo)) {
    out.optimal_tax = lo;
    out.final = std::move(at_lo);
    out.converged = true;
    out.bracket_low = out.bracket_high = lo;
    out.message = "target already met at the lower tax";
    return out;
  }
  out.converged = true;
  while (hi - lo > cfg.tolerance) {
    if (out.bisection_steps >= cfg.max_iterations) {
      out.converged = false;
      out.message = "stopped after " + std::to_string(out.bisection_steps) +
                    " bisection steps with bracket [" + fixed6(lo) + ", " +
                    fixed6(hi) + "]";
      break;
    }
    const double mid = 0.5 * (lo + hi);
    ucct::UcctResult r;
    ++out.bisection_steps;
    if (evaluate(mid, Step::bisection, &r)) {
      hi = mid;
      at_hi = std::move(r);
    } else {
      lo = mid;
    }
  }
  out.optimal_tax = hi;
  out.final = std::move(at_hi);
  out.bracket_low = lo;
  out.bracket_high = hi;
  if (out.converged) {
    out.message = "converged in " + std::to_string(out.bisection_steps) +
                  " bisection steps";
  }
  return out;
}

void write_iterations_csv(const TaxSearchResult& r, std::ostream& out) {
  out << "index,step,tax,expected_emissions,expected_cost,probability,feasible\n";
  for (std::size_t k = 0; k < r.iterations.size(); ++k) {
    const auto& it = r.iterations[k];
    out << k << ',' << to_string(it.step) << ',' << fixed6(it.tax) << ','
        << fixed6(it.emissions) << ',' << fixed6(it.expected_cost) << ','
        << (std::isnan(it.probability) ? std::string() : fixed6(it.probability))
        << ',' << (it.feasible ? 1 : 0) << '\n';
  }
}

}  // namespace ctax::tax
