#include "ctax/uncertainty.hpp"

#include <cmath>

#include "ctax/errors.hpp"

namespace ctax::uncertainty {

double EmissionsDistribution::stddev() const { return std::sqrt(variance); }

EmissionsDistribution emissions_distribution(
    const std::vector<double>& probabilities,
    const std::vector<double>& day_emissions) {
  if (probabilities.size() != day_emissions.size()) {
    throw ValidationError("one probability per day emission value is required");
  }
  EmissionsDistribution d;
  d.probabilities = probabilities;
  d.day_emissions = day_emissions;
  for (std::size_t a = 0; a < probabilities.size(); ++a) {
    d.daily_expected += probabilities[a] * day_emissions[a];
  }
  double spread = 0.0;
  for (std::size_t a = 0; a < probabilities.size(); ++a) {
    const double dev = day_emissions[a] - d.daily_expected;
    spread += probabilities[a] * dev * dev;
  }
  d.mean_annual = kDaysPerYear * d.daily_expected;
  d.variance = kDaysPerYear * spread;
  return d;
}

EmissionsDistribution emissions_distribution(const ucct::UcctResult& result) {
  std::vector<double> p, e;
  for (const auto& day : result.days) {
    p.push_back(day.probability);
    e.push_back(day.emissions);
  }
  return emissions_distribution(p, e);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double attainment_probability(const EmissionsDistribution& dist,
                              double annual_target) {
  const double sigma = dist.stddev();
  if (sigma == 0.0) return dist.mean_annual <= annual_target ? 1.0 : 0.0;
  return normal_cdf((annual_target - dist.mean_annual) / sigma);
}

}  // namespace ctax::uncertainty
