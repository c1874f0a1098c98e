#pragma once

// Sampling uncertainty of annual emissions when a year is represented by a
// handful of weighted days.

#include <vector>

#include "ctax/ucct.hpp"

namespace ctax::uncertainty {

inline constexpr double kDaysPerYear = 365.0;

struct EmissionsDistribution {
  double daily_expected = 0.0;  // sum_a pi_a E_a
  double mean_annual = 0.0;     // 365 * daily_expected
  double variance = 0.0;        // 365 * sum_a pi_a (E_a - daily_expected)^2
  std::vector<double> day_emissions;
  std::vector<double> probabilities;

  double stddev() const;
};

EmissionsDistribution emissions_distribution(const ucct::UcctResult& result);
EmissionsDistribution emissions_distribution(
    const std::vector<double>& probabilities,
    const std::vector<double>& day_emissions);

// Standard normal CDF.
double normal_cdf(double x);

// Probability that annual emissions stay at or below annual_target.
double attainment_probability(const EmissionsDistribution& dist,
                              double annual_target);

}  // namespace ctax::uncertainty
