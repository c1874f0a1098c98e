#pragma once

// Representative-day selection from a year of hourly data by agglomerative
// clustering (Ward linkage, medoid representatives, frequency weights).

#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "ctax/system.hpp"

namespace ctax::repdays {

struct YearDay {
  std::string date;
  std::vector<double> load;                // [hour], system total
  std::vector<std::vector<double>> wind;   // [unit][hour]
};

struct YearData {
  // Bus participation factors, in header order.
  std::vector<std::pair<std::string, double>> participation;
  std::vector<std::string> wind_ids;
  std::vector<YearDay> days;
  int horizon = 24;
};

// Hourly CSV:
//   # participation: B1=0.6,B2=0.4
//   timestamp,load,W1,W2
//   2023-01-01T00:00,812.5,40.1,12.0
// Rows are grouped into days by the date before 'T' or ' '; every date needs
// exactly `horizon` rows. ParseError on malformed input.
YearData parse_year_csv(std::istream& in, int horizon = 24);
YearData load_year_csv(const std::string& path, int horizon = 24);

struct DailyProfile {
  std::string date;
  std::vector<double> features;
};

// Hourly load followed by hourly aggregate renewable availability, each
// dimension standardized over the year (constant dimensions map to 0).
std::vector<DailyProfile> make_profiles(const YearData& year);

struct Clustering {
  // Profile indices in date order; members[c] sorted, clusters ordered by
  // their medoid's date.
  std::vector<std::vector<int>> members;
  std::vector<int> medoids;
  std::vector<double> probabilities;
};

// Profiles are sorted by date first, so the result does not depend on input
// order. ValidationError for k out of range or ragged features.
Clustering cluster_profiles(const std::vector<DailyProfile>& profiles, int k);

// Representative days built from the medoids of a clustering of the year.
// Demand follows the participation factors; flexibility requirements are
// written explicitly with the default 1% / 20% rule.
std::vector<RepresentativeDay> cluster_days(const YearData& year, int k);

std::vector<Bus> participation_buses(const YearData& year);

}  // namespace ctax::repdays
