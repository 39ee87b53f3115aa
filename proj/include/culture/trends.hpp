// Concept popularity over time and space: binned series, [-1, 1]
// normalization, DTW trend-shape clustering, hour-of-day profiles and
// hemisphere opposition.
#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "culture/core.hpp"
#include "culture/stat.hpp"

namespace culture::trends {

enum class Granularity { Hour, Day, Month };

std::string_view granularity_name(Granularity g);
Granularity parse_granularity(std::string_view name);

inline constexpr std::string_view kGlobalRegion = "global";

// A set of region codes; empty means every region ("global").
struct RegionFilter {
  std::vector<std::string> regions;

  static RegionFilter global() { return {}; }
  static RegionFilter single(std::string region) { return {{std::move(region)}}; }
  bool is_global() const { return regions.empty(); }
  bool matches(std::string_view region) const;
  std::string label() const;
};

struct TrendSeries {
  ConceptId concept_id = 0;
  std::string region{kGlobalRegion};
  Granularity granularity = Granularity::Month;
  std::vector<Timestamp> bins;        // bin start times
  std::vector<double> values;
  std::vector<std::size_t> counts;    // events per bin
  std::vector<std::size_t> empty_bins;
  bool normalized = false;
};

// Fixed UTC offsets per region (no DST).
using UtcOffsetTable = std::map<std::string, Timestamp, std::less<>>;

// Bin starts covering the period at the given granularity.
std::vector<Timestamp> make_bins(TimeWindow period, Granularity g);

// Mean concept score per bin over matching events; empty bins hold 0.
TrendSeries popularity_series(const EventLog& log, ConceptId concept_id, const RegionFilter& filter,
                              Granularity g, TimeWindow period);

// Min-max map onto [-1, 1]; constant series become all zeros.
TrendSeries normalize_series(TrendSeries s);

struct TrendClustering {
  std::vector<std::size_t> cluster;       // per input series
  std::vector<std::size_t> medoid;        // per cluster, index into the input
  std::vector<bool> is_medoid;            // per input series
  double cost = 0.0;
};

inline constexpr std::size_t kDefaultTrendClusters = 7;

// k-medoids over DTW distances. Input order does not affect the result.
TrendClustering cluster_trends(std::span<const TrendSeries> series, std::size_t k,
                               std::uint64_t seed, std::size_t threads = 1);

struct HourlyProfile {
  std::array<double, 24> mean{};
  std::array<std::size_t, 24> counts{};
  bool empty = true;
};

HourlyProfile hourly_profile(const EventLog& log, ConceptId concept_id, std::string_view region,
                             const UtcOffsetTable& offsets);

// Pearson r between the normalized monthly series of two region groups.
stat::TestResult seasonal_opposition(const EventLog& log, ConceptId concept_id,
                                     const RegionFilter& north, const RegionFilter& south,
                                     TimeWindow period);

}  // namespace culture::trends
