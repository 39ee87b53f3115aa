#include "culture/trends.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "culture/timeutil.hpp"

namespace culture::trends {

std::string_view granularity_name(Granularity g) {
  switch (g) {
    case Granularity::Hour: return "hour";
    case Granularity::Day: return "day";
    case Granularity::Month: return "month";
  }
  return "month";
}

Granularity parse_granularity(std::string_view name) {
  if (name == "hour") return Granularity::Hour;
  if (name == "day") return Granularity::Day;
  if (name == "month") return Granularity::Month;
  throw Error("unknown granularity '" + std::string(name) + "' (expected hour, day or month)");
}

bool RegionFilter::matches(std::string_view region) const {
  if (regions.empty()) return true;
  return std::find(regions.begin(), regions.end(), region) != regions.end();
}

std::string RegionFilter::label() const {
  if (regions.empty()) return std::string(kGlobalRegion);
  std::string out;
  for (const auto& r : regions) out += (out.empty() ? "" : "+") + r;
  return out;
}

std::vector<Timestamp> make_bins(TimeWindow period, Granularity g) {
  if (period.empty()) throw Error("popularity series: empty period");
  std::vector<Timestamp> bins;
  switch (g) {
    case Granularity::Hour:
      for (Timestamp t = floor_to_hour(period.begin); t < period.end; t += kSecondsPerHour) bins.push_back(t);
      break;
    case Granularity::Day:
      for (Timestamp t = floor_to_day(period.begin); t < period.end; t += kSecondsPerDay) bins.push_back(t);
      break;
    case Granularity::Month:
      for (Timestamp t = floor_to_month(period.begin); t < period.end; t = add_months(t, 1)) bins.push_back(t);
      break;
  }
  return bins;
}

TrendSeries popularity_series(const EventLog& log, ConceptId concept_id, const RegionFilter& filter,
                              Granularity g, TimeWindow period) {
  for (const auto& r : filter.regions) {
    if (!log.has_region(r)) throw Error("unknown region code '" + r + "'");
  }
  TrendSeries s;
  s.concept_id = concept_id;
  s.region = filter.label();
  s.granularity = g;
  s.bins = make_bins(period, g);
  std::vector<double> sums(s.bins.size(), 0.0);
  s.counts.assign(s.bins.size(), 0);

  const auto [lo, hi] = log.range(period);
  const auto events = log.events();
  for (std::size_t i = lo; i < hi; ++i) {
    const auto& e = events[i];
    if (!filter.matches(e.region)) continue;
    const auto it = std::upper_bound(s.bins.begin(), s.bins.end(), e.ts);
    const auto b = static_cast<std::size_t>(it - s.bins.begin()) - 1;
    sums[b] += e.score(concept_id);
    ++s.counts[b];
  }
  s.values.resize(s.bins.size());
  for (std::size_t b = 0; b < s.bins.size(); ++b) {
    if (s.counts[b] == 0) {
      s.values[b] = 0.0;
      s.empty_bins.push_back(b);
    } else {
      s.values[b] = sums[b] / static_cast<double>(s.counts[b]);
    }
  }
  return s;
}

TrendSeries normalize_series(TrendSeries s) {
  if (s.normalized) throw Error("normalize_series: series is already normalized");
  if (!s.values.empty()) {
    const auto [mn, mx] = std::minmax_element(s.values.begin(), s.values.end());
    const double lo = *mn, hi = *mx;
    for (auto& v : s.values) {
      v = hi > lo ? 2.0 * (v - lo) / (hi - lo) - 1.0 : 0.0;
    }
    if (hi > lo) {
      // Pin the extremes exactly.
      s.values[static_cast<std::size_t>(mn - s.values.begin())] = -1.0;
      s.values[static_cast<std::size_t>(mx - s.values.begin())] = 1.0;
    }
  }
  s.normalized = true;
  return s;
}

TrendClustering cluster_trends(std::span<const TrendSeries> series, std::size_t k,
                               std::uint64_t seed, std::size_t threads) {
  const std::size_t n = series.size();
  if (n == 0) throw Error("cluster_trends: no series");
  if (k == 0 || k > n) {
    throw Error("cluster_trends: need at least k = " + std::to_string(k) + " series, got " +
                std::to_string(n));
  }
  for (const auto& s : series) {
    if (!s.normalized) throw Error("cluster_trends: series must be normalized");
    if (s.granularity != series[0].granularity) throw Error("cluster_trends: mixed granularities");
    if (s.bins != series[0].bins) throw Error("cluster_trends: series must share one binning");
  }

  // Canonical order keyed on content, so the caller's order cannot matter.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = series[a];
    const auto& sb = series[b];
    if (sa.concept_id != sb.concept_id) return sa.concept_id < sb.concept_id;
    if (sa.region != sb.region) return sa.region < sb.region;
    return sa.values < sb.values;
  });

  const Matrix d = stat::pairwise(
      n, [&](std::size_t i, std::size_t j) {
        return stat::dtw(series[order[i]].values, series[order[j]].values);
      },
      threads);
  const auto c = stat::kmedoids(d, k, seed);

  TrendClustering out;
  out.cluster.assign(n, 0);
  out.is_medoid.assign(n, false);
  out.medoid.resize(k);
  for (std::size_t i = 0; i < n; ++i) out.cluster[order[i]] = c.assignment[i];
  for (std::size_t m = 0; m < k; ++m) {
    out.medoid[m] = order[c.medoids[m]];
    out.is_medoid[out.medoid[m]] = true;
  }
  out.cost = c.cost;
  return out;
}

HourlyProfile hourly_profile(const EventLog& log, ConceptId concept_id, std::string_view region,
                             const UtcOffsetTable& offsets) {
  const auto it = offsets.find(region);
  if (it == offsets.end()) {
    throw Error("no UTC offset configured for region '" + std::string(region) + "'");
  }
  HourlyProfile p;
  std::array<double, 24> sums{};
  for (const auto& e : log.events()) {
    if (e.region != region) continue;
    const int h = local_hour(e.ts, it->second);
    sums[h] += e.score(concept_id);
    ++p.counts[h];
  }
  for (int h = 0; h < 24; ++h) {
    if (p.counts[h] > 0) {
      p.mean[h] = sums[h] / static_cast<double>(p.counts[h]);
      p.empty = false;
    }
  }
  return p;
}

stat::TestResult seasonal_opposition(const EventLog& log, ConceptId concept_id,
                                     const RegionFilter& north, const RegionFilter& south,
                                     TimeWindow period) {
  if (north.is_global() || south.is_global()) {
    throw Error("seasonal_opposition: both hemispheres need explicit region lists");
  }
  auto n = popularity_series(log, concept_id, north, Granularity::Month, period);
  auto s = popularity_series(log, concept_id, south, Granularity::Month, period);
  if (n.bins.size() < 12) {
    throw Error("seasonal_opposition: need at least 12 monthly bins, got " +
                std::to_string(n.bins.size()));
  }
  n = normalize_series(std::move(n));
  s = normalize_series(std::move(s));
  return stat::pearson(n.values, s.values);
}

}  // namespace culture::trends
