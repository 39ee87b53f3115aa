// Friend vs matched non-friend similarity of posted content (D_corr).
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "culture/core.hpp"
#include "culture/stat.hpp"

namespace culture::socialcorr {

// (i, j) is an edge, k is a non-friend of i from j's gender and age stratum.
struct Triple {
  UserId i;
  UserId j;
  UserId k;

  friend bool operator==(const Triple&, const Triple&) = default;
};

enum class Orientation {
  Random,  // one orientation per unordered edge, chosen by coin flip
  Both,    // both orientations of every edge
};

struct TripleSample {
  std::vector<Triple> triples;
  std::size_t skipped_edges = 0;  // oriented edges whose stratum had no eligible k
};

TripleSample sample_triples(const SocialGraph& graph, const ProfileTable& profiles,
                            std::uint64_t seed, std::size_t max_per_edge = 1,
                            Orientation orientation = Orientation::Random);

inline constexpr std::size_t kMinTriples = 30;

// Full-length mean score vectors for every user with events in a window.
class UserVectors {
 public:
  UserVectors(const EventLog& log, const ConceptCatalog& catalog, TimeWindow window);

  // nullptr when the user has no events in the window.
  const std::vector<double>* find(std::string_view user) const;
  const ConceptCatalog& catalog() const { return *catalog_; }

 private:
  const ConceptCatalog* catalog_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

struct CorrelationReport {
  std::string category;  // category name or "all"
  std::string stratum;   // empty for the unstratified report
  double d_corr = 0.0;
  stat::TestResult test;
  std::size_t n_triples = 0;  // usable triples
  std::size_t n_dropped = 0;  // empty user or zero category vector
  bool insufficient = false;
};

// Per-triple cos(x_i, x_j) - cos(x_i, x_k); unusable triples are skipped and
// counted in `dropped`.
std::vector<double> triple_differences(std::span<const Triple> triples, const UserVectors& vectors,
                                       std::optional<Category> category, std::size_t& dropped,
                                       std::size_t threads = 1);

// Throws when fewer than kMinTriples triples are usable.
CorrelationReport social_correlation(std::span<const Triple> triples, const UserVectors& vectors,
                                     std::optional<Category> category, std::size_t threads = 1);

// One report per category in kAllCategories order.
std::vector<CorrelationReport> correlation_by_category(std::span<const Triple> triples,
                                                       const UserVectors& vectors,
                                                       std::size_t threads = 1);

// Reports per (category x age bucket of i) and per (category x gender pair
// "g_i-g_j"); "all" plus every category. Cells below kMinTriples are flagged
// insufficient.
struct Breakdown {
  std::vector<CorrelationReport> by_age;
  std::vector<CorrelationReport> by_gender;
};

Breakdown demographic_breakdown(std::span<const Triple> triples, const UserVectors& vectors,
                                const ProfileTable& profiles, std::size_t threads = 1);

struct DiffHistogram {
  std::vector<double> edges;  // bins + 1, symmetric around 0
  std::vector<std::size_t> counts;
  double mean = 0.0;
  double se = 0.0;
  std::optional<stat::TestResult> test;
  std::size_t n = 0;
  bool empty = true;
};

// Histogram of x_j[c] - x_k[c] over usable triples.
DiffHistogram concept_diff_histogram(std::span<const Triple> triples, const UserVectors& vectors,
                                     ConceptId concept_id, std::size_t bins);

}  // namespace culture::socialcorr
