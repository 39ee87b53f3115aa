// Inter-region similarity: per-region concept popularity vectors, cosine
// similarity matrix, t-SNE map and correlation with pair-level attributes.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "culture/core.hpp"
#include "culture/stat.hpp"

namespace culture::similarity {

struct RegionVectorSet {
  std::string period_label;
  std::vector<std::string> regions;          // sorted
  std::vector<std::vector<double>> vectors;  // aligned with regions, length K
  std::vector<std::size_t> counts;           // events behind each vector
  std::vector<std::string> excluded;         // below the volume threshold
};

RegionVectorSet region_vectors(const EventLog& log, std::size_t num_concepts, TimeWindow period,
                               std::string period_label, std::size_t min_photos);

struct SimilarityMatrix {
  std::vector<std::string> regions;  // one per item
  std::vector<std::string> periods;  // one per item
  Matrix values;
};

SimilarityMatrix similarity_matrix(const RegionVectorSet& vs);
// Joint matrix over (region, period) items from several periods.
SimilarityMatrix similarity_matrix(std::span<const RegionVectorSet> sets);

enum class DistanceConversion { OneMinusCosine, Angular };

DistanceConversion parse_distance_conversion(std::string_view name);

struct EmbeddedPoint {
  std::string region;
  std::string period;
  double x = 0.0;
  double y = 0.0;
};

std::vector<EmbeddedPoint> embed_regions(const SimilarityMatrix& m, const stat::TsneOptions& opts,
                                         DistanceConversion conv = DistanceConversion::OneMinusCosine);

inline const std::vector<std::string> kStandardAttributes = {
    "Climate", "HDI", "GDP per capita", "Languages", "Religions", "Location"};

// Binary same-category indicators per unordered region pair.
class AttributeTable {
 public:
  AttributeTable() = default;
  explicit AttributeTable(std::vector<std::string> attributes) : attributes_(std::move(attributes)) {}

  // Throws if the pair was already set to a different value.
  void set(std::string_view a, std::string_view b, std::size_t attribute, int value);
  std::optional<int> value(std::string_view a, std::string_view b, std::size_t attribute) const;
  const std::vector<std::string>& attributes() const { return attributes_; }

  // CSV header: region_a,region_b,<attribute>...
  static AttributeTable load(const std::filesystem::path& path);

 private:
  std::vector<std::string> attributes_;
  std::map<std::pair<std::string, std::string>, std::vector<int>> values_;
};

struct AttributeCorrelation {
  std::string attribute;
  std::optional<stat::TestResult> result;
  std::string error;
  std::size_t n_pairs = 0;
};

// Pearson r between upper-triangle similarities and each attribute column.
std::vector<AttributeCorrelation> attribute_correlation(const SimilarityMatrix& m,
                                                        const AttributeTable& attrs);

}  // namespace culture::similarity
