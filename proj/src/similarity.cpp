#include "culture/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "culture/io.hpp"

namespace culture::similarity {

RegionVectorSet region_vectors(const EventLog& log, std::size_t num_concepts, TimeWindow period,
                               std::string period_label, std::size_t min_photos) {
  if (period.empty()) throw Error("region_vectors: empty period");
  const auto& all_regions = log.regions();
  std::vector<std::vector<double>> sums(all_regions.size(), std::vector<double>(num_concepts, 0.0));
  std::vector<std::size_t> counts(all_regions.size(), 0);
  const auto [lo, hi] = log.range(period);
  const auto events = log.events();
  for (std::size_t i = lo; i < hi; ++i) {
    const auto& e = events[i];
    const auto r = static_cast<std::size_t>(
        std::lower_bound(all_regions.begin(), all_regions.end(), e.region) - all_regions.begin());
    ++counts[r];
    for (const auto& s : e.scores) {
      if (s.concept_id < num_concepts) sums[r][s.concept_id] += s.score;
    }
  }
  RegionVectorSet out;
  out.period_label = std::move(period_label);
  for (std::size_t r = 0; r < all_regions.size(); ++r) {
    if (counts[r] < min_photos || counts[r] == 0) {
      out.excluded.push_back(all_regions[r]);
      continue;
    }
    for (auto& v : sums[r]) v /= static_cast<double>(counts[r]);
    out.regions.push_back(all_regions[r]);
    out.vectors.push_back(std::move(sums[r]));
    out.counts.push_back(counts[r]);
  }
  return out;
}

SimilarityMatrix similarity_matrix(std::span<const RegionVectorSet> sets) {
  SimilarityMatrix m;
  std::vector<const std::vector<double>*> vecs;
  for (const auto& vs : sets) {
    for (std::size_t i = 0; i < vs.regions.size(); ++i) {
      m.regions.push_back(vs.regions[i]);
      m.periods.push_back(vs.period_label);
      vecs.push_back(&vs.vectors[i]);
    }
  }
  const std::size_t n = vecs.size();
  if (n < 2) throw Error("similarity_matrix: need at least 2 regions, got " + std::to_string(n));
  m.values = Matrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.values(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double c;
      try {
        c = stat::cosine(*vecs[i], *vecs[j]);
      } catch (const Error&) {
        throw Error("similarity_matrix: zero popularity vector for region '" +
                    m.regions[std::all_of(vecs[i]->begin(), vecs[i]->end(),
                                          [](double v) { return v == 0.0; })
                                  ? i
                                  : j] +
                    "'");
      }
      m.values(i, j) = m.values(j, i) = c;
    }
  }
  return m;
}

SimilarityMatrix similarity_matrix(const RegionVectorSet& vs) {
  return similarity_matrix(std::span<const RegionVectorSet>(&vs, 1));
}

DistanceConversion parse_distance_conversion(std::string_view name) {
  if (name == "one_minus_cosine") return DistanceConversion::OneMinusCosine;
  if (name == "angular") return DistanceConversion::Angular;
  throw Error("unknown distance conversion '" + std::string(name) +
              "' (expected one_minus_cosine or angular)");
}

std::vector<EmbeddedPoint> embed_regions(const SimilarityMatrix& m, const stat::TsneOptions& opts,
                                         DistanceConversion conv) {
  const std::size_t n = m.values.size();
  Matrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double s = std::clamp(m.values(i, j), -1.0, 1.0);
      d(i, j) = conv == DistanceConversion::Angular ? std::acos(s) / std::numbers::pi : 1.0 - s;
    }
  }
  const auto res = stat::tsne(d, opts);
  std::vector<EmbeddedPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {m.regions[i], m.periods[i], res.coords[i][0], res.coords[i][1]};
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::pair<std::string, std::string> pair_key(std::string_view a, std::string_view b) {
  return a < b ? std::pair{std::string(a), std::string(b)} : std::pair{std::string(b), std::string(a)};
}

}  // namespace

void AttributeTable::set(std::string_view a, std::string_view b, std::size_t attribute, int value) {
  if (attribute >= attributes_.size()) throw Error("attribute index out of range");
  if (value != 0 && value != 1) throw Error("attribute values must be 0 or 1");
  auto& row = values_[pair_key(a, b)];
  if (row.empty()) row.assign(attributes_.size(), -1);
  if (row[attribute] != -1 && row[attribute] != value) {
    throw Error("attribute '" + attributes_[attribute] + "' is not symmetric for pair " +
                std::string(a) + "/" + std::string(b));
  }
  row[attribute] = value;
}

std::optional<int> AttributeTable::value(std::string_view a, std::string_view b,
                                         std::size_t attribute) const {
  auto it = values_.find(pair_key(a, b));
  if (it == values_.end() || it->second[attribute] == -1) return std::nullopt;
  return it->second[attribute];
}

AttributeTable AttributeTable::load(const std::filesystem::path& path) {
  const auto text = io::read_file(path);
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = nl + 1;
  }
  if (lines.empty()) throw Error(path.string() + ": empty attribute file");
  auto header = io::split_csv_line(lines[0]);
  if (header.size() < 3 || header[0] != "region_a" || header[1] != "region_b") {
    throw Error(path.string() + ": expected header 'region_a,region_b,<attribute>...'");
  }
  AttributeTable table(std::vector<std::string>(header.begin() + 2, header.end()));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = io::split_csv_line(lines[i]);
    if (f.size() != header.size()) {
      throw Error(path.string() + ": line " + std::to_string(i + 1) + ": expected " +
                  std::to_string(header.size()) + " columns");
    }
    if (f[0] == f[1]) {
      throw Error(path.string() + ": line " + std::to_string(i + 1) + ": pair of identical regions");
    }
    for (std::size_t a = 2; a < f.size(); ++a) {
      if (f[a] != "0" && f[a] != "1") {
        throw Error(path.string() + ": line " + std::to_string(i + 1) + ": field '" + header[a] +
                    "' must be 0 or 1");
      }
      try {
        table.set(f[0], f[1], a - 2, f[a] == "1" ? 1 : 0);
      } catch (const Error& ex) {
        throw Error(path.string() + ": line " + std::to_string(i + 1) + ": " + ex.what());
      }
    }
  }
  return table;
}

std::vector<AttributeCorrelation> attribute_correlation(const SimilarityMatrix& m,
                                                        const AttributeTable& attrs) {
  const std::size_t n = m.values.size();
  std::vector<AttributeCorrelation> out;
  for (std::size_t a = 0; a < attrs.attributes().size(); ++a) {
    AttributeCorrelation row;
    row.attribute = attrs.attributes()[a];
    std::vector<double> sims, vals;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto v = attrs.value(m.regions[i], m.regions[j], a);
        if (!v) {
          throw Error("attribute table has no '" + row.attribute + "' value for pair " +
                      m.regions[i] + "/" + m.regions[j]);
        }
        sims.push_back(m.values(i, j));
        vals.push_back(*v);
      }
    }
    row.n_pairs = sims.size();
    try {
      row.result = stat::pearson(sims, vals);
    } catch (const Error& ex) {
      row.error = ex.what();
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace culture::similarity
