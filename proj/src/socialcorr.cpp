#include "culture/socialcorr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "culture/parallel.hpp"

namespace culture::socialcorr {

TripleSample sample_triples(const SocialGraph& graph, const ProfileTable& profiles,
                            std::uint64_t seed, std::size_t max_per_edge, Orientation orientation) {
  require_profiles(graph, profiles);
  if (max_per_edge == 0) throw Error("sample_triples: max_per_edge must be at least 1");

  const std::size_t n = graph.num_users();
  std::map<std::pair<std::string, std::string>, std::vector<std::uint32_t>> strata;
  std::vector<const std::vector<std::uint32_t>*> stratum_of(n);
  for (std::uint32_t u = 0; u < n; ++u) {
    const auto& p = profiles.at(graph.name(u));
    strata[{p.gender, p.age_bucket}].push_back(u);
  }
  for (std::uint32_t u = 0; u < n; ++u) {
    const auto& p = profiles.at(graph.name(u));
    stratum_of[u] = &strata.at({p.gender, p.age_bucket});
  }

  TripleSample out;
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> eligible;
  auto draw = [&](std::uint32_t i, std::uint32_t j) {
    eligible.clear();
    const auto nb = graph.neighbors(i);
    // Both lists are sorted, so exclusion is a merge.
    auto it = nb.begin();
    for (auto k : *stratum_of[j]) {
      while (it != nb.end() && *it < k) ++it;
      if (k == i || (it != nb.end() && *it == k)) continue;
      eligible.push_back(k);
    }
    if (eligible.empty()) {
      ++out.skipped_edges;
      return;
    }
    const std::size_t take = std::min(max_per_edge, eligible.size());
    for (std::size_t t = 0; t < take; ++t) {
      std::uniform_int_distribution<std::size_t> pick(t, eligible.size() - 1);
      std::swap(eligible[t], eligible[pick(rng)]);
      out.triples.push_back({graph.name(i), graph.name(j), graph.name(eligible[t])});
    }
  };

  std::bernoulli_distribution coin(0.5);
  for (const auto& [a, b] : graph.edges()) {
    if (orientation == Orientation::Both) {
      draw(a, b);
      draw(b, a);
    } else if (coin(rng)) {
      draw(a, b);
    } else {
      draw(b, a);
    }
  }
  return out;
}

UserVectors::UserVectors(const EventLog& log, const ConceptCatalog& catalog, TimeWindow window)
    : catalog_(&catalog) {
  if (window.empty()) throw Error("social correlation: empty window");
  for (const auto& user : log.users()) {
    auto v = user_mean_scores(log, catalog, user, window);
    if (!v.empty) vectors_.emplace(user, std::move(v.values));
  }
}

const std::vector<double>* UserVectors::find(std::string_view user) const {
  const auto it = vectors_.find(std::string(user));
  return it == vectors_.end() ? nullptr : &it->second;
}

namespace {

// Cosine over a subset of coordinates; nullopt if either side is all zero.
std::optional<double> cosine_on(const std::vector<double>& a, const std::vector<double>& b,
                                std::span<const ConceptId> ids) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  auto acc = [&](std::size_t c) {
    dot += a[c] * b[c];
    na += a[c] * a[c];
    nb += b[c] * b[c];
  };
  if (ids.empty()) {
    for (std::size_t c = 0; c < a.size(); ++c) acc(c);
  } else {
    for (auto c : ids) acc(c);
  }
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string category_label(std::optional<Category> c) {
  return c ? std::string(category_name(*c)) : std::string("all");
}

CorrelationReport summarize(std::optional<Category> category, std::vector<double> diffs,
                            std::size_t dropped) {
  CorrelationReport r;
  r.category = category_label(category);
  r.n_triples = diffs.size();
  r.n_dropped = dropped;
  if (diffs.size() < kMinTriples) {
    r.insufficient = true;
    return r;
  }
  r.d_corr = stat::mean(diffs);
  r.test = stat::one_sample_t(diffs, 0.0);
  return r;
}

}  // namespace

std::vector<double> triple_differences(std::span<const Triple> triples, const UserVectors& vectors,
                                       std::optional<Category> category, std::size_t& dropped,
                                       std::size_t threads) {
  std::span<const ConceptId> ids;
  if (category) {
    ids = vectors.catalog().in_category(*category);
    if (ids.empty()) {
      dropped = triples.size();
      return {};
    }
  }
  std::vector<std::optional<double>> slot(triples.size());
  parallel_for(triples.size(), threads, [&](std::size_t t) {
    const auto* xi = vectors.find(triples[t].i);
    const auto* xj = vectors.find(triples[t].j);
    const auto* xk = vectors.find(triples[t].k);
    if (!xi || !xj || !xk) return;
    const auto cij = cosine_on(*xi, *xj, ids);
    const auto cik = cosine_on(*xi, *xk, ids);
    if (cij && cik) slot[t] = *cij - *cik;
  });
  std::vector<double> diffs;
  diffs.reserve(triples.size());
  dropped = 0;
  for (const auto& s : slot) {
    if (s) {
      diffs.push_back(*s);
    } else {
      ++dropped;
    }
  }
  return diffs;
}

CorrelationReport social_correlation(std::span<const Triple> triples, const UserVectors& vectors,
                                     std::optional<Category> category, std::size_t threads) {
  std::size_t dropped = 0;
  auto diffs = triple_differences(triples, vectors, category, dropped, threads);
  if (diffs.size() < kMinTriples) {
    throw Error("social correlation (" + category_label(category) + "): only " +
                std::to_string(diffs.size()) + " usable triples, need " +
                std::to_string(kMinTriples));
  }
  return summarize(category, std::move(diffs), dropped);
}

std::vector<CorrelationReport> correlation_by_category(std::span<const Triple> triples,
                                                       const UserVectors& vectors,
                                                       std::size_t threads) {
  std::vector<CorrelationReport> out;
  for (auto c : kAllCategories) {
    std::size_t dropped = 0;
    auto diffs = triple_differences(triples, vectors, c, dropped, threads);
    out.push_back(summarize(c, std::move(diffs), dropped));
  }
  return out;
}

Breakdown demographic_breakdown(std::span<const Triple> triples, const UserVectors& vectors,
                                const ProfileTable& profiles, std::size_t threads) {
  std::map<std::string, std::vector<Triple>> by_age, by_gender;
  for (const auto& t : triples) {
    const auto& pi = profiles.at(t.i);
    const auto& pj = profiles.at(t.j);
    by_age[pi.age_bucket].push_back(t);
    by_gender[pi.gender + "-" + pj.gender].push_back(t);
  }
  auto run = [&](const std::map<std::string, std::vector<Triple>>& groups) {
    std::vector<CorrelationReport> out;
    for (const auto& [key, group] : groups) {
      std::vector<std::optional<Category>> cats{std::nullopt};
      for (auto c : kAllCategories) cats.emplace_back(c);
      for (const auto& c : cats) {
        std::size_t dropped = 0;
        auto diffs = triple_differences(group, vectors, c, dropped, threads);
        auto r = summarize(c, std::move(diffs), dropped);
        r.stratum = key;
        out.push_back(std::move(r));
      }
    }
    return out;
  };
  return {run(by_age), run(by_gender)};
}

DiffHistogram concept_diff_histogram(std::span<const Triple> triples, const UserVectors& vectors,
                                     ConceptId concept_id, std::size_t bins) {
  if (concept_id >= vectors.catalog().size()) {
    throw Error("concept_diff_histogram: unknown concept id " + std::to_string(concept_id));
  }
  if (bins == 0) throw Error("concept_diff_histogram: bins must be at least 1");
  std::vector<double> diffs;
  for (const auto& t : triples) {
    const auto* xi = vectors.find(t.i);
    const auto* xj = vectors.find(t.j);
    const auto* xk = vectors.find(t.k);
    if (!xi || !xj || !xk) continue;
    diffs.push_back((*xj)[concept_id] - (*xk)[concept_id]);
  }
  DiffHistogram h;
  h.n = diffs.size();
  h.empty = diffs.empty();
  double m = 0.0;
  for (double d : diffs) m = std::max(m, std::abs(d));
  if (m == 0.0) m = 1.0;
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    h.edges[b] = -m + 2.0 * m * static_cast<double>(b) / static_cast<double>(bins);
  }
  h.edges.back() = m;
  h.counts.assign(bins, 0);
  for (double d : diffs) {
    auto b = static_cast<std::size_t>((d + m) / (2.0 * m) * static_cast<double>(bins));
    ++h.counts[std::min(b, bins - 1)];
  }
  if (diffs.size() >= 2) {
    h.mean = stat::mean(diffs);
    h.se = stat::sample_sd(diffs) / std::sqrt(static_cast<double>(diffs.size()));
    try {
      h.test = stat::one_sample_t(diffs, 0.0);
    } catch (const Error&) {
    }
  } else if (diffs.size() == 1) {
    h.mean = diffs[0];
  }
  return h;
}

}  // namespace culture::socialcorr
