#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "culture/io.hpp"
#include "culture/socialcorr.hpp"
#include "culture/synthgen.hpp"
#include "test_util.hpp"

using namespace culture;
using namespace culture::socialcorr;
using culture::testing::event;
using culture::testing::small_catalog;

namespace {

const TimeWindow kAll{1, 1000000};

// One event per user carrying the given dense scores.
EventLog vectors_log(const std::map<std::string, std::vector<double>>& users) {
  std::vector<PhotoEvent> events;
  Timestamp ts = 10;
  for (const auto& [u, v] : users) {
    std::vector<ConceptScore> scores;
    for (ConceptId c = 0; c < v.size(); ++c) {
      if (v[c] > 0) scores.push_back({c, v[c]});
    }
    events.push_back(event(u, ts++, "US", scores));
  }
  return EventLog(events);
}

double plain_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i], na += a[i] * a[i], nb += b[i] * b[i];
  return d / std::sqrt(na * nb);
}

struct World {
  synth::Dataset ds;
  std::vector<Triple> triples;
};

World generated(double h, std::uint64_t seed, std::size_t users = 1000) {
  synth::GenConfig cfg;
  cfg.n_users = users;
  cfg.homophily = h;
  cfg.seed = seed;
  cfg.steps = 52;
  World w{synth::generate(cfg), {}};
  w.triples = sample_triples(w.ds.network.graph, w.ds.network.profiles, seed).triples;
  return w;
}

}  // namespace

TEST(SampleTriples, InvariantsOnGeneratedNetwork) {
  const auto w = generated(2.0, 3);
  const auto& g = w.ds.network.graph;
  const auto& p = w.ds.network.profiles;
  ASSERT_GT(w.triples.size(), 1000u);
  std::set<std::pair<std::string, std::string>> seen_edges;
  for (const auto& t : w.triples) {
    EXPECT_TRUE(g.has_edge(t.i, t.j));
    EXPECT_FALSE(g.has_edge(t.i, t.k));
    EXPECT_NE(t.k, t.i);
    EXPECT_EQ(p.at(t.k).gender, p.at(t.j).gender);
    EXPECT_EQ(p.at(t.k).age_bucket, p.at(t.j).age_bucket);
    EXPECT_TRUE(seen_edges.insert(std::minmax(t.i, t.j)).second) << "edge sampled twice";
  }
}

TEST(SampleTriples, SingleStratumEligibleSetIsNonNeighbours) {
  // a is adjacent to every user except e, so e is the only eligible k for
  // edges oriented from a.
  const auto g = io::parse_graph("a b\na c\na d\nb c\ne b\n");
  std::vector<UserProfile> rows;
  for (const char* u : {"a", "b", "c", "d", "e"}) rows.push_back({u, "F", "18-29", "x"});
  const ProfileTable profiles(rows);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = sample_triples(g, profiles, seed, 1, Orientation::Both);
    for (const auto& t : s.triples) {
      if (t.i == "a") {
        EXPECT_EQ(t.k, "e");
      }
      std::set<std::string> allowed;
      for (const char* u : {"a", "b", "c", "d", "e"}) {
        if (u != t.i && !g.has_edge(t.i, u)) allowed.insert(u);
      }
      EXPECT_TRUE(allowed.contains(t.k));
    }
  }
}

TEST(SampleTriples, EdgeWithNoEligibleNonFriendIsSkipped) {
  // j = b is the only M user; a's edge to b has no eligible k in b's stratum.
  const SocialGraph g({{"a", "b"}}, {"c"});
  const ProfileTable profiles({{"a", "F", "18-29", "x"}, {"b", "M", "18-29", "x"}, {"c", "F", "18-29", "x"}});
  const auto s = sample_triples(g, profiles, 0, 1, Orientation::Both);
  EXPECT_EQ(s.skipped_edges, 1u);
  ASSERT_EQ(s.triples.size(), 1u);
  EXPECT_EQ(s.triples[0], (Triple{"b", "a", "c"}));
}

TEST(SampleTriples, DeterministicAndOrientationCounts) {
  const auto w = generated(0.0, 4, 600);
  const auto& g = w.ds.network.graph;
  const auto& p = w.ds.network.profiles;
  EXPECT_EQ(sample_triples(g, p, 9).triples, sample_triples(g, p, 9).triples);
  EXPECT_NE(sample_triples(g, p, 9).triples, sample_triples(g, p, 10).triples);
  const auto one = sample_triples(g, p, 9, 1, Orientation::Random);
  const auto both = sample_triples(g, p, 9, 1, Orientation::Both);
  EXPECT_EQ(one.triples.size() + one.skipped_edges, g.num_edges());
  EXPECT_EQ(both.triples.size() + both.skipped_edges, 2 * g.num_edges());
  const auto three = sample_triples(g, p, 9, 3, Orientation::Random);
  EXPECT_GT(three.triples.size(), 2 * one.triples.size());
}

TEST(SocialCorrelation, MatchesHandComputedCosines) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::map<std::string, std::vector<double>> users;
  for (int i = 0; i < 40; ++i) users["u" + std::to_string(i)] = {u(rng), u(rng), u(rng), u(rng), u(rng)};
  const auto log = vectors_log(users);
  const auto cat = small_catalog();
  const UserVectors vectors(log, cat, kAll);
  std::vector<Triple> triples;
  double expected = 0.0;
  for (int i = 0; i < 36; ++i) {
    Triple t{"u" + std::to_string(i), "u" + std::to_string(i + 1), "u" + std::to_string(i + 4)};
    expected += plain_cosine(users[t.i], users[t.j]) - plain_cosine(users[t.i], users[t.k]);
    triples.push_back(t);
  }
  const auto r = social_correlation(triples, vectors, std::nullopt);
  EXPECT_NEAR(r.d_corr, expected / 36, 1e-12);
  EXPECT_EQ(r.n_triples, 36u);
  EXPECT_EQ(r.test.dof, 35.0);
}

TEST(SocialCorrelation, IdenticalVectorsAndSelfMatchGiveZero) {
  std::map<std::string, std::vector<double>> users;
  for (int i = 0; i < 40; ++i) users["u" + std::to_string(i)] = {0.3, 0.6, 0.1, 0.0, 0.2};
  const auto cat = small_catalog();
  const auto log = vectors_log(users);
  const UserVectors same(log, cat, kAll);
  std::vector<Triple> triples;
  for (int i = 0; i < 35; ++i) triples.push_back({"u" + std::to_string(i), "u" + std::to_string(i + 1), "u" + std::to_string(i + 2)});
  EXPECT_EQ(social_correlation(triples, same, std::nullopt).d_corr, 0.0);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (auto& [name, v] : users) v = {u(rng), u(rng), u(rng), u(rng), u(rng)};
  const auto varied_log = vectors_log(users);
  const UserVectors varied(varied_log, cat, kAll);
  for (auto& t : triples) t.k = t.j;
  EXPECT_EQ(social_correlation(triples, varied, std::nullopt).d_corr, 0.0);
}

TEST(SocialCorrelation, TooFewTriplesAndDrops) {
  std::map<std::string, std::vector<double>> users;
  for (int i = 0; i < 40; ++i) users["u" + std::to_string(i)] = {0.3, 0.6, 0.0, 0.4, 0.2};
  const auto cat = small_catalog();
  const auto log = vectors_log(users);
  const UserVectors vectors(log, cat, kAll);
  std::vector<Triple> triples;
  for (int i = 0; i < 29; ++i) triples.push_back({"u" + std::to_string(i), "u" + std::to_string(i + 1), "u" + std::to_string(i + 2)});
  EXPECT_THROW(social_correlation(triples, vectors, std::nullopt), Error);
  triples.push_back({"u0", "u1", "nobody"});
  triples.push_back({"u0", "u1", "u2"});
  std::size_t dropped = 0;
  EXPECT_EQ(triple_differences(triples, vectors, std::nullopt, dropped).size(), 30u);
  EXPECT_EQ(dropped, 1u);
  // Music holds only concept 4, which is zero for everyone in this set.
  users["u0"][4] = 0.0;
  const auto log2 = vectors_log(users);
  const UserVectors v2(log2, cat, kAll);
  triple_differences(triples, v2, Category::Music, dropped);
  EXPECT_GT(dropped, 1u);
}

TEST(SocialCorrelation, DisjointUnionIsSizeWeightedMean) {
  const auto w = generated(3.0, 5);
  const UserVectors vectors(w.ds.events.log, w.ds.catalog, w.ds.events.log.span_window());
  const std::size_t half = w.triples.size() / 3;
  const std::span<const Triple> all(w.triples), a = all.first(half), b = all.subspan(half);
  const auto ra = social_correlation(a, vectors, std::nullopt);
  const auto rb = social_correlation(b, vectors, std::nullopt);
  const auto r = social_correlation(all, vectors, std::nullopt);
  const double weighted = (ra.d_corr * static_cast<double>(ra.n_triples) + rb.d_corr * static_cast<double>(rb.n_triples)) /
                          static_cast<double>(ra.n_triples + rb.n_triples);
  EXPECT_NEAR(r.d_corr, weighted, 1e-12);
}

TEST(SocialCorrelation, RelabelingUsersChangesNothing) {
  const auto w = generated(2.0, 6, 500);
  const auto& log = w.ds.events.log;
  auto rename = [](const std::string& u) { return "z" + std::string(u.rbegin(), u.rend()); };
  std::vector<PhotoEvent> events(log.events().begin(), log.events().end());
  for (auto& e : events) e.user = rename(e.user);
  const EventLog renamed(events);
  std::vector<Triple> triples = w.triples;
  for (auto& t : triples) t = {rename(t.i), rename(t.j), rename(t.k)};
  const UserVectors va(log, w.ds.catalog, log.span_window()), vb(renamed, w.ds.catalog, log.span_window());
  const auto ra = social_correlation(w.triples, va, std::nullopt);
  const auto rb = social_correlation(triples, vb, std::nullopt);
  EXPECT_DOUBLE_EQ(ra.d_corr, rb.d_corr);
  EXPECT_DOUBLE_EQ(ra.test.statistic, rb.test.statistic);
}

TEST(SocialCorrelation, PlantedHomophilyIsDetected) {
  const auto w = generated(5.0, 7);
  const UserVectors vectors(w.ds.events.log, w.ds.catalog, w.ds.events.log.span_window());
  const auto r = social_correlation(w.triples, vectors, std::nullopt);
  EXPECT_GT(r.d_corr, 0.0);
  EXPECT_LT(r.test.p_value, 0.01);
}

TEST(SocialCorrelation, ParallelEqualsSequential) {
  const auto w = generated(1.0, 8, 600);
  const UserVectors vectors(w.ds.events.log, w.ds.catalog, w.ds.events.log.span_window());
  const auto a = correlation_by_category(w.triples, vectors, 1);
  const auto b = correlation_by_category(w.triples, vectors, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].d_corr, b[i].d_corr);
    EXPECT_EQ(a[i].n_triples, b[i].n_triples);
  }
}

TEST(Breakdown, SingleStratumEqualsGlobalReport) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::map<std::string, std::vector<double>> users;
  std::vector<UserProfile> rows;
  for (int i = 0; i < 60; ++i) {
    const auto name = "u" + std::to_string(100 + i);
    users[name] = {u(rng), u(rng), u(rng), u(rng), u(rng)};
    rows.push_back({name, "F", "30-49", "x"});
  }
  const auto cat = small_catalog();
  const auto log = vectors_log(users);
  const UserVectors vectors(log, cat, kAll);
  const ProfileTable profiles(rows);
  std::vector<Triple> triples;
  for (int i = 0; i < 50; ++i) {
    triples.push_back({"u" + std::to_string(100 + i), "u" + std::to_string(101 + i), "u" + std::to_string(105 + i)});
  }
  const auto global = social_correlation(triples, vectors, std::nullopt);
  const auto b = demographic_breakdown(triples, vectors, profiles);
  ASSERT_EQ(b.by_age.size(), 1 + kAllCategories.size());
  EXPECT_EQ(b.by_age[0].stratum, "30-49");
  EXPECT_EQ(b.by_age[0].category, "all");
  EXPECT_EQ(b.by_age[0].d_corr, global.d_corr);
  EXPECT_EQ(b.by_gender[0].stratum, "F-F");
  EXPECT_EQ(b.by_gender[0].d_corr, global.d_corr);
  // Scenes holds a single concept: cosine is 1 for every pair, so D_corr is 0.
  const auto scenes = std::find_if(b.by_age.begin(), b.by_age.end(), [](const auto& r) { return r.category == "Scenes"; });
  ASSERT_NE(scenes, b.by_age.end());
  EXPECT_EQ(scenes->d_corr, 0.0);
  // Sports has no concepts in this catalog: every triple is dropped.
  const auto sports = std::find_if(b.by_age.begin(), b.by_age.end(), [](const auto& r) { return r.category == "Sports"; });
  EXPECT_TRUE(sports->insufficient);
}

TEST(Breakdown, SmallStratumIsInsufficient) {
  std::map<std::string, std::vector<double>> users;
  std::vector<UserProfile> rows;
  for (int i = 0; i < 50; ++i) {
    const auto name = "u" + std::to_string(100 + i);
    users[name] = {0.1 + 0.01 * i, 0.5, 0.2, 0.3, 0.1};
    rows.push_back({name, i < 10 ? "M" : "F", i < 10 ? "50+" : "18-29", "x"});
  }
  const auto cat = small_catalog();
  const auto log = vectors_log(users);
  const UserVectors vectors(log, cat, kAll);
  const ProfileTable profiles(rows);
  std::vector<Triple> triples;
  for (int i = 0; i < 45; ++i) {
    triples.push_back({"u" + std::to_string(100 + i), "u" + std::to_string(101 + i), "u" + std::to_string(104 + i)});
  }
  const auto b = demographic_breakdown(triples, vectors, profiles);
  for (const auto& r : b.by_age) {
    if (r.stratum == "50+") {
      EXPECT_TRUE(r.insufficient);
    } else if (r.category == "all") {
      EXPECT_FALSE(r.insufficient);
    }
  }
}

TEST(Breakdown, PlantedAgeHomophilyIsLargestInItsBucket) {
  synth::GenConfig cfg;
  cfg.n_users = 1500;
  cfg.steps = 52;
  cfg.seed = 9;
  cfg.homophily_by_age = {{"18-29", 8.0}, {"30-49", 0.0}, {"50+", 0.0}};
  const auto ds = synth::generate(cfg);
  const auto triples = sample_triples(ds.network.graph, ds.network.profiles, 9).triples;
  const UserVectors vectors(ds.events.log, ds.catalog, ds.events.log.span_window());
  const auto b = demographic_breakdown(triples, vectors, ds.network.profiles);
  std::map<std::string, double> all;
  for (const auto& r : b.by_age) {
    if (r.category == "all" && !r.insufficient) all[r.stratum] = r.d_corr;
  }
  ASSERT_EQ(all.size(), 3u);
  EXPECT_GT(all["18-29"], all["30-49"]);
  EXPECT_GT(all["18-29"], all["50+"]);
}

TEST(DiffHistogram, EmptyInput) {
  const auto cat = small_catalog();
  const auto log = vectors_log({{"a", {0.1, 0, 0, 0, 0}}});
  const UserVectors vectors(log, cat, kAll);
  const auto h = concept_diff_histogram({}, vectors, 0, 10);
  EXPECT_TRUE(h.empty);
  EXPECT_EQ(h.n, 0u);
  EXPECT_EQ(h.counts, std::vector<std::size_t>(10, 0));
  EXPECT_THROW(concept_diff_histogram({}, vectors, 9, 10), Error);
}

TEST(DiffHistogram, SymmetricEdgesAndCounts) {
  std::map<std::string, std::vector<double>> users = {
      {"i", {0.5, 0, 0, 0, 0}}, {"j1", {0.9, 0, 0, 0, 0}}, {"k1", {0.1, 0, 0, 0, 0}},
      {"j2", {0.2, 0, 0, 0, 0}}, {"k2", {0.4, 0, 0, 0, 0}}};
  const auto cat = small_catalog();
  const auto log = vectors_log(users);
  const UserVectors vectors(log, cat, kAll);
  const std::vector<Triple> triples = {{"i", "j1", "k1"}, {"i", "j2", "k2"}};
  const auto h = concept_diff_histogram(triples, vectors, 0, 4);
  // Differences 0.8 and -0.2 on edges [-0.8, -0.4, 0, 0.4, 0.8].
  ASSERT_EQ(h.edges.size(), 5u);
  EXPECT_NEAR(h.edges.front(), -0.8, 1e-12);
  EXPECT_NEAR(h.edges.back(), 0.8, 1e-12);
  EXPECT_NEAR(h.edges[2], 0.0, 1e-12);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{0, 1, 0, 1}));
  EXPECT_NEAR(h.mean, 0.3, 1e-12);
}

TEST(DiffHistogram, NullIsCenteredAndPlantedShiftIsDetected) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<std::string, std::vector<double>> users;
  std::vector<Triple> triples;
  for (int t = 0; t < 2000; ++t) {
    const auto s = std::to_string(t);
    users["i" + s] = {u(rng), u(rng), 0, 0, 0.5};
    // Concept 0 identically distributed for j and k; concept 1 shifted toward j.
    users["j" + s] = {u(rng), 0.6 * u(rng) + 0.2, 0, 0, 0.5};
    users["k" + s] = {u(rng), 0.6 * u(rng), 0, 0, 0.5};
    triples.push_back({"i" + s, "j" + s, "k" + s});
  }
  const auto cat = small_catalog();
  const auto log = vectors_log(users);
  const UserVectors vectors(log, cat, kAll);
  const auto null = concept_diff_histogram(triples, vectors, 0, 20);
  EXPECT_LT(std::abs(null.mean), 2 * null.se);
  const auto shifted = concept_diff_histogram(triples, vectors, 1, 20);
  EXPECT_GT(shifted.mean, 0.0);
  ASSERT_TRUE(shifted.test.has_value());
  EXPECT_LT(shifted.test->p_value, 0.01);
}
