#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "culture/influence.hpp"
#include "culture/synthgen.hpp"
#include "test_util.hpp"

using namespace culture;
using namespace culture::influence;
using culture::testing::event;

namespace {

constexpr int kN = kNeverActive;
constexpr int kPre = kActiveBeforePanel;

// Reference panel: rows for every user not active before the panel, from
// step 0 through activation (or the last step), counting friends whose
// activation lies strictly before the step and, with a window, no earlier
// than step - window.
std::vector<PanelRow> brute_panel(const SocialGraph& g, const ActivationMap& act, int n_steps,
                                  std::optional<int> window) {
  std::vector<PanelRow> rows;
  for (std::uint32_t u = 0; u < g.num_users(); ++u) {
    if (act[u] == kPre) continue;
    for (int s = 0; s < n_steps; ++s) {
      if (act[u] != kN && s > act[u]) break;
      std::int64_t a = 0;
      for (auto v : g.neighbors(u)) {
        if (act[v] == kN || act[v] >= s) continue;
        if (window && act[v] < s - *window) continue;
        ++a;
      }
      rows.push_back({u, s, a, s == act[u] ? 1 : 0});
    }
  }
  return rows;
}

bool same_rows(const std::vector<PanelRow>& a, const std::vector<PanelRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].user != b[i].user || a[i].step != b[i].step || a[i].a != b[i].a || a[i].y != b[i].y) return false;
  }
  return true;
}

ConceptSet range_set(ConceptId lo, ConceptId hi) {
  ConceptSet s;
  for (ConceptId c = lo; c < hi; ++c) s.insert(c);
  return s;
}

synth::Dataset small_world(double h, double lambda, std::uint64_t seed, double scale = 0.003) {
  synth::GenConfig cfg;
  cfg.n_users = 800;
  cfg.n_concepts = 30;
  cfg.steps = 52;
  cfg.homophily = h;
  cfg.influence = lambda;
  cfg.influence_scale = scale;
  cfg.seed = seed;
  return synth::generate(cfg);
}

}  // namespace

TEST(ActivationSteps, MapsEventsToSteps) {
  const SocialGraph g({{"a", "b"}, {"b", "c"}}, {"d", "e"});
  const PanelClock clock{1000, 100, 5};
  const EventLog log({event("a", 999, "US", {{0, 0.9}}), event("b", 1250, "US", {{0, 0.5}}),
                      event("b", 1300, "US", {{0, 0.9}}), event("c", 1500, "US", {{0, 0.9}}),
                      event("d", 1100, "US", {{0, 0.4}}), event("e", 1499, "US", {{0, 0.6}})});
  EXPECT_EQ(activation_steps(log, g, 0, 0.5, clock), (ActivationMap{kPre, 2, kN, kN, 4}));
  EXPECT_EQ(activation_steps(log, g, 0, 0.95, clock), (ActivationMap{kN, kN, kN, kN, kN}));
  const auto span = PanelClock::spanning(log);
  EXPECT_EQ(span.start, 999);
  EXPECT_EQ(span.n_steps, 1);
}

TEST(ActivationPanel, HandBuiltChain) {
  // a - b - c; a activates at 0, b at 2, c never.
  const SocialGraph g(std::vector<std::pair<UserId, UserId>>{{"a", "b"}, {"b", "c"}});
  const ActivationMap act = {0, 2, kN};
  const auto p = build_activation_panel(g, act, 4, std::nullopt);
  const std::vector<PanelRow> expected = {{0, 0, 0, 1}, {1, 0, 0, 0}, {1, 1, 1, 0}, {1, 2, 1, 1},
                                          {2, 0, 0, 0}, {2, 1, 0, 0}, {2, 2, 0, 0}, {2, 3, 1, 0}};
  EXPECT_TRUE(same_rows(p.rows, expected));

  const auto recent = build_activation_panel(g, act, 4, 1);
  EXPECT_EQ(recent.rows[3].a, 0);  // b at step 2: a's activation at 0 is out of the window
  EXPECT_EQ(recent.rows[7].a, 1);
  EXPECT_THROW(build_activation_panel(g, act, 4, 0), Error);
  EXPECT_THROW(build_activation_panel(g, ActivationMap{0, 1}, 4, std::nullopt), Error);
}

TEST(ActivationPanel, EdgeCases) {
  const SocialGraph g({{"a", "b"}}, {"z"});
  // a activates at the first step, b before the panel, z is isolated.
  const auto p = build_activation_panel(g, ActivationMap{0, kPre, kN}, 3, std::nullopt);
  ASSERT_EQ(p.rows.size(), 4u);
  EXPECT_EQ(p.rows[0].a, 1);  // friend active before the panel counts
  EXPECT_EQ(p.rows[0].y, 1);
  for (std::size_t i = 1; i < 4; ++i) {
    EXPECT_EQ(p.rows[i].user, 2u);
    EXPECT_EQ(p.rows[i].a, 0);
  }
}

TEST(ActivationPanel, MatchesReferenceOnGeneratedData) {
  const auto ds = small_world(2.0, 1.0, 1);
  const auto& g = ds.network.graph;
  const auto clock = PanelClock::spanning(ds.events.log);
  for (ConceptId c : {0u, 7u, 13u}) {
    const auto act = activation_steps(ds.events.log, g, c, 0.5, clock);
    for (std::optional<int> w : {std::optional<int>{}, std::optional<int>{3}}) {
      const auto p = build_activation_panel(g, act, clock.n_steps, w, c);
      EXPECT_TRUE(same_rows(p.rows, brute_panel(g, act, clock.n_steps, w)));
      const auto ys = std::accumulate(p.rows.begin(), p.rows.end(), std::size_t{0},
                                      [](std::size_t s, const PanelRow& r) { return s + r.y; });
      EXPECT_EQ(ys, count_in_panel_activators(act));

      std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> by_a;
      for (const auto& r : p.rows) by_a[r.a].first += 1, by_a[r.a].second += r.y;
      const auto cells = panel_cells(g, act, clock.n_steps, w);
      ASSERT_EQ(cells.size(), by_a.size());
      for (const auto& cell : cells) {
        EXPECT_EQ(cell.trials, by_a[cell.a].first);
        EXPECT_EQ(cell.successes, by_a[cell.a].second);
      }
    }
  }
}

TEST(ShuffleTimestamps, PreservesMultisetAndFixedEntries) {
  const ActivationMap act = {3, kPre, 0, kN, 7, 3, kN, 1, kPre, 9};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = shuffle_timestamps(act, seed);
    ASSERT_EQ(s.size(), act.size());
    std::vector<int> before, after;
    for (std::size_t i = 0; i < act.size(); ++i) {
      if (act[i] == kPre || act[i] == kN) {
        EXPECT_EQ(s[i], act[i]);
      } else {
        before.push_back(act[i]);
        after.push_back(s[i]);
      }
    }
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    EXPECT_EQ(before, after);
  }
  EXPECT_EQ(shuffle_timestamps(act, 4), shuffle_timestamps(act, 4));
  const ActivationMap single = {kN, 5, kPre};
  EXPECT_EQ(shuffle_timestamps(single, 11), single);
}

TEST(ShuffleTimestamps, TwoActivatorsSwapHalfTheTime) {
  const ActivationMap act = {1, kN, 5};
  int swapped = 0;
  constexpr int kSeeds = 10000;
  for (int seed = 0; seed < kSeeds; ++seed) swapped += shuffle_timestamps(act, seed)[0] == 5;
  // Binomial(1e4, 0.5) has sd 50; allow 4 sd.
  EXPECT_NEAR(swapped, kSeeds / 2, 200);
}

TEST(ShuffleTest, DetectsPlantedInfluence) {
  const auto ds = small_world(0.0, 1.0, 2, 0.03);
  std::vector<ConceptId> concepts(30);
  std::iota(concepts.begin(), concepts.end(), 0);
  ShuffleOptions o;
  o.min_adopters = 10;
  const auto r = shuffle_test(ds.events.log, ds.network.graph, concepts, o);
  ASSERT_TRUE(r.test.has_value());
  EXPECT_GT(r.mean_difference, 0.0);
  EXPECT_LT(r.test->p_value, 0.01);
  for (const auto& c : r.concepts) {
    EXPECT_NEAR(c.difference, c.alpha_original - c.alpha_shuffled, 1e-15);
    EXPECT_GE(c.adopters, 10u);
  }
}

TEST(ShuffleTest, FloorsParallelismAndErrors) {
  const auto ds = small_world(1.0, 0.5, 3);
  const std::vector<ConceptId> concepts = {0, 1, 2, 3, 4, 5};
  ShuffleOptions o;
  o.min_adopters = 10;
  o.permutations = 2;
  o.seed = 5;
  const auto a = shuffle_test(ds.events.log, ds.network.graph, concepts, o);
  o.threads = 4;
  const auto b = shuffle_test(ds.events.log, ds.network.graph, concepts, o);
  ASSERT_EQ(a.concepts.size(), b.concepts.size());
  for (std::size_t i = 0; i < a.concepts.size(); ++i) {
    EXPECT_EQ(a.concepts[i].alpha_original, b.concepts[i].alpha_original);
    EXPECT_EQ(a.concepts[i].alpha_shuffled, b.concepts[i].alpha_shuffled);
  }
  EXPECT_EQ(a.mean_difference, b.mean_difference);

  o.min_adopters = 1000000;
  const auto none = shuffle_test(ds.events.log, ds.network.graph, concepts, o);
  EXPECT_TRUE(none.concepts.empty());
  EXPECT_EQ(none.below_floor, concepts);
  EXPECT_FALSE(none.test.has_value());
  o.permutations = 0;
  EXPECT_THROW(shuffle_test(ds.events.log, ds.network.graph, concepts, o), Error);
}

TEST(PmeMatch, SelectionRules) {
  const auto f = range_set(0, 25);
  const auto same = range_set(0, 25), j96 = range_set(0, 24), j92 = range_set(0, 23), j88 = range_set(0, 22);
  EXPECT_DOUBLE_EQ(size_gap(f, j92), 2.0 / 25.0);
  EXPECT_THROW(size_gap(ConceptSet{}, f), Error);

  const std::vector<MatchCandidate> c1 = {{3, &j92}, {4, &same}, {5, &j96}};
  auto m = pme_match(f, c1);
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->user, 4u);
  EXPECT_EQ(m->jaccard, 1.0);
  EXPECT_EQ(m->size_gap, 0.0);

  const std::vector<MatchCandidate> c2 = {{8, &j92}, {2, &j96}};
  m = pme_match(f, c2);
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->user, 2u);
  EXPECT_DOUBLE_EQ(m->jaccard, 24.0 / 25.0);

  const std::vector<MatchCandidate> c3 = {{1, &j88}};
  EXPECT_FALSE(pme_match(f, c3).has_value());

  const std::vector<MatchCandidate> tie = {{9, &j96}, {6, &j96}};
  EXPECT_EQ(pme_match(f, tie)->user, 6u);
}

TEST(PmeInfluence, HandWorld) {
  // u's friend f and the stranger s share a pre-window profile. After t, u
  // posts what f posts (case 1) or what both post (case 2).
  const Timestamp t = 100 * kSecondsPerWeek;
  const Timestamp pre = t - 5 * kSecondsPerWeek, post = t + 5 * kSecondsPerWeek;
  auto posts = [](const std::string& user, Timestamp ts, std::vector<ConceptId> ids) {
    std::vector<PhotoEvent> out;
    for (auto c : ids) out.push_back(event(user, ts + c, "US", {{c, 0.9}}));
    return out;
  };
  const SocialGraph g({{"u", "f"}}, {"s"});
  const ProfileTable profiles({{"f", "F", "18-29", "X"}, {"s", "M", "30-49", "X"}, {"u", "F", "18-29", "X"}});
  PmeOptions o;
  o.split = t;
  o.pre_length = 10 * kSecondsPerWeek;
  o.post_window = {t, t + 10 * kSecondsPerWeek};

  auto run = [&](std::vector<ConceptId> u_post, std::vector<ConceptId> f_post, std::vector<ConceptId> s_post) {
    std::vector<PhotoEvent> ev;
    for (auto&& v : {posts("u", pre, {20, 21}), posts("f", pre, {1, 2, 3, 4, 5}), posts("s", pre, {1, 2, 3, 4, 5}),
                     posts("u", post, u_post), posts("f", post, f_post), posts("s", post, s_post)}) {
      ev.insert(ev.end(), v.begin(), v.end());
    }
    return pme_influence(EventLog(ev), g, profiles, o);
  };

  const auto copy = run({7, 8}, {7, 8}, {9, 10});
  ASSERT_EQ(copy.users.size(), 1u);
  EXPECT_EQ(copy.users[0].user, "u");
  EXPECT_EQ(copy.users[0].matched, 1u);
  EXPECT_DOUBLE_EQ(copy.users[0].influence, 1.0);
  ASSERT_EQ(copy.matches.size(), 1u);
  EXPECT_EQ(copy.matches[0].match, "s");
  EXPECT_EQ(copy.matches[0].jaccard, 1.0);

  const auto same = run({7, 8}, {7, 9}, {7, 9});
  EXPECT_EQ(same.users[0].influence, 0.0);

  o.pooling = Pooling::Union;
  EXPECT_DOUBLE_EQ(run({7, 8}, {7, 8, 11, 12}, {9, 10}).users[0].influence, 0.5);
  o.post_window = {t - 1, t + 1};
  EXPECT_THROW(run({7}, {7}, {7}), Error);
}

TEST(PmeInfluence, GeneratedDiagnosticsAndInvariance) {
  const auto ds = small_world(2.0, 1.0, 4, 0.01);
  const auto start = ds.events.log.span_window().begin;
  PmeOptions o;
  o.split = start + 26 * kSecondsPerWeek;
  o.pre_length = 26 * kSecondsPerWeek;
  o.post_window = {o.split, start + 52 * kSecondsPerWeek};
  o.pool_size = 50;
  const auto r = pme_influence(ds.events.log, ds.network.graph, ds.network.profiles, o);
  ASSERT_FALSE(r.users.empty());
  for (const auto& m : r.matches) {
    EXPECT_GT(m.jaccard, kMatchJaccard);
    EXPECT_LT(m.size_gap, kMatchSizeGap);
    EXPECT_FALSE(ds.network.graph.has_edge(m.user, m.match));
    EXPECT_NE(m.user, m.match);
    EXPECT_EQ(ds.network.profiles.at(m.user).city, ds.network.profiles.at(m.match).city);
  }
  EXPECT_TRUE(std::is_sorted(r.users.begin(), r.users.end(),
                             [](const auto& a, const auto& b) { return a.user < b.user; }));

  o.threads = 4;
  const auto par = pme_influence(ds.events.log, ds.network.graph, ds.network.profiles, o);
  EXPECT_EQ(par.mean, r.mean);
  EXPECT_EQ(par.matches.size(), r.matches.size());

  // Reversing concept ids leaves every per-user value unchanged.
  std::vector<PhotoEvent> events(ds.events.log.events().begin(), ds.events.log.events().end());
  for (auto& e : events) {
    for (auto& s : e.scores) s.concept_id = 29 - s.concept_id;
    std::sort(e.scores.begin(), e.scores.end(), [](const auto& a, const auto& b) { return a.concept_id < b.concept_id; });
  }
  o.threads = 1;
  const auto relabeled = pme_influence(EventLog(events), ds.network.graph, ds.network.profiles, o);
  ASSERT_EQ(relabeled.users.size(), r.users.size());
  for (std::size_t i = 0; i < r.users.size(); ++i) {
    EXPECT_EQ(relabeled.users[i].user, r.users[i].user);
    EXPECT_DOUBLE_EQ(relabeled.users[i].influence, r.users[i].influence);
  }
}

TEST(Pooling, Names) {
  EXPECT_EQ(parse_pooling("union"), Pooling::Union);
  EXPECT_EQ(pooling_name(Pooling::Multiset), "multiset");
  EXPECT_THROW(parse_pooling("bag"), Error);
}
