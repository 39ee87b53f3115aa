#include "culture/influence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "culture/parallel.hpp"

namespace culture::influence {

PanelClock PanelClock::spanning(const EventLog& log, Timestamp step) {
  if (step <= 0) throw Error("panel step must be positive");
  const auto span = log.span_window();
  if (span.empty()) throw Error("cannot build a panel from an empty event log");
  PanelClock c;
  c.start = span.begin;
  c.step = step;
  c.n_steps = static_cast<int>((span.length() + step - 1) / step);
  return c;
}

namespace {

std::vector<std::int64_t> graph_index_of_log_users(const EventLog& log, const SocialGraph& graph) {
  std::vector<std::int64_t> out(log.users().size(), -1);
  for (std::size_t u = 0; u < out.size(); ++u) {
    if (auto g = graph.index_of(log.users()[u])) out[u] = *g;
  }
  return out;
}

ActivationMap activation_steps_mapped(const EventLog& log, std::span<const std::int64_t> to_graph,
                                      std::size_t n_users, ConceptId concept_id, double tau,
                                      const PanelClock& clock) {
  ActivationMap act(n_users, kNeverActive);
  std::vector<char> seen(n_users, 0);
  const auto events = log.events();
  for (auto idx : log.by_concept(concept_id)) {
    const auto g = to_graph[log.event_user(idx)];
    if (g < 0 || seen[g]) continue;
    const auto& e = events[idx];
    if (e.score(concept_id) < tau) continue;
    seen[g] = 1;
    if (e.ts < clock.start) {
      act[g] = kActiveBeforePanel;
    } else {
      const auto s = (e.ts - clock.start) / clock.step;
      act[g] = s < clock.n_steps ? static_cast<int>(s) : kNeverActive;
    }
  }
  return act;
}

// Calls visit(user, step, a, y) for every panel row in user-then-step order.
template <typename Visit>
void for_each_row(const SocialGraph& graph, const ActivationMap& act, int n_steps,
                  std::optional<int> recency_window, Visit&& visit) {
  if (act.size() != graph.num_users()) throw Error("activation map does not match the graph");
  if (recency_window && *recency_window < 1) throw Error("recency window must be at least 1 step");
  std::vector<int> friend_steps;
  for (std::uint32_t u = 0; u < graph.num_users(); ++u) {
    if (act[u] == kActiveBeforePanel) continue;
    friend_steps.clear();
    for (auto v : graph.neighbors(u)) {
      if (act[v] != kNeverActive) friend_steps.push_back(act[v]);
    }
    std::sort(friend_steps.begin(), friend_steps.end());
    const int last = act[u] == kNeverActive ? n_steps - 1 : act[u];
    for (int s = 0; s <= last; ++s) {
      const auto hi = std::lower_bound(friend_steps.begin(), friend_steps.end(), s);
      auto lo = friend_steps.begin();
      if (recency_window) lo = std::lower_bound(friend_steps.begin(), hi, s - *recency_window);
      visit(u, s, static_cast<std::int64_t>(hi - lo), s == act[u] ? 1 : 0);
    }
  }
}

}  // namespace

ActivationMap activation_steps(const EventLog& log, const SocialGraph& graph, ConceptId concept_id,
                               double tau, const PanelClock& clock) {
  const auto to_graph = graph_index_of_log_users(log, graph);
  return activation_steps_mapped(log, to_graph, graph.num_users(), concept_id, tau, clock);
}

ActivationPanel build_activation_panel(const SocialGraph& graph, const ActivationMap& act,
                                       int n_steps, std::optional<int> recency_window,
                                       ConceptId concept_id) {
  ActivationPanel p;
  p.concept_id = concept_id;
  for_each_row(graph, act, n_steps, recency_window,
               [&](std::uint32_t u, int s, std::int64_t a, int y) { p.rows.push_back({u, s, a, y}); });
  return p;
}

ActivationPanel build_activation_panel(const EventLog& log, const SocialGraph& graph,
                                       ConceptId concept_id, double tau, const PanelClock& clock,
                                       std::optional<int> recency_window) {
  if (clock.step <= 0) throw Error("panel step must be positive");
  auto p = build_activation_panel(graph, activation_steps(log, graph, concept_id, tau, clock),
                                  clock.n_steps, recency_window, concept_id);
  p.step_length = clock.step;
  return p;
}

std::vector<stat::ExposureCell> panel_cells(const SocialGraph& graph, const ActivationMap& act,
                                            int n_steps, std::optional<int> recency_window) {
  std::vector<stat::ExposureCell> cells;
  for_each_row(graph, act, n_steps, recency_window, [&](std::uint32_t, int, std::int64_t a, int y) {
    if (static_cast<std::size_t>(a) >= cells.size()) cells.resize(a + 1);
    ++cells[a].trials;
    cells[a].successes += y;
  });
  std::vector<stat::ExposureCell> out;
  for (std::size_t a = 0; a < cells.size(); ++a) {
    if (cells[a].trials == 0) continue;
    cells[a].a = static_cast<std::int64_t>(a);
    out.push_back(cells[a]);
  }
  return out;
}

ActivationMap shuffle_timestamps(const ActivationMap& act, std::uint64_t seed) {
  std::vector<std::size_t> who;
  std::vector<int> steps;
  for (std::size_t u = 0; u < act.size(); ++u) {
    if (act[u] != kActiveBeforePanel && act[u] != kNeverActive) {
      who.push_back(u);
      steps.push_back(act[u]);
    }
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = steps.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(steps[i - 1], steps[pick(rng)]);
  }
  ActivationMap out = act;
  for (std::size_t i = 0; i < who.size(); ++i) out[who[i]] = steps[i];
  return out;
}

std::size_t count_in_panel_activators(const ActivationMap& act) {
  return static_cast<std::size_t>(std::count_if(act.begin(), act.end(), [](int s) {
    return s != kActiveBeforePanel && s != kNeverActive;
  }));
}

ShuffleResult shuffle_test(const EventLog& log, const SocialGraph& graph,
                           std::span<const ConceptId> concepts, const ShuffleOptions& opts,
                           std::optional<PanelClock> clock) {
  if (opts.permutations < 1) throw Error("shuffle test: permutations must be at least 1");
  const PanelClock pc = clock ? *clock : PanelClock::spanning(log, opts.step);
  if (pc.step <= 0 || pc.n_steps < 1) throw Error("shuffle test: invalid panel clock");
  const auto to_graph = graph_index_of_log_users(log, graph);

  enum class Status { Ok, BelowFloor, NotConverged };
  struct Slot {
    Status status = Status::Ok;
    ConceptShuffle row;
  };
  std::vector<Slot> slots(concepts.size());
  parallel_for(concepts.size(), opts.threads, [&](std::size_t i) {
    const ConceptId c = concepts[i];
    auto& slot = slots[i];
    slot.row.concept_id = c;
    const auto act = activation_steps_mapped(log, to_graph, graph.num_users(), c, opts.tau, pc);
    slot.row.adopters = count_in_panel_activators(act);
    if (slot.row.adopters < opts.min_adopters || slot.row.adopters < 2) {
      slot.status = Status::BelowFloor;
      return;
    }
    const auto orig =
        stat::fit_logistic(panel_cells(graph, act, pc.n_steps, opts.recency_window), opts.logistic);
    if (!orig.converged) {
      slot.status = Status::NotConverged;
      return;
    }
    double sum = 0.0;
    const auto concept_seed = derive_seed(opts.seed, c);
    for (int r = 0; r < opts.permutations; ++r) {
      const auto shuffled = shuffle_timestamps(act, derive_seed(concept_seed, r));
      const auto fit = stat::fit_logistic(
          panel_cells(graph, shuffled, pc.n_steps, opts.recency_window), opts.logistic);
      if (!fit.converged) {
        slot.status = Status::NotConverged;
        return;
      }
      sum += fit.alpha;
    }
    slot.row.alpha_original = orig.alpha;
    slot.row.alpha_shuffled = sum / opts.permutations;
    slot.row.difference = slot.row.alpha_original - slot.row.alpha_shuffled;
  });

  ShuffleResult res;
  for (const auto& s : slots) {
    switch (s.status) {
      case Status::Ok: res.concepts.push_back(s.row); break;
      case Status::BelowFloor: res.below_floor.push_back(s.row.concept_id); break;
      case Status::NotConverged: res.not_converged.push_back(s.row.concept_id); break;
    }
  }
  std::sort(res.concepts.begin(), res.concepts.end(),
            [](const auto& a, const auto& b) { return a.concept_id < b.concept_id; });
  std::sort(res.below_floor.begin(), res.below_floor.end());
  std::sort(res.not_converged.begin(), res.not_converged.end());

  std::vector<double> orig, shuf, diff;
  for (const auto& r : res.concepts) {
    orig.push_back(r.alpha_original);
    shuf.push_back(r.alpha_shuffled);
    diff.push_back(r.difference);
  }
  if (!diff.empty()) {
    res.mean_original = stat::mean(orig);
    res.mean_shuffled = stat::mean(shuf);
    res.mean_difference = stat::mean(diff);
  }
  if (diff.size() >= 2) {
    res.sd_original = stat::sample_sd(orig);
    res.sd_shuffled = stat::sample_sd(shuf);
    res.se_difference = stat::sample_sd(diff) / std::sqrt(static_cast<double>(diff.size()));
    res.test = opts.paired ? stat::paired_t(orig, shuf, stat::Alternative::Greater)
                           : stat::welch_t(orig, shuf, stat::Alternative::Greater);
  }
  return res;
}

// --- PME ----------------------------------------------------------------------

double size_gap(const ConceptSet& f, const ConceptSet& s) {
  if (f.empty()) throw Error("size gap undefined for an empty friend set");
  const double a = static_cast<double>(f.size()), b = static_cast<double>(s.size());
  return std::abs(a - b) / a;
}

std::optional<Match> pme_match(const ConceptSet& friend_set,
                               std::span<const MatchCandidate> candidates) {
  if (friend_set.empty()) return std::nullopt;
  std::optional<Match> best;
  for (const auto& c : candidates) {
    const double j = stat::jaccard(friend_set, *c.set);
    const double n = size_gap(friend_set, *c.set);
    if (!(j > kMatchJaccard && n < kMatchSizeGap)) continue;
    if (!best || j > best->jaccard || (j == best->jaccard && c.user < best->user)) {
      best = Match{c.user, j, n};
    }
  }
  return best;
}

Pooling parse_pooling(std::string_view name) {
  if (name == "union") return Pooling::Union;
  if (name == "multiset") return Pooling::Multiset;
  throw Error("unknown pooling '" + std::string(name) + "' (expected union or multiset)");
}

std::string_view pooling_name(Pooling p) { return p == Pooling::Union ? "union" : "multiset"; }

PmeResult pme_influence(const EventLog& log, const SocialGraph& graph, const ProfileTable& profiles,
                        const PmeOptions& opts) {
  require_profiles(graph, profiles);
  if (opts.pre_length <= 0) throw Error("pme: pre-window length must be positive");
  if (opts.post_window.empty()) throw Error("pme: empty post window");
  if (opts.post_window.begin < opts.split) throw Error("pme: post window must start at or after t");
  if (opts.pool_size == 0) throw Error("pme: candidate pool size must be positive");

  const std::size_t n = graph.num_users();
  const TimeWindow pre{opts.split - opts.pre_length, opts.split};
  std::vector<ConceptSet> before(n), after(n);
  for (std::uint32_t u = 0; u < n; ++u) {
    if (auto li = log.user_index(graph.name(u))) {
      before[u] = user_concept_set(log, *li, pre, opts.tau);
      after[u] = user_concept_set(log, *li, opts.post_window, opts.tau);
    }
  }

  // Ranked acceptable matches per friend, best J first then smallest index.
  std::vector<std::vector<Match>> ranked(n);
  parallel_for(n, opts.threads, [&](std::size_t f) {
    if (before[f].empty()) return;
    for (std::uint32_t s = 0; s < n; ++s) {
      if (s == f || before[s].empty()) continue;
      const double ng = size_gap(before[f], before[s]);
      if (!(ng < kMatchSizeGap)) continue;
      const double j = stat::jaccard(before[f], before[s]);
      if (j > kMatchJaccard) ranked[f].push_back({s, j, ng});
    }
    std::stable_sort(ranked[f].begin(), ranked[f].end(),
                     [](const Match& a, const Match& b) { return a.jaccard > b.jaccard; });
  });

  std::vector<std::string> city(n);
  std::map<std::string, std::vector<std::uint32_t>> by_city;
  for (std::uint32_t u = 0; u < n; ++u) {
    city[u] = profiles.at(graph.name(u)).city;
    by_city[city[u]].push_back(u);
  }

  struct Slot {
    bool included = false;
    UserInfluence inf;
    std::vector<MatchDiagnostic> diags;
    std::size_t pairs = 0;
  };
  std::vector<Slot> slots(n);
  parallel_for(n, opts.threads, [&](std::size_t ui) {
    const auto u = static_cast<std::uint32_t>(ui);
    if (before[u].empty() || after[u].empty()) return;
    auto& slot = slots[u];
    const auto nb = graph.neighbors(u);

    // Candidate pool: same city, not u, not a friend; sampled when large.
    const auto& local = by_city.at(city[u]);
    std::vector<std::uint32_t> pool;
    bool whole_city = true;
    if (local.size() > opts.pool_size) {
      for (auto s : local) {
        if (s != u && !std::binary_search(nb.begin(), nb.end(), s)) pool.push_back(s);
      }
      if (pool.size() > opts.pool_size) {
        whole_city = false;
        std::mt19937_64 rng(derive_seed(opts.seed, hash_key(graph.name(u))));
        for (std::size_t t = 0; t < opts.pool_size; ++t) {
          std::uniform_int_distribution<std::size_t> pick(t, pool.size() - 1);
          std::swap(pool[t], pool[pick(rng)]);
        }
        pool.resize(opts.pool_size);
        std::sort(pool.begin(), pool.end());
      }
    }
    auto eligible = [&](std::uint32_t s) {
      if (s == u || city[s] != city[u] || std::binary_search(nb.begin(), nb.end(), s)) return false;
      return whole_city || std::binary_search(pool.begin(), pool.end(), s);
    };

    ConceptSet friend_union, match_union;
    // Multiset pooling: overlap and size totals over matched pairs.
    std::size_t f_hit = 0, f_size = 0, s_hit = 0, s_size = 0;
    for (auto f : nb) {
      slot.inf.friends += 1;
      if (before[f].empty()) continue;
      ++slot.pairs;
      for (const auto& m : ranked[f]) {
        if (!eligible(m.user)) continue;
        slot.diags.push_back({graph.name(u), graph.name(f), graph.name(m.user), m.jaccard, m.size_gap});
        if (opts.pooling == Pooling::Union) {
          friend_union = set_union(friend_union, after[f]);
          match_union = set_union(match_union, after[m.user]);
        } else {
          f_hit += intersection_size(after[f], after[u]);
          f_size += after[f].size();
          s_hit += intersection_size(after[m.user], after[u]);
          s_size += after[m.user].size();
        }
        ++slot.inf.matched;
        break;
      }
    }
    if (slot.inf.matched == 0) return;
    auto ratio = [](std::size_t hit, std::size_t size) {
      return size == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(size);
    };
    if (opts.pooling == Pooling::Union) {
      f_hit = intersection_size(friend_union, after[u]);
      f_size = friend_union.size();
      s_hit = intersection_size(match_union, after[u]);
      s_size = match_union.size();
    }
    slot.included = true;
    slot.inf.user = graph.name(u);
    slot.inf.influence = ratio(f_hit, f_size) - ratio(s_hit, s_size);
  });

  PmeResult res;
  double j_sum = 0.0;
  for (auto& s : slots) {
    res.pairs_considered += s.pairs;
    for (auto& d : s.diags) {
      j_sum += d.jaccard;
      res.matches.push_back(std::move(d));
    }
    if (s.included) res.users.push_back(std::move(s.inf));
  }
  if (res.users.empty()) throw Error("pme: no matched population");
  res.match_rate = res.pairs_considered == 0
                       ? 0.0
                       : static_cast<double>(res.matches.size()) / static_cast<double>(res.pairs_considered);
  res.mean_match_jaccard = j_sum / static_cast<double>(res.matches.size());

  std::vector<double> inf;
  for (const auto& u : res.users) inf.push_back(u.influence);
  res.mean = stat::mean(inf);
  if (inf.size() >= 2) {
    res.sd = stat::sample_sd(inf);
    res.test = stat::one_sample_t(inf, 0.0);
  } else {
    res.test.n1 = inf.size();
  }
  return res;
}

}  // namespace culture::influence
