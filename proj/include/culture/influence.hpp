// Influence vs homophily: the Shuffle test over per-concept activation
// panels and preference-matched estimation (PME) over concept sets.
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "culture/core.hpp"
#include "culture/stat.hpp"

namespace culture::influence {

// Discretized panel period: steps [0, n_steps) of length `step` from `start`.
struct PanelClock {
  Timestamp start = 0;
  Timestamp step = kSecondsPerWeek;
  int n_steps = 0;

  // Covers the whole log.
  static PanelClock spanning(const EventLog& log, Timestamp step = kSecondsPerWeek);
};

inline constexpr int kActiveBeforePanel = -1;
inline constexpr int kNeverActive = std::numeric_limits<int>::max();

// Activation step per graph user (graph index order): kActiveBeforePanel,
// a step in [0, n_steps), or kNeverActive (including activations after the
// panel ends).
using ActivationMap = std::vector<int>;

ActivationMap activation_steps(const EventLog& log, const SocialGraph& graph, ConceptId concept_id,
                               double tau, const PanelClock& clock);

struct PanelRow {
  std::uint32_t user = 0;  // graph index
  int step = 0;
  std::int64_t a = 0;      // friends active before this step
  int y = 0;               // 1 on the activation step
};

struct ActivationPanel {
  ConceptId concept_id = 0;
  Timestamp step_length = kSecondsPerWeek;
  std::vector<PanelRow> rows;
};

// recency_window counts steps; nullopt means all past activations count.
ActivationPanel build_activation_panel(const SocialGraph& graph, const ActivationMap& act,
                                       int n_steps, std::optional<int> recency_window,
                                       ConceptId concept_id = 0);
ActivationPanel build_activation_panel(const EventLog& log, const SocialGraph& graph,
                                       ConceptId concept_id, double tau, const PanelClock& clock,
                                       std::optional<int> recency_window);

// Same rows as the panel, collapsed by exposure count.
std::vector<stat::ExposureCell> panel_cells(const SocialGraph& graph, const ActivationMap& act,
                                            int n_steps, std::optional<int> recency_window);

// Permutes the in-panel activation steps among in-panel activators. Users
// active before the panel and non-activators keep their entries.
ActivationMap shuffle_timestamps(const ActivationMap& act, std::uint64_t seed);

std::size_t count_in_panel_activators(const ActivationMap& act);

struct ShuffleOptions {
  double tau = kDefaultTau;
  Timestamp step = kSecondsPerWeek;
  std::optional<int> recency_window;
  int permutations = 1;
  std::size_t min_adopters = 50;
  bool paired = true;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  stat::LogisticOptions logistic;
};

struct ConceptShuffle {
  ConceptId concept_id = 0;
  std::size_t adopters = 0;
  double alpha_original = 0.0;
  double alpha_shuffled = 0.0;  // mean over permutations
  double difference = 0.0;      // original - shuffled
};

struct ShuffleResult {
  std::vector<ConceptShuffle> concepts;  // passing concepts, ascending id
  std::vector<ConceptId> below_floor;
  std::vector<ConceptId> not_converged;
  double mean_original = 0.0;
  double sd_original = 0.0;
  double mean_shuffled = 0.0;
  double sd_shuffled = 0.0;
  double mean_difference = 0.0;
  double se_difference = 0.0;
  std::optional<stat::TestResult> test;  // alpha_original > alpha_shuffled
};

ShuffleResult shuffle_test(const EventLog& log, const SocialGraph& graph,
                           std::span<const ConceptId> concepts, const ShuffleOptions& opts,
                           std::optional<PanelClock> clock = std::nullopt);

// --- PME ----------------------------------------------------------------------

inline constexpr double kMatchJaccard = 0.9;
inline constexpr double kMatchSizeGap = 0.1;

// N(f, s) = | |A_f| - |A_s| | / |A_f|.
double size_gap(const ConceptSet& f, const ConceptSet& s);

struct MatchCandidate {
  std::uint32_t user = 0;  // graph index
  const ConceptSet* set = nullptr;
};

struct Match {
  std::uint32_t user = 0;
  double jaccard = 0.0;
  double size_gap = 0.0;
};

// Best candidate by J (ties to the smallest index) among those with
// J > kMatchJaccard and N < kMatchSizeGap. The caller excludes u and u's
// friends from the candidates.
std::optional<Match> pme_match(const ConceptSet& friend_set, std::span<const MatchCandidate> candidates);

// How the post-window sets of F(u) (and of S(u)) are pooled before measuring
// overlap with u's set: a set union, or a multiset where every matched pair
// contributes its own set.
enum class Pooling { Union, Multiset };

Pooling parse_pooling(std::string_view name);
std::string_view pooling_name(Pooling p);

struct PmeOptions {
  Timestamp split = 0;                 // t
  Timestamp pre_length = 26 * kSecondsPerWeek;
  TimeWindow post_window;              // must start at or after t
  double tau = kDefaultTau;
  std::size_t pool_size = 10000;
  Pooling pooling = Pooling::Multiset;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct MatchDiagnostic {
  UserId user;
  UserId friend_user;
  UserId match;
  double jaccard = 0.0;
  double size_gap = 0.0;
};

struct UserInfluence {
  UserId user;
  std::size_t friends = 0;
  std::size_t matched = 0;
  double influence = 0.0;
};

struct PmeResult {
  std::vector<UserInfluence> users;  // users with at least one match, ascending id
  std::vector<MatchDiagnostic> matches;
  std::size_t pairs_considered = 0;  // (u, f) pairs with nonempty A_t^f
  double match_rate = 0.0;
  double mean_match_jaccard = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  stat::TestResult test;
};

// The location stratum for candidate pools is the profile city.
PmeResult pme_influence(const EventLog& log, const SocialGraph& graph, const ProfileTable& profiles,
                        const PmeOptions& opts);

}  // namespace culture::influence
