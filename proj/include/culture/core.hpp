// Domain types shared by every analysis: concepts, photo events, the
// friendship graph and user profiles.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace culture {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using UserId = std::string;
using ConceptId = std::uint32_t;
using Timestamp = std::int64_t;  // UTC seconds

inline constexpr Timestamp kSecondsPerHour = 3600;
inline constexpr Timestamp kSecondsPerDay = 86400;
inline constexpr Timestamp kSecondsPerWeek = 7 * kSecondsPerDay;

// Half-open interval [begin, end).
struct TimeWindow {
  Timestamp begin = 0;
  Timestamp end = 0;

  bool contains(Timestamp ts) const { return ts >= begin && ts < end; }
  bool empty() const { return end <= begin; }
  Timestamp length() const { return end - begin; }
};

enum class Category : std::uint8_t {
  Sports,
  Animals,
  Clothes,
  Food,
  Furniture,
  Music,
  Plants,
  Structures,
  Places,
  Scenes,
  Vehicles,
};

inline constexpr std::array<Category, 11> kAllCategories = {
    Category::Sports,    Category::Animals, Category::Clothes,    Category::Food,
    Category::Furniture, Category::Music,   Category::Plants,     Category::Structures,
    Category::Places,    Category::Scenes,  Category::Vehicles};

std::string_view category_name(Category c);
std::optional<Category> parse_category(std::string_view name);

struct ConceptEntry {
  ConceptId id = 0;
  std::string name;
  Category category = Category::Scenes;
};

// Dense 0..K-1 concept table with unique names.
class ConceptCatalog {
 public:
  ConceptCatalog() = default;
  explicit ConceptCatalog(std::vector<ConceptEntry> entries);

  std::size_t size() const { return entries_.size(); }
  const ConceptEntry& at(ConceptId id) const;
  const std::vector<ConceptEntry>& entries() const { return entries_; }
  std::optional<ConceptId> find(std::string_view name) const;
  ConceptId id_of(std::string_view name) const;
  std::span<const ConceptId> in_category(Category c) const {
    return by_category_[static_cast<std::size_t>(c)];
  }

 private:
  std::vector<ConceptEntry> entries_;
  std::unordered_map<std::string, ConceptId> by_name_;
  std::array<std::vector<ConceptId>, kAllCategories.size()> by_category_;
};

struct ConceptScore {
  ConceptId concept_id = 0;
  double score = 0.0;

  friend bool operator==(const ConceptScore&, const ConceptScore&) = default;
};

struct PhotoEvent {
  UserId user;
  Timestamp ts = 0;
  std::string region;
  std::vector<ConceptScore> scores;  // sorted by concept, no zeros

  // Score of a concept, 0 when absent from the sparse map.
  double score(ConceptId c) const;

  friend bool operator==(const PhotoEvent&, const PhotoEvent&) = default;
};

// Time-ordered events with by-user and by-concept indexes. Immutable once
// built.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::vector<PhotoEvent> events);

  std::span<const PhotoEvent> events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  // Sorted distinct user ids.
  const std::vector<UserId>& users() const { return users_; }
  std::optional<std::uint32_t> user_index(std::string_view user) const;
  std::uint32_t event_user(std::size_t event) const { return event_user_[event]; }

  // Event indices, ascending (and therefore time ordered).
  std::span<const std::uint32_t> by_user(std::string_view user) const;
  std::span<const std::uint32_t> by_user_index(std::uint32_t u) const { return by_user_[u]; }
  std::span<const std::uint32_t> by_concept(ConceptId c) const;

  // Sorted distinct region codes.
  const std::vector<std::string>& regions() const { return regions_; }
  bool has_region(std::string_view region) const;

  // [first ts, last ts + 1); empty log gives an empty window.
  TimeWindow span_window() const;

  // Indices of the events whose ts lies in the window.
  std::pair<std::size_t, std::size_t> range(TimeWindow w) const;

 private:
  std::vector<PhotoEvent> events_;
  std::vector<UserId> users_;
  std::unordered_map<std::string, std::uint32_t> user_lookup_;
  std::vector<std::uint32_t> event_user_;
  std::vector<std::vector<std::uint32_t>> by_user_;
  std::vector<std::vector<std::uint32_t>> by_concept_;
  std::vector<std::string> regions_;
};

// Undirected friendship graph over string user ids. Users are stored sorted,
// so dense index order equals user-id order.
class SocialGraph {
 public:
  SocialGraph() = default;
  // Throws on self-loops; duplicate pairs in either orientation collapse.
  SocialGraph(const std::vector<std::pair<UserId, UserId>>& edges,
              const std::vector<UserId>& isolated_users = {});

  std::size_t num_users() const { return users_.size(); }
  std::size_t num_edges() const { return num_edges_; }
  const std::vector<UserId>& users() const { return users_; }
  const UserId& name(std::uint32_t u) const { return users_[u]; }
  std::optional<std::uint32_t> index_of(std::string_view user) const;

  std::span<const std::uint32_t> neighbors(std::uint32_t u) const { return adjacency_[u]; }
  std::size_t degree(std::uint32_t u) const { return adjacency_[u].size(); }
  std::size_t degree(std::string_view user) const;
  bool has_edge(std::uint32_t a, std::uint32_t b) const;
  bool has_edge(std::string_view a, std::string_view b) const;

  // Each unordered edge once, as (lower index, higher index), sorted.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;

 private:
  std::vector<UserId> users_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
  std::vector<std::vector<std::uint32_t>> adjacency_;
  std::size_t num_edges_ = 0;
};

struct UserProfile {
  UserId user;
  std::string gender;
  std::string age_bucket;  // e.g. 18-29, 30-49, 50+
  std::string city;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

class ProfileTable {
 public:
  ProfileTable() = default;
  // Throws on a duplicate user row.
  explicit ProfileTable(std::vector<UserProfile> rows);

  std::size_t size() const { return rows_.size(); }
  const std::vector<UserProfile>& rows() const { return rows_; }
  const UserProfile* find(std::string_view user) const;
  const UserProfile& at(std::string_view user) const;

 private:
  std::vector<UserProfile> rows_;  // sorted by user
  std::unordered_map<std::string, std::size_t> lookup_;
};

// Throws unless every graph user has a profile.
void require_profiles(const SocialGraph& graph, const ProfileTable& profiles);

struct ScoreVector {
  std::vector<double> values;
  std::size_t n_events = 0;
  bool empty = true;
};

// Sorted set of concept ids.
class ConceptSet {
 public:
  ConceptSet() = default;
  ConceptSet(std::initializer_list<ConceptId> ids);
  explicit ConceptSet(std::vector<ConceptId> ids);

  void insert(ConceptId c);
  bool contains(ConceptId c) const;
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  const std::vector<ConceptId>& ids() const { return ids_; }

  friend bool operator==(const ConceptSet&, const ConceptSet&) = default;

 private:
  std::vector<ConceptId> ids_;
};

// Union of two sets.
ConceptSet set_union(const ConceptSet& a, const ConceptSet& b);
std::size_t intersection_size(const ConceptSet& a, const ConceptSet& b);

inline constexpr double kDefaultTau = 0.5;

// Concepts whose score is at least tau.
ConceptSet threshold_concepts(const PhotoEvent& event, double tau = kDefaultTau);

// Concepts posted at score >= tau by one user in a window.
ConceptSet user_concept_set(const EventLog& log, std::uint32_t user_index, TimeWindow window,
                            double tau = kDefaultTau);

// First ts at which each user posts the concept with score >= tau. Users who
// never qualify are absent.
std::unordered_map<UserId, Timestamp> activation_times(const EventLog& log, ConceptId concept_id,
                                                        double tau = kDefaultTau);

// Per-concept mean score over the user's events in the window; missing
// sparse entries count as 0. With a category the vector is restricted to the
// category's concepts in catalog order.
ScoreVector user_mean_scores(const EventLog& log, const ConceptCatalog& catalog,
                             std::string_view user, TimeWindow window,
                             std::optional<Category> category = std::nullopt);

// Restrict a full-length vector to a category slice.
std::vector<double> category_slice(std::span<const double> full, const ConceptCatalog& catalog,
                                   Category category);

}  // namespace culture
