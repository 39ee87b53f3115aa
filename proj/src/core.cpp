#include "culture/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace culture {

namespace {

constexpr std::array<std::string_view, kAllCategories.size()> kCategoryNames = {
    "Sports", "Animals", "Clothes", "Food",   "Furniture", "Music",
    "Plants", "Structures", "Places", "Scenes", "Vehicles"};

}  // namespace

std::string_view category_name(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<Category> parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == name) return kAllCategories[i];
  }
  // Table headers sometimes use the singular.
  if (name == "Scene") return Category::Scenes;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ConceptCatalog

ConceptCatalog::ConceptCatalog(std::vector<ConceptEntry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const ConceptEntry& a, const ConceptEntry& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.id != i) {
      throw Error("concept catalog: ids must be 0.." + std::to_string(entries_.size() - 1) +
                  " without gaps or duplicates (found id " + std::to_string(e.id) +
                  " at position " + std::to_string(i) + ")");
    }
    if (e.name.empty()) throw Error("concept catalog: empty name for id " + std::to_string(e.id));
    if (!by_name_.emplace(e.name, e.id).second) {
      throw Error("concept catalog: duplicate name '" + e.name + "'");
    }
    by_category_[static_cast<std::size_t>(e.category)].push_back(e.id);
  }
}

const ConceptEntry& ConceptCatalog::at(ConceptId id) const {
  if (id >= entries_.size()) throw Error("unknown concept id " + std::to_string(id));
  return entries_[id];
}

std::optional<ConceptId> ConceptCatalog::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

ConceptId ConceptCatalog::id_of(std::string_view name) const {
  auto id = find(name);
  if (!id) throw Error("unknown concept '" + std::string(name) + "'");
  return *id;
}

// ---------------------------------------------------------------------------
// PhotoEvent / EventLog

double PhotoEvent::score(ConceptId c) const {
  auto it = std::lower_bound(scores.begin(), scores.end(), c,
                             [](const ConceptScore& s, ConceptId id) { return s.concept_id < id; });
  return (it != scores.end() && it->concept_id == c) ? it->score : 0.0;
}

EventLog::EventLog(std::vector<PhotoEvent> events) : events_(std::move(events)) {
  ConceptId max_concept = 0;
  bool any_concept = false;
  std::set<std::string> regions;
  for (auto& e : events_) {
    if (e.ts <= 0) throw Error("event for user '" + e.user + "': timestamp must be positive");
    if (e.user.empty()) throw Error("event with empty user id");
    std::sort(e.scores.begin(), e.scores.end(),
              [](const ConceptScore& a, const ConceptScore& b) { return a.concept_id < b.concept_id; });
    for (std::size_t i = 0; i < e.scores.size(); ++i) {
      const auto& s = e.scores[i];
      if (!(s.score >= 0.0 && s.score <= 1.0)) {
        throw Error("event for user '" + e.user + "': score " + std::to_string(s.score) +
                    " outside [0,1]");
      }
      if (i > 0 && e.scores[i - 1].concept_id == s.concept_id) {
        throw Error("event for user '" + e.user + "': duplicate concept " +
                    std::to_string(s.concept_id));
      }
      max_concept = std::max(max_concept, s.concept_id);
      any_concept = true;
    }
    std::erase_if(e.scores, [](const ConceptScore& s) { return s.score == 0.0; });
    regions.insert(e.region);
  }
  std::stable_sort(events_.begin(), events_.end(),
                   [](const PhotoEvent& a, const PhotoEvent& b) { return a.ts < b.ts; });

  std::set<std::string> users;
  for (const auto& e : events_) users.insert(e.user);
  users_.assign(users.begin(), users.end());
  for (std::uint32_t i = 0; i < users_.size(); ++i) user_lookup_.emplace(users_[i], i);
  regions_.assign(regions.begin(), regions.end());

  by_user_.resize(users_.size());
  by_concept_.resize(any_concept ? max_concept + 1 : 0);
  event_user_.resize(events_.size());
  for (std::uint32_t i = 0; i < events_.size(); ++i) {
    const auto u = user_lookup_.at(events_[i].user);
    event_user_[i] = u;
    by_user_[u].push_back(i);
    for (const auto& s : events_[i].scores) by_concept_[s.concept_id].push_back(i);
  }
}

std::optional<std::uint32_t> EventLog::user_index(std::string_view user) const {
  auto it = user_lookup_.find(std::string(user));
  if (it == user_lookup_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::uint32_t> EventLog::by_user(std::string_view user) const {
  auto u = user_index(user);
  if (!u) return {};
  return by_user_[*u];
}

std::span<const std::uint32_t> EventLog::by_concept(ConceptId c) const {
  if (c >= by_concept_.size()) return {};
  return by_concept_[c];
}

bool EventLog::has_region(std::string_view region) const {
  return std::binary_search(regions_.begin(), regions_.end(), region);
}

TimeWindow EventLog::span_window() const {
  if (events_.empty()) return {};
  return {events_.front().ts, events_.back().ts + 1};
}

std::pair<std::size_t, std::size_t> EventLog::range(TimeWindow w) const {
  auto lo = std::lower_bound(events_.begin(), events_.end(), w.begin,
                             [](const PhotoEvent& e, Timestamp t) { return e.ts < t; });
  auto hi = std::lower_bound(lo, events_.end(), w.end,
                             [](const PhotoEvent& e, Timestamp t) { return e.ts < t; });
  return {static_cast<std::size_t>(lo - events_.begin()),
          static_cast<std::size_t>(hi - events_.begin())};
}

// ---------------------------------------------------------------------------
// SocialGraph

SocialGraph::SocialGraph(const std::vector<std::pair<UserId, UserId>>& edges,
                         const std::vector<UserId>& isolated_users) {
  std::set<std::string> names(isolated_users.begin(), isolated_users.end());
  for (const auto& [a, b] : edges) {
    if (a == b) throw Error("self-loop on user '" + a + "'");
    names.insert(a);
    names.insert(b);
  }
  users_.assign(names.begin(), names.end());
  for (std::uint32_t i = 0; i < users_.size(); ++i) lookup_.emplace(users_[i], i);
  adjacency_.resize(users_.size());
  for (const auto& [a, b] : edges) {
    const auto ia = lookup_.at(a);
    const auto ib = lookup_.at(b);
    adjacency_[ia].push_back(ib);
    adjacency_[ib].push_back(ia);
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    num_edges_ += adj.size();
  }
  num_edges_ /= 2;
}

std::optional<std::uint32_t> SocialGraph::index_of(std::string_view user) const {
  auto it = lookup_.find(std::string(user));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t SocialGraph::degree(std::string_view user) const {
  auto u = index_of(user);
  return u ? adjacency_[*u].size() : 0;
}

bool SocialGraph::has_edge(std::uint32_t a, std::uint32_t b) const {
  const auto& adj = adjacency_[a];
  return std::binary_search(adj.begin(), adj.end(), b);
}

bool SocialGraph::has_edge(std::string_view a, std::string_view b) const {
  auto ia = index_of(a);
  auto ib = index_of(b);
  return ia && ib && has_edge(*ia, *ib);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> SocialGraph::edges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(num_edges_);
  for (std::uint32_t u = 0; u < adjacency_.size(); ++u) {
    for (auto v : adjacency_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// ProfileTable

ProfileTable::ProfileTable(std::vector<UserProfile> rows) : rows_(std::move(rows)) {
  std::sort(rows_.begin(), rows_.end(),
            [](const UserProfile& a, const UserProfile& b) { return a.user < b.user; });
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (!lookup_.emplace(rows_[i].user, i).second) {
      throw Error("duplicate profile row for user '" + rows_[i].user + "'");
    }
  }
}

const UserProfile* ProfileTable::find(std::string_view user) const {
  auto it = lookup_.find(std::string(user));
  return it == lookup_.end() ? nullptr : &rows_[it->second];
}

const UserProfile& ProfileTable::at(std::string_view user) const {
  const auto* p = find(user);
  if (!p) throw Error("no profile for user '" + std::string(user) + "'");
  return *p;
}

void require_profiles(const SocialGraph& graph, const ProfileTable& profiles) {
  for (const auto& u : graph.users()) {
    if (!profiles.find(u)) throw Error("no profile for graph user '" + u + "'");
  }
}

// ---------------------------------------------------------------------------
// ConceptSet

ConceptSet::ConceptSet(std::initializer_list<ConceptId> ids) : ConceptSet(std::vector(ids)) {}

ConceptSet::ConceptSet(std::vector<ConceptId> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

void ConceptSet::insert(ConceptId c) {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), c);
  if (it == ids_.end() || *it != c) ids_.insert(it, c);
}

bool ConceptSet::contains(ConceptId c) const {
  return std::binary_search(ids_.begin(), ids_.end(), c);
}

ConceptSet set_union(const ConceptSet& a, const ConceptSet& b) {
  std::vector<ConceptId> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return ConceptSet(std::move(out));
}

std::size_t intersection_size(const ConceptSet& a, const ConceptSet& b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

// ---------------------------------------------------------------------------
// Derived indexes

ConceptSet threshold_concepts(const PhotoEvent& event, double tau) {
  std::vector<ConceptId> ids;
  for (const auto& s : event.scores) {
    if (s.score >= tau) ids.push_back(s.concept_id);
  }
  return ConceptSet(std::move(ids));
}

ConceptSet user_concept_set(const EventLog& log, std::uint32_t user_index, TimeWindow window,
                            double tau) {
  std::vector<ConceptId> ids;
  const auto events = log.events();
  for (auto idx : log.by_user_index(user_index)) {
    const auto& e = events[idx];
    if (!window.contains(e.ts)) continue;
    for (const auto& s : e.scores) {
      if (s.score >= tau) ids.push_back(s.concept_id);
    }
  }
  return ConceptSet(std::move(ids));
}

std::unordered_map<UserId, Timestamp> activation_times(const EventLog& log, ConceptId concept_id,
                                                        double tau) {
  std::unordered_map<UserId, Timestamp> out;
  const auto events = log.events();
  for (auto idx : log.by_concept(concept_id)) {
    const auto& e = events[idx];
    if (e.score(concept_id) < tau) continue;
    // Index order is time order, so the first hit is the earliest.
    out.emplace(e.user, e.ts);
  }
  return out;
}

ScoreVector user_mean_scores(const EventLog& log, const ConceptCatalog& catalog,
                             std::string_view user, TimeWindow window,
                             std::optional<Category> category) {
  if (window.empty()) throw Error("user_mean_scores: empty window");
  ScoreVector out;
  out.values.assign(catalog.size(), 0.0);
  const auto events = log.events();
  for (auto idx : log.by_user(user)) {
    const auto& e = events[idx];
    if (!window.contains(e.ts)) continue;
    ++out.n_events;
    for (const auto& s : e.scores) {
      if (s.concept_id < out.values.size()) out.values[s.concept_id] += s.score;
    }
  }
  if (out.n_events > 0) {
    for (auto& v : out.values) v /= static_cast<double>(out.n_events);
  }
  out.empty = out.n_events == 0;
  if (category) out.values = category_slice(out.values, catalog, *category);
  return out;
}

std::vector<double> category_slice(std::span<const double> full, const ConceptCatalog& catalog,
                                   Category category) {
  const auto ids = catalog.in_category(category);
  std::vector<double> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(full[id]);
  return out;
}

}  // namespace culture
