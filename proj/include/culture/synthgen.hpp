// Synthetic ground truth: latent-preference friendship networks with tunable
// homophily, weekly posting with a tunable influence hazard, and labeled
// trend-shape corpora.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "culture/core.hpp"
#include "culture/trends.hpp"

namespace culture::synth {

enum class Shape { Increasing, Decreasing, Seasonal, Flat };

std::string_view shape_name(Shape s);
Shape parse_shape(std::string_view name);

struct RegionSpec {
  std::string code;
  Timestamp utc_offset = 0;  // seconds
  bool southern = false;
  double weight = 1.0;
};

std::vector<RegionSpec> default_regions();

inline constexpr Timestamp kDefaultStart = 1388966400;  // 2014-01-06T00:00:00Z, a Monday

struct GenConfig {
  std::size_t n_users = 2000;
  std::size_t n_concepts = 50;
  double homophily = 0.0;                          // h
  std::map<std::string, double> homophily_by_age;  // per-bucket h; a pair uses the mean
  double influence = 0.0;                          // lambda
  double base_rate = 1.0;                          // expected baseline posts per user per step
  int steps = 104;
  Timestamp step_seconds = kSecondsPerWeek;
  int exposure_window = 4;                         // w, in steps
  int exposure_cap = 5;
  double influence_scale = 0.003;                  // hazard per exposed friend at lambda = 1
  std::size_t n_archetypes = 10;
  std::size_t core_size = 5;
  double pref_concentration = 2000.0;              // Dirichlet total mass over a core
  double mean_degree = 10.0;
  double shape_amplitude = 0.3;
  std::vector<Shape> shapes;                       // per concept; empty assigns them cyclically
  std::vector<RegionSpec> regions = default_regions();
  std::vector<std::string> genders = {"F", "M"};
  std::vector<std::string> age_buckets = {"18-29", "30-49", "50+"};
  double tau = kDefaultTau;
  std::size_t noise_concepts = 2;
  double noise_max = 0.05;
  Timestamp start = kDefaultStart;
  std::uint64_t seed = 0;

  // Throws naming the first invalid field.
  void validate() const;
  std::string user_name(std::size_t u) const;
};

ConceptCatalog gen_catalog(std::size_t n_concepts);

struct Network {
  SocialGraph graph;
  ProfileTable profiles;
  std::vector<std::size_t> archetype;                   // per user (graph index)
  std::vector<std::vector<ConceptId>> cores;            // per archetype
  std::vector<std::vector<double>> preferences;         // per user, length n_concepts
  std::vector<std::string> region;                      // per user
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // generation order
  double base_edge_probability = 0.0;
};

Network gen_network(const GenConfig& cfg);

enum class Cause : std::uint8_t { Baseline, Influenced };

struct EventStream {
  EventLog log;
  std::vector<Cause> causes;  // aligned with log.events()
  std::vector<Shape> shapes;  // per concept
  std::size_t influenced = 0;
};

EventStream gen_events(const Network& net, const GenConfig& cfg);

// Hazard multiplier for a concept shape at a step; seasonal shapes peak half a
// cycle apart across hemispheres.
double shape_modulation(Shape s, int step, int steps, double amplitude, bool southern,
                        double steps_per_year = 52.0);

// Ground-truth sidecar: config echo, shapes, cores, preferences, edges and
// per-event cause tags.
std::string ground_truth_json(const GenConfig& cfg, const ConceptCatalog& catalog,
                              const Network& net, const EventStream& events);

struct Dataset {
  ConceptCatalog catalog;
  Network network;
  EventStream events;
};

Dataset generate(const GenConfig& cfg);

// Writes catalog.csv, events.jsonl, graph.txt, profiles.csv and
// ground_truth.json into dir.
void write_dataset(const std::filesystem::path& dir, const GenConfig& cfg, const Dataset& ds);

struct TrendCorpusConfig {
  std::map<Shape, std::size_t> per_shape = {
      {Shape::Increasing, 20}, {Shape::Decreasing, 20}, {Shape::Seasonal, 20}};
  std::size_t n_bins = 36;
  std::size_t period = 12;  // bins per seasonal cycle
  double noise = 0.05;      // additive Gaussian sigma on a [-1, 1] base shape
  Timestamp start = kDefaultStart;
  std::uint64_t seed = 0;
};

struct TrendCorpus {
  std::vector<trends::TrendSeries> series;  // normalized
  std::vector<Shape> labels;
};

TrendCorpus gen_trend_corpus(const TrendCorpusConfig& cfg);

}  // namespace culture::synth
