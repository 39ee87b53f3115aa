#include "culture/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <json.hpp>

#include "culture/io.hpp"
#include "culture/timeutil.hpp"

namespace culture::synth {

std::string_view shape_name(Shape s) {
  switch (s) {
    case Shape::Increasing: return "increasing";
    case Shape::Decreasing: return "decreasing";
    case Shape::Seasonal: return "seasonal";
    case Shape::Flat: return "flat";
  }
  return "flat";
}

Shape parse_shape(std::string_view name) {
  for (auto s : {Shape::Increasing, Shape::Decreasing, Shape::Seasonal, Shape::Flat}) {
    if (shape_name(s) == name) return s;
  }
  throw Error("unknown shape '" + std::string(name) +
              "' (expected increasing, decreasing, seasonal or flat)");
}

std::vector<RegionSpec> default_regions() {
  return {{"AU", 10 * kSecondsPerHour, true, 1.0},
          {"BR", -3 * kSecondsPerHour, true, 1.0},
          {"FR", 1 * kSecondsPerHour, false, 1.0},
          {"JP", 9 * kSecondsPerHour, false, 1.0},
          {"US", -5 * kSecondsPerHour, false, 1.0}};
}

void GenConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error("invalid generator setting '" + field + "': " + why);
  };
  if (n_users < 2) fail("n_users", "need at least 2 users");
  if (n_concepts < 1) fail("n_concepts", "need at least 1 concept");
  if (!(homophily >= 0.0)) fail("homophily", "must be >= 0");
  for (const auto& [bucket, h] : homophily_by_age) {
    if (!(h >= 0.0)) fail("homophily_by_age", "must be >= 0 for bucket " + bucket);
    if (std::find(age_buckets.begin(), age_buckets.end(), bucket) == age_buckets.end()) {
      fail("homophily_by_age", "unknown age bucket " + bucket);
    }
  }
  if (!(influence >= 0.0)) fail("influence", "must be >= 0");
  if (!(base_rate >= 0.0)) fail("base_rate", "must be >= 0");
  if (steps < 1) fail("steps", "must be >= 1");
  if (step_seconds <= 0) fail("step_seconds", "must be positive");
  if (exposure_window < 1) fail("exposure_window", "must be >= 1");
  if (exposure_cap < 0) fail("exposure_cap", "must be >= 0");
  if (!(influence_scale >= 0.0)) fail("influence_scale", "must be >= 0");
  if (n_archetypes < 1) fail("n_archetypes", "must be >= 1");
  if (core_size < 1 || core_size > n_concepts) fail("core_size", "must lie in [1, n_concepts]");
  if (!(pref_concentration > 0.0)) fail("pref_concentration", "must be positive");
  if (!(mean_degree >= 0.0)) fail("mean_degree", "must be >= 0");
  if (mean_degree > static_cast<double>(n_users - 1)) {
    fail("mean_degree", "expected degree exceeds n_users - 1");
  }
  if (!(shape_amplitude >= 0.0 && shape_amplitude <= 1.0)) fail("shape_amplitude", "must lie in [0, 1]");
  if (!shapes.empty() && shapes.size() != n_concepts) fail("shapes", "need one shape per concept");
  if (regions.empty()) fail("regions", "need at least one region");
  for (const auto& r : regions) {
    if (r.code.empty()) fail("regions", "empty region code");
    if (!(r.weight > 0.0)) fail("regions", "weights must be positive");
  }
  if (genders.empty()) fail("genders", "need at least one gender");
  if (age_buckets.empty()) fail("age_buckets", "need at least one age bucket");
  if (!(tau > 0.0 && tau <= 1.0)) fail("tau", "must lie in (0, 1]");
  if (noise_concepts + 1 > n_concepts) fail("noise_concepts", "more noise concepts than concepts");
  if (!(noise_max >= 0.0 && noise_max < tau)) fail("noise_max", "must lie in [0, tau)");
  if (start <= 0) fail("start", "must be positive");
}

std::string GenConfig::user_name(std::size_t u) const {
  const auto width = std::to_string(n_users).size();
  auto digits = std::to_string(u + 1);
  return "u" + std::string(width - digits.size(), '0') + digits;
}

ConceptCatalog gen_catalog(std::size_t n_concepts) {
  static const std::vector<std::pair<Category, std::vector<std::string>>> names = {
      {Category::Sports, {"baseball", "basketball", "climbing", "football", "golf", "ski", "soccer", "swimming", "tennis"}},
      {Category::Animals, {"bear", "bird", "bug", "cat", "cow", "crocodile", "deer", "dog", "horse", "spider", "tiger"}},
      {Category::Clothes, {"backpack", "bikini", "boots", "dress", "hat", "heels", "sunglasses", "ties"}},
      {Category::Food, {"avocado", "bagel", "banana", "beer", "blueberry", "icecream", "pizza", "salad", "sushi"}},
      {Category::Furniture, {"bookshelf", "bed", "chair", "kitchen", "table"}},
      {Category::Music, {"accordion", "cello", "flute", "guitar", "piano"}},
      {Category::Plants, {"flower", "grass", "trees", "bush"}},
      {Category::Structures, {"bridge", "house", "chimney", "monument", "skyscraper"}},
      {Category::Places, {"big ben", "colosseum", "eiffel tower", "louvre", "opera house"}},
      {Category::Scenes, {"beach", "closeup", "fireworks", "nature", "night", "selfie", "sky", "sunset", "water"}},
      {Category::Vehicles, {"bicycle", "boat", "bus", "car", "train"}},
  };
  std::vector<ConceptEntry> entries;
  std::vector<std::size_t> used(names.size(), 0);
  for (std::size_t c = 0; c < n_concepts; ++c) {
    const std::size_t cat = c % names.size();
    const auto& [category, list] = names[cat];
    const std::size_t k = used[cat]++;
    std::string name = k < list.size() ? list[k]
                                       : std::string(category_name(category)) + " " + std::to_string(k + 1);
    entries.push_back({static_cast<ConceptId>(c), std::move(name), category});
  }
  return ConceptCatalog(std::move(entries));
}

Network gen_network(const GenConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = cfg.n_users, k = cfg.n_concepts;

  Network net;
  std::vector<ConceptId> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  net.cores.resize(cfg.n_archetypes);
  for (std::size_t a = 0; a < cfg.n_archetypes; ++a) {
    for (std::size_t i = 0; i < cfg.core_size; ++i) {
      net.cores[a].push_back(order[(a * cfg.core_size + i) % k]);
    }
    std::sort(net.cores[a].begin(), net.cores[a].end());
  }

  std::uniform_int_distribution<std::size_t> pick_archetype(0, cfg.n_archetypes - 1);
  std::gamma_distribution<double> gamma(cfg.pref_concentration / static_cast<double>(cfg.core_size), 1.0);
  net.archetype.resize(n);
  net.preferences.assign(n, std::vector<double>(k, 0.0));
  std::vector<double> norm(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    net.archetype[u] = pick_archetype(rng);
    const auto& core = net.cores[net.archetype[u]];
    std::vector<double> g(core.size());
    double total = 0.0;
    for (auto& x : g) total += x = gamma(rng);
    for (std::size_t i = 0; i < core.size(); ++i) net.preferences[u][core[i]] = g[i] / total;
    for (double v : net.preferences[u]) norm[u] += v * v;
    norm[u] = std::sqrt(norm[u]);
  }

  std::uniform_int_distribution<std::size_t> pick_gender(0, cfg.genders.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_age(0, cfg.age_buckets.size() - 1);
  std::vector<double> weights;
  for (const auto& r : cfg.regions) weights.push_back(r.weight);
  std::discrete_distribution<std::size_t> pick_region(weights.begin(), weights.end());
  std::vector<UserProfile> rows;
  std::vector<double> user_h(n, cfg.homophily);
  net.region.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    UserProfile p;
    p.user = cfg.user_name(u);
    p.gender = cfg.genders[pick_gender(rng)];
    p.age_bucket = cfg.age_buckets[pick_age(rng)];
    net.region[u] = cfg.regions[pick_region(rng)].code;
    p.city = net.region[u];
    if (auto it = cfg.homophily_by_age.find(p.age_bucket); it != cfg.homophily_by_age.end()) {
      user_h[u] = it->second;
    }
    rows.push_back(std::move(p));
  }
  net.profiles = ProfileTable(std::move(rows));

  // u's preferences vanish outside its core, so the dot product only needs the core.
  auto weight = [&](std::size_t u, std::size_t v) {
    double dot = 0.0;
    for (auto c : net.cores[net.archetype[u]]) dot += net.preferences[u][c] * net.preferences[v][c];
    const double cosine = dot == 0.0 ? 0.0 : dot / (norm[u] * norm[v]);
    return std::exp(0.5 * (user_h[u] + user_h[v]) * cosine);
  };
  double total = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) total += weight(u, v);
  }
  net.base_edge_probability = total > 0.0 ? cfg.mean_degree * static_cast<double>(n) / 2.0 / total : 0.0;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<UserId, UserId>> named;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = std::min(1.0, net.base_edge_probability * weight(u, v));
      if (unit(rng) < p) {
        net.edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
        named.emplace_back(cfg.user_name(u), cfg.user_name(v));
      }
    }
  }
  std::vector<UserId> all;
  for (std::size_t u = 0; u < n; ++u) all.push_back(cfg.user_name(u));
  net.graph = SocialGraph(named, all);
  return net;
}

double shape_modulation(Shape s, int step, int steps, double amplitude, bool southern,
                        double steps_per_year) {
  const double x = steps > 1 ? static_cast<double>(step) / static_cast<double>(steps - 1) : 0.5;
  switch (s) {
    case Shape::Increasing: return 1.0 - amplitude + 2.0 * amplitude * x;
    case Shape::Decreasing: return 1.0 + amplitude - 2.0 * amplitude * x;
    case Shape::Seasonal: {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(step) / steps_per_year;
      return 1.0 + (southern ? -amplitude : amplitude) * std::sin(phase);
    }
    case Shape::Flat: return 1.0;
  }
  return 1.0;
}

EventStream gen_events(const Network& net, const GenConfig& cfg) {
  cfg.validate();
  const std::size_t n = net.graph.num_users(), k = cfg.n_concepts;
  if (net.preferences.size() != n) throw Error("gen_events: network does not match the config");
  std::mt19937_64 rng(cfg.seed ^ 0x6576656e7473ULL);

  EventStream out;
  out.shapes = cfg.shapes;
  if (out.shapes.empty()) {
    constexpr Shape cycle[] = {Shape::Increasing, Shape::Decreasing, Shape::Seasonal, Shape::Flat};
    for (std::size_t c = 0; c < k; ++c) out.shapes.push_back(cycle[c % 4]);
  }

  std::map<std::string, bool> southern;
  for (const auto& r : cfg.regions) southern[r.code] = r.southern;
  const double steps_per_year = 365.2425 * static_cast<double>(kSecondsPerDay) /
                                static_cast<double>(cfg.step_seconds);
  // mod[(c * 2 + hemisphere) * steps + s]
  std::vector<double> mod(k * 2 * cfg.steps);
  for (std::size_t c = 0; c < k; ++c) {
    for (int h = 0; h < 2; ++h) {
      for (int s = 0; s < cfg.steps; ++s) {
        mod[(c * 2 + h) * cfg.steps + s] =
            shape_modulation(out.shapes[c], s, cfg.steps, cfg.shape_amplitude, h == 1, steps_per_year);
      }
    }
  }
  std::vector<int> hemi(n);
  for (std::size_t u = 0; u < n; ++u) hemi[u] = southern.at(net.region[u]) ? 1 : 0;

  constexpr int kNever = -1000000;
  std::vector<int> last_post(n * k, kNever);
  std::vector<int> exposure(n * k, 0);

  struct Raw {
    Timestamp ts;
    std::uint32_t user;
    ConceptId concept_id;
    Cause cause;
    std::vector<ConceptScore> scores;
  };
  std::vector<Raw> raw;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<Timestamp> offset(0, cfg.step_seconds - 1);
  std::uniform_int_distribution<ConceptId> pick_concept(0, static_cast<ConceptId>(k - 1));
  auto round4 = [](double x) { return std::round(x * 1e4) / 1e4; };

  const bool influence_on = cfg.influence > 0.0 && cfg.influence_scale > 0.0 && cfg.exposure_cap > 0;
  std::vector<std::pair<std::uint32_t, ConceptId>> posted_now;
  for (int s = 0; s < cfg.steps; ++s) {
    if (influence_on) {
      std::fill(exposure.begin(), exposure.end(), 0);
      for (std::uint32_t v = 0; v < n; ++v) {
        for (std::size_t c = 0; c < k; ++c) {
          if (last_post[v * k + c] < s - cfg.exposure_window) continue;
          for (auto u : net.graph.neighbors(v)) ++exposure[u * k + c];
        }
      }
    }
    posted_now.clear();
    for (std::uint32_t u = 0; u < n; ++u) {
      for (std::size_t c = 0; c < k; ++c) {
        const double p_base =
            cfg.base_rate * net.preferences[u][c] * mod[(c * 2 + hemi[u]) * cfg.steps + s];
        double p_inf = 0.0;
        if (influence_on && exposure[u * k + c] > 0) {
          p_inf = cfg.influence_scale * cfg.influence * std::min(exposure[u * k + c], cfg.exposure_cap);
        }
        if (p_base + p_inf <= 0.0) continue;
        const double x = unit(rng);
        if (x >= std::min(1.0, p_base + p_inf)) continue;
        Raw r;
        r.ts = cfg.start + static_cast<Timestamp>(s) * cfg.step_seconds + offset(rng);
        r.user = u;
        r.concept_id = static_cast<ConceptId>(c);
        r.cause = x < p_base ? Cause::Baseline : Cause::Influenced;
        std::uniform_real_distribution<double> hi(cfg.tau, 1.0);
        r.scores.push_back({r.concept_id, round4(hi(rng))});
        while (r.scores.size() < cfg.noise_concepts + 1) {
          const ConceptId q = pick_concept(rng);
          if (std::any_of(r.scores.begin(), r.scores.end(),
                          [&](const ConceptScore& e) { return e.concept_id == q; })) {
            continue;
          }
          const double v = round4(cfg.noise_max * (1.0 - unit(rng)));
          r.scores.push_back({q, v});
        }
        std::sort(r.scores.begin(), r.scores.end(),
                  [](const auto& a, const auto& b) { return a.concept_id < b.concept_id; });
        raw.push_back(std::move(r));
        posted_now.emplace_back(u, static_cast<ConceptId>(c));
      }
    }
    for (const auto& [u, c] : posted_now) last_post[u * k + c] = s;
  }

  std::stable_sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.ts < b.ts; });
  std::vector<PhotoEvent> events;
  events.reserve(raw.size());
  out.causes.reserve(raw.size());
  for (auto& r : raw) {
    events.push_back({net.graph.name(r.user), r.ts, net.region[r.user], std::move(r.scores)});
    out.causes.push_back(r.cause);
    if (r.cause == Cause::Influenced) ++out.influenced;
  }
  out.log = EventLog(std::move(events));
  return out;
}

std::string ground_truth_json(const GenConfig& cfg, const ConceptCatalog& catalog,
                              const Network& net, const EventStream& events) {
  using nlohmann::ordered_json;
  ordered_json j;
  ordered_json c;
  c["n_users"] = cfg.n_users;
  c["n_concepts"] = cfg.n_concepts;
  c["homophily"] = cfg.homophily;
  c["homophily_by_age"] = cfg.homophily_by_age;
  c["influence"] = cfg.influence;
  c["base_rate"] = cfg.base_rate;
  c["steps"] = cfg.steps;
  c["step_seconds"] = cfg.step_seconds;
  c["exposure_window"] = cfg.exposure_window;
  c["exposure_cap"] = cfg.exposure_cap;
  c["influence_scale"] = cfg.influence_scale;
  c["n_archetypes"] = cfg.n_archetypes;
  c["core_size"] = cfg.core_size;
  c["pref_concentration"] = cfg.pref_concentration;
  c["mean_degree"] = cfg.mean_degree;
  c["shape_amplitude"] = cfg.shape_amplitude;
  c["tau"] = cfg.tau;
  c["noise_concepts"] = cfg.noise_concepts;
  c["noise_max"] = cfg.noise_max;
  c["start"] = cfg.start;
  c["seed"] = cfg.seed;
  ordered_json regions = ordered_json::array();
  for (const auto& r : cfg.regions) {
    regions.push_back({{"code", r.code}, {"utc_offset", r.utc_offset}, {"southern", r.southern},
                       {"weight", r.weight}});
  }
  c["regions"] = regions;
  j["config"] = c;

  ordered_json shapes = ordered_json::object();
  for (std::size_t k = 0; k < events.shapes.size(); ++k) {
    shapes[catalog.at(static_cast<ConceptId>(k)).name] = shape_name(events.shapes[k]);
  }
  j["shapes"] = shapes;
  ordered_json cores = ordered_json::array();
  for (const auto& core : net.cores) {
    ordered_json names = ordered_json::array();
    for (auto id : core) names.push_back(catalog.at(id).name);
    cores.push_back(names);
  }
  j["archetype_cores"] = cores;
  ordered_json users = ordered_json::array();
  for (std::uint32_t u = 0; u < net.graph.num_users(); ++u) {
    ordered_json prefs = ordered_json::object();
    for (std::size_t k = 0; k < net.preferences[u].size(); ++k) {
      if (net.preferences[u][k] > 0.0) prefs[catalog.at(static_cast<ConceptId>(k)).name] = net.preferences[u][k];
    }
    users.push_back({{"user", net.graph.name(u)}, {"archetype", net.archetype[u]}, {"preference", prefs}});
  }
  j["users"] = users;
  j["base_edge_probability"] = net.base_edge_probability;
  ordered_json edges = ordered_json::array();
  for (const auto& [a, b] : net.edges) edges.push_back({net.graph.name(a), net.graph.name(b)});
  j["edges"] = edges;
  ordered_json causes = ordered_json::array();
  for (auto cause : events.causes) causes.push_back(cause == Cause::Baseline ? "baseline" : "influenced");
  j["causes"] = causes;
  return j.dump(1) + "\n";
}

Dataset generate(const GenConfig& cfg) {
  Dataset ds;
  ds.catalog = gen_catalog(cfg.n_concepts);
  ds.network = gen_network(cfg);
  ds.events = gen_events(ds.network, cfg);
  return ds;
}

void write_dataset(const std::filesystem::path& dir, const GenConfig& cfg, const Dataset& ds) {
  std::filesystem::create_directories(dir);
  io::save_catalog(dir / "catalog.csv", ds.catalog);
  io::save_events(dir / "events.jsonl", ds.events.log, ds.catalog);
  io::save_graph(dir / "graph.txt", ds.network.graph);
  io::save_profiles(dir / "profiles.csv", ds.network.profiles);
  io::write_file_atomic(dir / "ground_truth.json",
                        ground_truth_json(cfg, ds.catalog, ds.network, ds.events));
}

TrendCorpus gen_trend_corpus(const TrendCorpusConfig& cfg) {
  if (cfg.n_bins < 2) throw Error("trend corpus: need at least 2 bins");
  if (cfg.period < 2) throw Error("trend corpus: seasonal period must be at least 2 bins");
  if (!(cfg.noise >= 0.0)) throw Error("trend corpus: noise must be >= 0");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.noise);

  std::vector<Timestamp> bins;
  Timestamp t = floor_to_month(cfg.start);
  for (std::size_t b = 0; b < cfg.n_bins; ++b) {
    bins.push_back(t);
    t = add_months(t, 1);
  }

  TrendCorpus out;
  ConceptId next = 0;
  for (const auto& [shape, count] : cfg.per_shape) {
    for (std::size_t i = 0; i < count; ++i) {
      trends::TrendSeries s;
      s.concept_id = next++;
      s.granularity = trends::Granularity::Month;
      s.bins = bins;
      s.counts.assign(cfg.n_bins, 1);
      s.values.resize(cfg.n_bins);
      for (std::size_t b = 0; b < cfg.n_bins; ++b) {
        const double x = static_cast<double>(b) / static_cast<double>(cfg.n_bins - 1);
        double base = 0.0;
        switch (shape) {
          case Shape::Increasing: base = -1.0 + 2.0 * x; break;
          case Shape::Decreasing: base = 1.0 - 2.0 * x; break;
          case Shape::Seasonal:
            base = std::sin(2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(cfg.period));
            break;
          case Shape::Flat: base = 0.0; break;
        }
        s.values[b] = base + (cfg.noise > 0.0 ? noise(rng) : 0.0);
      }
      out.series.push_back(trends::normalize_series(std::move(s)));
      out.labels.push_back(shape);
    }
  }
  return out;
}

}  // namespace culture::synth
