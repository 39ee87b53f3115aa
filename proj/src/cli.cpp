#include "culture/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "culture/influence.hpp"
#include "culture/io.hpp"
#include "culture/similarity.hpp"
#include "culture/socialcorr.hpp"
#include "culture/svg.hpp"
#include "culture/synthgen.hpp"
#include "culture/timeutil.hpp"
#include "culture/trends.hpp"

namespace culture::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string num(double v) { return std::isfinite(v) ? io::format_number(v) : "NA"; }

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json test_json(const stat::TestResult& t) {
  return Json{{"statistic", number_or_null(t.statistic)},
              {"p_value", number_or_null(t.p_value)},
              {"dof", number_or_null(t.dof)},
              {"n", t.n1}};
}

Json config_json(const Config& cfg) {
  Json j = Json::object();
  for (const auto& [k, v] : cfg.values()) j[k] = v;
  return j;
}

std::string csv_row(std::initializer_list<std::string> fields) {
  std::string line;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) line += ',';
    line += f;
    first = false;
  }
  return line + "\n";
}

// Shared state for one invocation.
struct Run {
  const Config& cfg;
  fs::path out;
  bool plots = false;
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  double tau = kDefaultTau;

  explicit Run(const Config& c)
      : cfg(c),
        out(c.str("out")),
        plots(c.flag("plots")),
        threads(c.count("threads")),
        seed(static_cast<std::uint64_t>(c.integer("seed"))),
        tau(c.real("tau")) {
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("config key 'tau': must be in (0, 1]");
    fs::create_directories(out);
  }

  void write(const std::string& name, std::string_view contents) const {
    io::write_file_atomic(out / name, contents);
  }
  void write_json(const std::string& name, Json j) const {
    j["config"] = config_json(cfg);
    write(name, j.dump(2) + "\n");
  }
};

struct Inputs {
  ConceptCatalog catalog;
  EventLog log;
  std::optional<SocialGraph> graph;
  std::optional<ProfileTable> profiles;
};

fs::path input_path(const Config& cfg, const std::string& key) {
  if (!cfg.has(key)) throw ConfigError("config key '" + key + "' is required for " + cfg.subcommand());
  fs::path p = cfg.str(key);
  if (!fs::is_regular_file(p)) throw Error(key + ": cannot read '" + p.string() + "'");
  return p;
}

template <typename Fn>
auto load_input(const Config& cfg, const std::string& key, Fn&& fn) {
  const auto path = input_path(cfg, key);
  try {
    return fn(path);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(key + " (" + path.string() + "): " + e.what());
  }
}

Inputs load_inputs(const Config& cfg, bool social, bool profiles) {
  Inputs in;
  in.catalog = load_input(cfg, "catalog", [](const fs::path& p) { return io::load_catalog(p); });
  in.log = load_input(cfg, "events", [&](const fs::path& p) { return io::load_events(p, in.catalog); });
  if (social) in.graph = load_input(cfg, "graph", [](const fs::path& p) { return io::load_graph(p); });
  if (profiles) {
    in.profiles = load_input(cfg, "profiles", [](const fs::path& p) { return io::load_profiles(p); });
    require_profiles(*in.graph, *in.profiles);
  }
  if (in.log.empty()) throw Error("events: the log is empty");
  return in;
}

std::vector<ConceptId> concept_list(const Config& cfg, const std::string& key, const ConceptCatalog& catalog) {
  std::vector<ConceptId> ids;
  if (!cfg.has(key)) {
    for (const auto& e : catalog.entries()) ids.push_back(e.id);
    return ids;
  }
  for (const auto& name : cfg.list(key)) {
    const auto id = catalog.find(name);
    if (!id) throw ConfigError("config key '" + key + "': unknown concept '" + name + "'");
    ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

TimeWindow window_from(const Config& cfg, const std::string& start_key, const std::string& end_key,
                       TimeWindow fallback) {
  TimeWindow w = fallback;
  if (cfg.has(start_key)) w.begin = cfg.time(start_key);
  if (cfg.has(end_key)) w.end = cfg.time(end_key);
  if (w.empty()) throw ConfigError("config keys '" + start_key + "'/'" + end_key + "': empty window");
  return w;
}

std::pair<std::string, std::string> split_last(const std::string& item, char sep, const std::string& key) {
  const auto pos = item.rfind(sep);
  if (pos == std::string::npos || pos == 0 || pos + 1 == item.size()) {
    throw ConfigError("config key '" + key + "': malformed entry '" + item + "'");
  }
  return {item.substr(0, pos), item.substr(pos + 1)};
}

double parse_real(const std::string& text, const std::string& key) {
  return Config("", {{key, text}}).real(key);
}

// ---------------------------------------------------------------------------

Json run_synth(const Run& run, std::string& line) {
  const auto& cfg = run.cfg;
  synth::GenConfig g;
  g.n_users = cfg.count("n_users");
  g.n_concepts = cfg.count("n_concepts");
  g.homophily = cfg.real("homophily");
  for (const auto& item : cfg.list("homophily_by_age")) {
    const auto [bucket, h] = split_last(item, ':', "homophily_by_age");
    g.homophily_by_age[bucket] = parse_real(h, "homophily_by_age");
  }
  g.influence = cfg.real("influence");
  g.base_rate = cfg.real("base_rate");
  g.steps = static_cast<int>(cfg.integer("steps"));
  g.exposure_window = static_cast<int>(cfg.integer("exposure_window"));
  g.exposure_cap = static_cast<int>(cfg.integer("exposure_cap"));
  g.influence_scale = cfg.real("influence_scale");
  g.n_archetypes = cfg.count("n_archetypes");
  g.core_size = cfg.count("core_size");
  g.pref_concentration = cfg.real("pref_concentration");
  g.mean_degree = cfg.real("mean_degree");
  g.shape_amplitude = cfg.real("shape_amplitude");
  g.start = cfg.time("start");
  g.tau = run.tau;
  g.seed = run.seed;
  try {
    g.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto ds = synth::generate(g);
  synth::write_dataset(run.out, g, ds);
  line = "synth: " + std::to_string(ds.network.graph.num_users()) + " users, " +
         std::to_string(ds.network.graph.num_edges()) + " edges, " + std::to_string(ds.events.log.size()) +
         " events (" + std::to_string(ds.events.influenced) + " influenced) -> " + run.out.string();
  return Json{{"users", ds.network.graph.num_users()},
              {"edges", ds.network.graph.num_edges()},
              {"events", ds.events.log.size()},
              {"influenced_events", ds.events.influenced}};
}

// ---------------------------------------------------------------------------

Json run_trends(const Run& run, const Inputs& in, std::string& line) {
  const auto& cfg = run.cfg;
  const auto g = [&] {
    try {
      return trends::parse_granularity(cfg.str("granularity"));
    } catch (const Error& e) {
      throw ConfigError(std::string("config key 'granularity': ") + e.what());
    }
  }();
  const auto period = window_from(cfg, "period_start", "period_end", in.log.span_window());
  const auto concepts = concept_list(cfg, "concepts", in.catalog);
  const auto k = cfg.count("k");

  std::vector<trends::RegionFilter> filters = {trends::RegionFilter::global()};
  const auto regions = cfg.str("regions") == "all" ? in.log.regions() : cfg.list("regions");
  for (const auto& r : regions) {
    if (!in.log.has_region(r)) throw ConfigError("config key 'regions': no events in region '" + r + "'");
    filters.push_back(trends::RegionFilter::single(r));
  }

  std::vector<trends::TrendSeries> raw, normalized;
  for (ConceptId c : concepts) {
    for (const auto& f : filters) {
      raw.push_back(trends::popularity_series(in.log, c, f, g, period));
      normalized.push_back(trends::normalize_series(raw.back()));
    }
  }

  std::string series_csv = "concept,region,bin_start,value,normalized,count\n";
  for (std::size_t s = 0; s < raw.size(); ++s) {
    const auto& name = in.catalog.at(raw[s].concept_id).name;
    for (std::size_t b = 0; b < raw[s].bins.size(); ++b) {
      series_csv += csv_row({io::csv_field(name), io::csv_field(raw[s].region),
                             format_iso8601(raw[s].bins[b]), num(raw[s].values[b]),
                             num(normalized[s].values[b]), std::to_string(raw[s].counts[b])});
    }
  }
  run.write("trend_series.csv", series_csv);

  if (k == 0 || k > normalized.size()) {
    throw Error("trends: k = " + std::to_string(k) + " needs between 1 and " +
                std::to_string(normalized.size()) + " series");
  }
  const auto clusters = trends::cluster_trends(normalized, k, run.seed, run.threads);
  std::string cluster_csv = "concept,region,cluster,medoid_flag\n";
  for (std::size_t s = 0; s < normalized.size(); ++s) {
    cluster_csv += csv_row({io::csv_field(in.catalog.at(normalized[s].concept_id).name),
                            io::csv_field(normalized[s].region), std::to_string(clusters.cluster[s]),
                            clusters.is_medoid[s] ? "1" : "0"});
  }
  run.write("trend_clusters.csv", cluster_csv);

  Json summary{{"granularity", std::string(trends::granularity_name(g))},
               {"period_start", format_iso8601(period.begin)},
               {"period_end", format_iso8601(period.end)},
               {"series", normalized.size()},
               {"k", k},
               {"cost", clusters.cost}};
  Json cl = Json::array();
  for (std::size_t c = 0; c < clusters.medoid.size(); ++c) {
    const auto& m = normalized[clusters.medoid[c]];
    const auto size = std::count(clusters.cluster.begin(), clusters.cluster.end(), c);
    cl.push_back({{"cluster", c},
                  {"size", size},
                  {"medoid_concept", in.catalog.at(m.concept_id).name},
                  {"medoid_region", m.region}});
  }
  summary["clusters"] = cl;

  if (cfg.has("north") != cfg.has("south")) {
    throw ConfigError("config keys 'north' and 'south' must be given together");
  }
  if (cfg.has("north")) {
    const trends::RegionFilter north{cfg.list("north")}, south{cfg.list("south")};
    std::string csv = "concept,r,p,n,error\n";
    Json rows = Json::array();
    for (ConceptId c : concepts) {
      const auto& name = in.catalog.at(c).name;
      try {
        const auto t = trends::seasonal_opposition(in.log, c, north, south, period);
        csv += csv_row({io::csv_field(name), num(t.statistic), num(t.p_value), std::to_string(t.n1), ""});
        rows.push_back({{"concept", name}, {"r", number_or_null(t.statistic)}, {"p", number_or_null(t.p_value)}});
      } catch (const Error& e) {
        csv += csv_row({io::csv_field(name), "NA", "NA", "0", io::csv_field(e.what())});
        rows.push_back({{"concept", name}, {"error", e.what()}});
      }
    }
    run.write("seasonal_opposition.csv", csv);
    summary["seasonal_opposition"] = rows;
  }

  if (cfg.has("hourly_region")) {
    trends::UtcOffsetTable offsets;
    for (const auto& item : cfg.list("utc_offsets")) {
      const auto [region, hours] = split_last(item, ':', "utc_offsets");
      offsets[region] = static_cast<Timestamp>(std::llround(parse_real(hours, "utc_offsets") * 3600.0));
    }
    const auto region = cfg.str("hourly_region");
    if (!offsets.contains(region)) {
      throw ConfigError("config key 'utc_offsets': no offset for hourly_region '" + region + "'");
    }
    std::string csv = "concept,hour,mean,count\n";
    for (ConceptId c : concepts) {
      const auto p = trends::hourly_profile(in.log, c, region, offsets);
      for (int h = 0; h < 24; ++h) {
        csv += csv_row({io::csv_field(in.catalog.at(c).name), std::to_string(h), num(p.mean[h]),
                        std::to_string(p.counts[h])});
      }
    }
    run.write("hourly_profile.csv", csv);
  }

  if (run.plots) {
    std::vector<svg::Series> lines;
    for (std::size_t c = 0; c < clusters.medoid.size(); ++c) {
      const auto& m = normalized[clusters.medoid[c]];
      svg::Series s{"cluster " + std::to_string(c) + ": " + in.catalog.at(m.concept_id).name + "@" + m.region,
                    {}, m.values};
      for (std::size_t b = 0; b < m.values.size(); ++b) s.x.push_back(static_cast<double>(b));
      lines.push_back(std::move(s));
    }
    run.write("trend_medoids.svg", svg::line_chart("Trend cluster medoids", "bin", "normalized popularity", lines));
  }

  line = "trends: " + std::to_string(normalized.size()) + " series in " + std::to_string(k) +
         " clusters, DTW cost " + num(clusters.cost);
  return summary;
}

// ---------------------------------------------------------------------------

struct Period {
  std::string label;
  TimeWindow window;
};

std::vector<Period> parse_periods(const Config& cfg, TimeWindow span) {
  std::vector<Period> out;
  if (!cfg.has("periods")) return {{"all", span}};
  for (const auto& item : cfg.list("periods")) {
    const auto eq = item.find('=');
    const auto slash = item.find('/', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || eq == 0 || slash == std::string::npos) {
      throw ConfigError("config key 'periods': expected label=start/end, got '" + item + "'");
    }
    Config one("", {{"periods", ""}, {"a", item.substr(eq + 1, slash - eq - 1)}, {"b", item.substr(slash + 1)}});
    Period p{item.substr(0, eq), {one.time("a"), one.time("b")}};
    if (p.window.empty()) throw ConfigError("config key 'periods': empty period '" + p.label + "'");
    out.push_back(p);
  }
  return out;
}

Json run_similarity(const Run& run, const Inputs& in, std::string& line) {
  const auto& cfg = run.cfg;
  const auto periods = parse_periods(cfg, in.log.span_window());
  const auto conv = [&] {
    try {
      return similarity::parse_distance_conversion(cfg.str("distance"));
    } catch (const Error& e) {
      throw ConfigError(std::string("config key 'distance': ") + e.what());
    }
  }();
  std::vector<similarity::RegionVectorSet> sets;
  for (const auto& p : periods) {
    sets.push_back(similarity::region_vectors(in.log, in.catalog.size(), p.window, p.label, cfg.count("min_photos")));
  }
  const auto m = similarity::similarity_matrix(sets);
  const std::size_t n = m.regions.size();
  auto item_label = [&](std::size_t i) {
    return periods.size() > 1 ? m.regions[i] + "@" + m.periods[i] : m.regions[i];
  };

  std::string csv = "item";
  for (std::size_t i = 0; i < n; ++i) csv += "," + io::csv_field(item_label(i));
  csv += "\n";
  double off_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    csv += io::csv_field(item_label(i));
    for (std::size_t j = 0; j < n; ++j) {
      csv += "," + num(m.values(i, j));
      if (j > i) off_sum += m.values(i, j);
    }
    csv += "\n";
  }
  run.write("similarity_matrix.csv", csv);

  Json summary{{"items", n}};
  Json excluded = Json::object();
  for (const auto& s : sets) excluded[s.period_label] = s.excluded;
  summary["excluded_regions"] = excluded;
  const double mean_off = n > 1 ? off_sum / (static_cast<double>(n) * (n - 1) / 2.0) : 1.0;
  summary["mean_off_diagonal_similarity"] = mean_off;

  stat::TsneOptions topts;
  topts.perplexity = cfg.real("perplexity");
  topts.iterations = static_cast<int>(cfg.integer("tsne_iterations"));
  topts.seed = run.seed;
  if (!(topts.perplexity > 0.0) || topts.perplexity >= static_cast<double>(n)) {
    throw Error("similarity: perplexity " + num(topts.perplexity) + " needs more than " +
                std::to_string(static_cast<std::size_t>(topts.perplexity)) + " items, have " + std::to_string(n));
  }
  const auto points = similarity::embed_regions(m, topts, conv);
  std::string emb = "region,period,x,y\n";
  for (const auto& p : points) {
    emb += csv_row({io::csv_field(p.region), io::csv_field(p.period), num(p.x), num(p.y)});
  }
  run.write("embedding.csv", emb);

  if (cfg.has("attributes")) {
    const auto attrs = load_input(cfg, "attributes", [](const fs::path& p) {
      return similarity::AttributeTable::load(p);
    });
    std::string acsv = "period,attribute,r,p,n_pairs,error\n";
    Json rows = Json::array();
    for (const auto& s : sets) {
      for (const auto& a : similarity::attribute_correlation(similarity::similarity_matrix(s), attrs)) {
        acsv += csv_row({io::csv_field(s.period_label), io::csv_field(a.attribute),
                         a.result ? num(a.result->statistic) : "NA", a.result ? num(a.result->p_value) : "NA",
                         std::to_string(a.n_pairs), io::csv_field(a.error)});
        Json row{{"period", s.period_label}, {"attribute", a.attribute}, {"n_pairs", a.n_pairs}};
        if (a.result) {
          row["r"] = number_or_null(a.result->statistic);
          row["p"] = number_or_null(a.result->p_value);
        } else {
          row["error"] = a.error;
        }
        rows.push_back(row);
      }
    }
    run.write("attribute_correlation.csv", acsv);
    summary["attribute_correlation"] = rows;
  }

  if (run.plots) {
    std::vector<svg::Point> pts;
    for (const auto& p : points) {
      const auto it = std::find_if(periods.begin(), periods.end(), [&](const Period& q) { return q.label == p.period; });
      pts.push_back({periods.size() > 1 ? p.region + "@" + p.period : p.region, p.x, p.y,
                     static_cast<int>(it - periods.begin())});
    }
    run.write("embedding.svg", svg::scatter("Region map (t-SNE)", "x", "y", pts));
  }

  line = "similarity: " + std::to_string(n) + " items over " + std::to_string(periods.size()) +
         " period(s), mean off-diagonal similarity " + num(mean_off);
  return summary;
}

// ---------------------------------------------------------------------------

std::vector<std::string> report_fields(const socialcorr::CorrelationReport& r) {
  if (r.insufficient) return {"NA", "NA", "NA", std::to_string(r.n_triples)};
  return {num(r.d_corr), num(r.test.statistic), num(r.test.p_value), std::to_string(r.n_triples)};
}

Json report_json(const socialcorr::CorrelationReport& r) {
  Json j{{"category", r.category}};
  if (!r.stratum.empty()) j["stratum"] = r.stratum;
  j["n"] = r.n_triples;
  j["dropped"] = r.n_dropped;
  if (r.insufficient) {
    j["insufficient"] = true;
  } else {
    j["D_corr"] = r.d_corr;
    j["t"] = number_or_null(r.test.statistic);
    j["p"] = number_or_null(r.test.p_value);
  }
  return j;
}

Json run_corr(const Run& run, const Inputs& in, std::string& line) {
  const auto& cfg = run.cfg;
  const auto window = window_from(cfg, "window_start", "window_end", in.log.span_window());
  const auto orient_name = cfg.str("orientation");
  if (orient_name != "random" && orient_name != "both") {
    throw ConfigError("config key 'orientation': expected random or both, got '" + orient_name + "'");
  }
  const auto orientation = orient_name == "both" ? socialcorr::Orientation::Both : socialcorr::Orientation::Random;
  const auto sample = socialcorr::sample_triples(*in.graph, *in.profiles, run.seed, cfg.count("max_per_edge"), orientation);
  const socialcorr::UserVectors vectors(in.log, in.catalog, window);

  const auto all = socialcorr::social_correlation(sample.triples, vectors, std::nullopt, run.threads);
  const auto by_cat = socialcorr::correlation_by_category(sample.triples, vectors, run.threads);

  std::string csv = "category,D_corr,t,p,n\n";
  auto add = [&](const socialcorr::CorrelationReport& r) {
    const auto f = report_fields(r);
    csv += csv_row({io::csv_field(r.category), f[0], f[1], f[2], f[3]});
  };
  add(all);
  for (const auto& r : by_cat) add(r);
  run.write("dcorr_by_category.csv", csv);

  const auto breakdown = socialcorr::demographic_breakdown(sample.triples, vectors, *in.profiles, run.threads);
  auto strata_csv = [&](const std::vector<socialcorr::CorrelationReport>& rows, const std::string& col) {
    std::string s = col + ",category,D_corr,t,p,n\n";
    for (const auto& r : rows) {
      const auto f = report_fields(r);
      s += csv_row({io::csv_field(r.stratum), io::csv_field(r.category), f[0], f[1], f[2], f[3]});
    }
    return s;
  };
  run.write("dcorr_by_age.csv", strata_csv(breakdown.by_age, "age_bucket"));
  run.write("dcorr_by_gender.csv", strata_csv(breakdown.by_gender, "gender_pair"));

  Json summary{{"triples", sample.triples.size()},
               {"skipped_edges", sample.skipped_edges},
               {"window_start", format_iso8601(window.begin)},
               {"window_end", format_iso8601(window.end)},
               {"all", report_json(all)}};
  Json cats = Json::array();
  for (const auto& r : by_cat) cats.push_back(report_json(r));
  summary["by_category"] = cats;

  const auto hist_concepts = cfg.has("hist_concepts") ? concept_list(cfg, "hist_concepts", in.catalog)
                                                      : std::vector<ConceptId>{};
  if (!hist_concepts.empty()) {
    std::string hcsv = "concept,bin_lo,bin_hi,count\n";
    Json hs = Json::array();
    for (ConceptId c : hist_concepts) {
      const auto& name = in.catalog.at(c).name;
      const auto h = socialcorr::concept_diff_histogram(sample.triples, vectors, c, cfg.count("hist_bins"));
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        hcsv += csv_row({io::csv_field(name), num(h.edges[b]), num(h.edges[b + 1]), std::to_string(h.counts[b])});
      }
      Json hj{{"concept", name}, {"n", h.n}, {"mean", h.mean}, {"se", number_or_null(h.se)}};
      if (h.test) hj["test"] = test_json(*h.test);
      hs.push_back(hj);
      if (run.plots && !h.empty) {
        std::vector<std::string> labels;
        std::vector<double> values;
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
          labels.push_back(num(std::round(50.0 * (h.edges[b] + h.edges[b + 1])) / 100.0));
          values.push_back(static_cast<double>(h.counts[b]));
        }
        run.write("hist_" + std::to_string(c) + ".svg",
                  svg::bar_chart("x_j - x_k for " + name, "triples", labels, values));
      }
    }
    run.write("concept_histograms.csv", hcsv);
    summary["histograms"] = hs;
  }

  if (run.plots) {
    std::vector<std::string> labels;
    std::vector<double> values;
    for (const auto& r : by_cat) {
      if (r.insufficient) continue;
      labels.push_back(r.category);
      values.push_back(r.d_corr);
    }
    run.write("dcorr_by_category.svg", svg::bar_chart("D_corr by category", "D_corr", labels, values));
  }

  line = "corr: D_corr=" + num(all.d_corr) + " t=" + num(all.test.statistic) + " p=" + num(all.test.p_value) +
         " over " + std::to_string(all.n_triples) + " triples";
  return summary;
}

// ---------------------------------------------------------------------------

std::vector<double> ecdf_y(std::size_t n) {
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(i + 1) / static_cast<double>(n);
  return y;
}

Json run_shuffle(const Run& run, const Inputs& in, std::string& line) {
  const auto& cfg = run.cfg;
  influence::ShuffleOptions opts;
  opts.tau = run.tau;
  const auto step_days = cfg.integer("step_days");
  if (step_days <= 0) throw ConfigError("config key 'step_days': must be positive");
  opts.step = step_days * kSecondsPerDay;
  if (const auto r = cfg.integer("recency_steps"); r > 0) {
    opts.recency_window = static_cast<int>(r);
  } else if (r < 0) {
    throw ConfigError("config key 'recency_steps': must be >= 0");
  }
  opts.permutations = static_cast<int>(cfg.integer("permutations"));
  if (opts.permutations < 1) throw ConfigError("config key 'permutations': must be >= 1");
  opts.min_adopters = cfg.count("min_adopters");
  opts.paired = cfg.flag("paired");
  opts.seed = run.seed;
  opts.threads = run.threads;
  const auto concepts = concept_list(cfg, "concepts", in.catalog);
  const auto r = influence::shuffle_test(in.log, *in.graph, concepts, opts);

  std::string csv = "concept,alpha_shuffled,alpha_original,difference\n";
  for (const auto& c : r.concepts) {
    csv += csv_row({io::csv_field(in.catalog.at(c.concept_id).name), num(c.alpha_shuffled), num(c.alpha_original),
                    num(c.difference)});
  }
  run.write("shuffle_per_concept.csv", csv);

  auto names = [&](const std::vector<ConceptId>& ids) {
    Json a = Json::array();
    for (auto id : ids) a.push_back(in.catalog.at(id).name);
    return a;
  };
  Json summary{{"concepts", r.concepts.size()},
               {"mean_alpha_original", r.mean_original},
               {"sd_alpha_original", number_or_null(r.sd_original)},
               {"mean_alpha_shuffled", r.mean_shuffled},
               {"sd_alpha_shuffled", number_or_null(r.sd_shuffled)},
               {"mean_difference", r.mean_difference},
               {"se_difference", number_or_null(r.se_difference)},
               {"test", r.test ? test_json(*r.test) : Json(nullptr)},
               {"below_floor", names(r.below_floor)},
               {"not_converged", names(r.not_converged)}};

  if (run.plots && !r.concepts.empty()) {
    std::vector<svg::Point> pts;
    std::vector<double> orig, shuf;
    for (const auto& c : r.concepts) {
      pts.push_back({in.catalog.at(c.concept_id).name, c.alpha_shuffled, c.alpha_original, 0});
      orig.push_back(c.alpha_original);
      shuf.push_back(c.alpha_shuffled);
    }
    run.write("shuffle_alpha.svg", svg::scatter("Shuffle test", "alpha (shuffled)", "alpha (original)", pts, true));
    std::sort(orig.begin(), orig.end());
    std::sort(shuf.begin(), shuf.end());
    run.write("shuffle_cdf.svg", svg::line_chart("CDF of alpha", "alpha", "fraction of concepts",
                                                 {{"original", orig, ecdf_y(orig.size())},
                                                  {"shuffled", shuf, ecdf_y(shuf.size())}}));
  }

  line = "shuffle: mean alpha difference=" + num(r.mean_difference) +
         (r.test ? " t=" + num(r.test->statistic) + " p=" + num(r.test->p_value) : std::string(" p=NA")) +
         " over " + std::to_string(r.concepts.size()) + " concepts";
  return summary;
}

// ---------------------------------------------------------------------------

Json run_pme(const Run& run, const Inputs& in, std::string& line) {
  const auto& cfg = run.cfg;
  influence::PmeOptions opts;
  opts.split = cfg.has("split") ? cfg.time("split") : in.log.span_window().begin + 52 * kSecondsPerWeek;
  const auto pre_weeks = cfg.integer("pre_weeks");
  if (pre_weeks <= 0) throw ConfigError("config key 'pre_weeks': must be positive");
  opts.pre_length = pre_weeks * kSecondsPerWeek;
  opts.post_window = window_from(cfg, "post_start", "post_end",
                                 {opts.split + 26 * kSecondsPerWeek, opts.split + 52 * kSecondsPerWeek});
  if (opts.post_window.begin < opts.split) throw ConfigError("config key 'post_start': must not precede split");
  opts.tau = run.tau;
  opts.pool_size = cfg.count("pool_size");
  if (opts.pool_size == 0) throw ConfigError("config key 'pool_size': must be positive");
  try {
    opts.pooling = influence::parse_pooling(cfg.str("pooling"));
  } catch (const Error& e) {
    throw ConfigError(std::string("config key 'pooling': ") + e.what());
  }
  opts.seed = run.seed;
  opts.threads = run.threads;
  const auto r = influence::pme_influence(in.log, *in.graph, *in.profiles, opts);

  std::string ucsv = "user,friends,matched,influence\n";
  for (const auto& u : r.users) {
    ucsv += csv_row({io::csv_field(u.user), std::to_string(u.friends), std::to_string(u.matched), num(u.influence)});
  }
  run.write("pme_per_user.csv", ucsv);
  std::string mcsv = "user,friend,match,jaccard,size_gap\n";
  for (const auto& m : r.matches) {
    mcsv += csv_row({io::csv_field(m.user), io::csv_field(m.friend_user), io::csv_field(m.match), num(m.jaccard),
                     num(m.size_gap)});
  }
  run.write("pme_matches.csv", mcsv);

  Json summary{{"influence", r.mean},
               {"std", number_or_null(r.sd)},
               {"t-stat", number_or_null(r.test.statistic)},
               {"p-value", number_or_null(r.test.p_value)},
               {"users", r.users.size()},
               {"split", format_iso8601(opts.split)},
               {"pre_start", format_iso8601(opts.split - opts.pre_length)},
               {"post_start", format_iso8601(opts.post_window.begin)},
               {"post_end", format_iso8601(opts.post_window.end)},
               {"pooling", std::string(influence::pooling_name(opts.pooling))},
               {"diagnostics",
                {{"pairs_considered", r.pairs_considered},
                 {"matched_pairs", r.matches.size()},
                 {"match_rate", r.match_rate},
                 {"mean_match_jaccard", r.mean_match_jaccard}}}};

  if (run.plots && !r.users.empty()) {
    std::vector<double> inf;
    for (const auto& u : r.users) inf.push_back(u.influence);
    std::sort(inf.begin(), inf.end());
    run.write("pme_cdf.svg", svg::line_chart("CDF of per-user influence", "Inf(u)", "fraction of users",
                                             {{"Inf", inf, ecdf_y(inf.size())}}));
  }

  line = "pme: influence=" + num(r.mean) + " std=" + num(r.sd) + " t=" + num(r.test.statistic) +
         " p=" + num(r.test.p_value) + " over " + std::to_string(r.users.size()) + " users";
  return summary;
}

// ---------------------------------------------------------------------------

int run_report(const Run& run, const Inputs& in, std::ostream& out, std::ostream& err) {
  using Analysis = Json (*)(const Run&, const Inputs&, std::string&);
  const std::vector<std::pair<std::string, Analysis>> analyses = {
      {"trends", run_trends}, {"similarity", run_similarity}, {"corr", run_corr},
      {"shuffle", run_shuffle}, {"pme", run_pme}};
  Json report = Json::object();
  int status = 0;
  for (const auto& [name, fn] : analyses) {
    std::string line;
    try {
      report[name] = fn(run, in, line);
      out << line << "\n";
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      report[name] = Json{{"error", e.what()}};
      err << "culturediff report: " << name << ": " << e.what() << "\n";
      status = 1;
    }
  }
  run.write_json("report.json", report);
  out << "report: " << (run.out / "report.json").string() << (status ? " (with failures)" : "") << "\n";
  return status;
}

int dispatch(const Config& cfg, std::ostream& out, std::ostream& err) {
  const Run run(cfg);
  const auto& sub = cfg.subcommand();
  std::string line;
  if (sub == "synth") {
    run_synth(run, line);
    out << line << "\n";
    return 0;
  }
  const bool social = sub != "trends" && sub != "similarity";
  const bool profiles = sub == "corr" || sub == "pme" || sub == "report";
  const auto in = load_inputs(cfg, social, profiles);
  if (sub == "report") return run_report(run, in, out, err);
  Json summary;
  if (sub == "trends") summary = run_trends(run, in, line);
  if (sub == "similarity") summary = run_similarity(run, in, line);
  if (sub == "corr") summary = run_corr(run, in, line);
  if (sub == "shuffle") summary = run_shuffle(run, in, line);
  if (sub == "pme") summary = run_pme(run, in, line);
  run.write_json(sub + "_summary.json", summary);
  out << line << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    (args.empty() ? err : out) << help_text("");
    return args.empty() ? 2 : 0;
  }
  const auto& sub = args[0];
  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), sub) == subs.end()) {
    err << "culturediff: unknown subcommand '" << sub << "'\n" << help_text("");
    return 2;
  }
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  if (std::find(rest.begin(), rest.end(), "--help") != rest.end() ||
      std::find(rest.begin(), rest.end(), "-h") != rest.end()) {
    out << help_text(sub);
    return 0;
  }
  try {
    return dispatch(resolve_config(sub, rest), out, err);
  } catch (const ConfigError& e) {
    err << "culturediff " << sub << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "culturediff " << sub << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace culture::cli
