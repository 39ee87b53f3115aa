#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <set>

#include "culture/cli.hpp"
#include "culture/io.hpp"
#include "culture/timeutil.hpp"

namespace culture::cli {

namespace {

const std::vector<KeySpec> kInputKeys = {
    {"events", "", "JSONL event log"},
    {"catalog", "", "concept catalog CSV (concept_id,name,category)"},
    {"graph", "", "friendship edge list, one 'user user' pair per line"},
    {"profiles", "", "profile CSV (user,gender,age_bucket,city)"},
};

const std::vector<KeySpec> kBaseKeys = {
    {"out", "out", "output directory"},
    {"seed", "0", "random seed"},
    {"tau", "0.5", "concept score threshold"},
    {"threads", "1", "worker threads (0 = all cores); results do not depend on it"},
    {"plots", "false", "also write SVG charts"},
};

const std::vector<KeySpec> kSynthKeys = {
    {"n_users", "2000", "number of users"},
    {"n_concepts", "50", "number of concepts"},
    {"homophily", "0", "homophily strength h"},
    {"homophily_by_age", "", "per age bucket h, e.g. 18-29:5,30-49:1"},
    {"influence", "0", "influence rate lambda"},
    {"base_rate", "1", "expected baseline posts per user per step"},
    {"steps", "104", "number of weekly steps"},
    {"exposure_window", "4", "influence exposure window w (steps)"},
    {"exposure_cap", "5", "cap on exposed friends per concept"},
    {"influence_scale", "0.003", "hazard added per exposed friend at lambda = 1"},
    {"n_archetypes", "10", "number of preference archetypes"},
    {"core_size", "5", "concepts per archetype core"},
    {"pref_concentration", "2000", "Dirichlet concentration over a core"},
    {"mean_degree", "10", "target mean friend count"},
    {"shape_amplitude", "0.3", "trend shape modulation amplitude"},
    {"start", "2014-01-06", "first step start (UTC)"},
};

const std::vector<KeySpec> kTrendKeys = {
    {"concepts", "", "concept names (default: all)"},
    {"regions", "", "region codes to add beside the global series, or 'all'"},
    {"granularity", "month", "hour, day or month"},
    {"k", "7", "number of trend clusters"},
    {"period_start", "", "analysis period start (default: first event)"},
    {"period_end", "", "analysis period end, exclusive (default: after last event)"},
    {"north", "", "northern hemisphere region codes for seasonal opposition"},
    {"south", "", "southern hemisphere region codes for seasonal opposition"},
    {"utc_offsets", "", "region UTC offsets in hours, e.g. US:-5,JP:9"},
    {"hourly_region", "", "region for hour-of-day profiles"},
};

const std::vector<KeySpec> kSimilarityKeys = {
    {"periods", "", "label=start/end list (default: one period over all events)"},
    {"min_photos", "1000", "minimum events per region and period"},
    {"perplexity", "5", "t-SNE perplexity"},
    {"tsne_iterations", "1000", "t-SNE iterations"},
    {"distance", "one_minus_cosine", "one_minus_cosine or angular"},
    {"attributes", "", "pair attribute CSV (region_a,region_b,<attribute>...)"},
};

const std::vector<KeySpec> kCorrKeys = {
    {"window_start", "", "window start (default: first event)"},
    {"window_end", "", "window end, exclusive (default: after last event)"},
    {"max_per_edge", "1", "non-friends sampled per oriented edge"},
    {"orientation", "random", "random (one orientation per edge) or both"},
    {"hist_concepts", "", "concepts for friend/non-friend difference histograms"},
    {"hist_bins", "20", "histogram bins"},
};

const std::vector<KeySpec> kShuffleKeys = {
    {"concepts", "", "concept names (default: all)"},
    {"step_days", "7", "panel step length in days"},
    {"recency_steps", "0", "count only friends active in the last W steps (0 = all past)"},
    {"permutations", "1", "timestamp permutations per concept"},
    {"min_adopters", "50", "minimum in-panel activators per concept"},
    {"paired", "true", "paired t-test across concepts (false: Welch)"},
};

const std::vector<KeySpec> kPmeKeys = {
    {"split", "", "split time t (default: first event + 52 weeks)"},
    {"pre_weeks", "26", "length of the preference window before t"},
    {"post_start", "", "post window start (default: t + 26 weeks)"},
    {"post_end", "", "post window end (default: t + 52 weeks)"},
    {"pool_size", "10000", "candidate pool size per user"},
    {"pooling", "multiset", "union or multiset pooling of matched sets"},
};

std::vector<KeySpec> concat(std::initializer_list<const std::vector<KeySpec>*> parts) {
  std::vector<KeySpec> out;
  std::set<std::string> seen;
  for (const auto* p : parts) {
    for (const auto& k : *p) {
      if (seen.insert(k.name).second) out.push_back(k);
    }
  }
  return out;
}

const std::map<std::string, std::vector<KeySpec>, std::less<>>& key_table() {
  static const std::map<std::string, std::vector<KeySpec>, std::less<>> table = {
      {"synth", concat({&kBaseKeys, &kSynthKeys})},
      {"trends", concat({&kInputKeys, &kBaseKeys, &kTrendKeys})},
      {"similarity", concat({&kInputKeys, &kBaseKeys, &kSimilarityKeys})},
      {"corr", concat({&kInputKeys, &kBaseKeys, &kCorrKeys})},
      {"shuffle", concat({&kInputKeys, &kBaseKeys, &kShuffleKeys})},
      {"pme", concat({&kInputKeys, &kBaseKeys, &kPmeKeys})},
      {"report", concat({&kInputKeys, &kBaseKeys, &kTrendKeys, &kSimilarityKeys, &kCorrKeys,
                         &kShuffleKeys, &kPmeKeys})},
  };
  return table;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"synth", "trends", "similarity", "corr",
                                                 "shuffle", "pme", "report"};
  return names;
}

const std::vector<KeySpec>& keys_for(std::string_view subcommand) {
  const auto it = key_table().find(subcommand);
  if (it == key_table().end()) throw ConfigError("unknown subcommand '" + std::string(subcommand) + "'");
  return it->second;
}

bool Config::has(const std::string& key) const {
  const auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

std::string Config::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config key '" + key + "' is not defined for " + subcommand_);
  return it->second;
}

double Config::real(const std::string& key) const {
  const auto s = str(key);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + s + "'");
  }
  return v;
}

long long Config::integer(const std::string& key) const {
  const auto s = str(key);
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + s + "'");
  }
  return v;
}

std::size_t Config::count(const std::string& key) const {
  const auto v = integer(key);
  if (v < 0) throw ConfigError("config key '" + key + "': must be >= 0");
  return static_cast<std::size_t>(v);
}

bool Config::flag(const std::string& key) const {
  const auto s = str(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + s + "'");
}

std::vector<std::string> Config::list(const std::string& key) const {
  std::vector<std::string> out;
  const auto s = str(key);
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    auto item = trim(std::string_view(s).substr(pos, comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = comma + 1;
  }
  return out;
}

Timestamp Config::time(const std::string& key) const {
  try {
    return parse_iso8601(str(key));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

std::map<std::string, std::string> parse_config_text(std::string_view text, const std::string& origin) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ": line " + std::to_string(line_no) + ": expected key = value");
    }
    auto key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ": line " + std::to_string(line_no) + ": empty key");
    out[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

Config resolve_config(const std::string& subcommand, const std::vector<std::string>& args) {
  const auto& specs = keys_for(subcommand);
  std::map<std::string, std::string> values;
  for (const auto& k : specs) values[k.name] = k.default_value;
  auto accept = [&](const std::string& key, const std::string& value, const std::string& origin) {
    if (!values.contains(key)) {
      throw ConfigError("unknown config key '" + key + "' for " + subcommand + " (" + origin +
                        "); see 'culturediff " + subcommand + " --help'");
    }
    values[key] = value;
  };

  std::vector<std::pair<std::string, std::string>> overrides;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + a + "'");
    std::string key = a.substr(2), value;
    bool has_value = false;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
      has_value = true;
    }
    if (key == "plots" && !has_value) {
      overrides.emplace_back("plots", "true");
      continue;
    }
    if (!has_value) {
      if (i + 1 >= args.size()) throw ConfigError("option '--" + key + "' needs a value");
      value = args[++i];
    }
    if (key == "config") {
      config_path = value;
    } else {
      overrides.emplace_back(key, value);
    }
  }
  if (!config_path.empty()) {
    if (!std::filesystem::exists(config_path)) {
      throw ConfigError("config file '" + config_path + "' does not exist");
    }
    for (const auto& [k, v] : parse_config_text(io::read_file(config_path), config_path)) {
      accept(k, v, config_path);
    }
  }
  for (const auto& [k, v] : overrides) accept(k, v, "command line");
  return Config(subcommand, std::move(values));
}

std::string help_text(std::string_view subcommand) {
  std::string out;
  if (subcommand.empty()) {
    out += "usage: culturediff <subcommand> [--config PATH] [--key value ...] [--plots]\n\n";
    out += "subcommands:\n";
    out += "  synth       generate a synthetic dataset with planted homophily and influence\n";
    out += "  trends      popularity series, DTW trend clusters, seasonal and hourly profiles\n";
    out += "  similarity  region similarity matrix, t-SNE map, attribute correlations\n";
    out += "  corr        friend vs non-friend social correlation (D_corr)\n";
    out += "  shuffle     Shuffle test for influence\n";
    out += "  pme         preference-matched estimation of influence\n";
    out += "  report      run every analysis and write report.json\n\n";
    out += "Run 'culturediff <subcommand> --help' for its config keys.\n";
    return out;
  }
  out += "usage: culturediff " + std::string(subcommand) +
         " [--config PATH] [--key value ...] [--plots]\n\n";
  out += "Config file: one 'key = value' per line, '#' comments. Command-line\n";
  out += "'--key value' overrides the file.\n\nkeys:\n";
  for (const auto& k : keys_for(subcommand)) {
    std::string left = "  " + k.name;
    if (left.size() < 22) left.resize(22, ' ');
    out += left + " " + k.help;
    if (!k.default_value.empty()) out += " [default: " + k.default_value + "]";
    out += "\n";
  }
  return out;
}

}  // namespace culture::cli
