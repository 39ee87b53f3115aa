#include "culture/io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "culture/timeutil.hpp"

namespace culture::io {

namespace {

using json = nlohmann::json;

std::string line_error(std::size_t line, std::string_view field, std::string_view what) {
  return "line " + std::to_string(line) + ": field '" + std::string(field) + "': " +
         std::string(what);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t") == std::string_view::npos; }

void check_header(std::string_view path_label, std::string_view line,
                  const std::vector<std::string>& expected) {
  const auto fields = split_csv_line(line);
  if (fields != expected) {
    std::string want;
    for (const auto& f : expected) want += (want.empty() ? "" : ",") + f;
    throw Error(std::string(path_label) + ": expected header '" + want + "'");
  }
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// ---------------------------------------------------------------------------
// Catalog

ConceptCatalog load_catalog(const std::filesystem::path& path) {
  const auto text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw Error(path.string() + ": empty catalog file");
  check_header(path.string(), lines[0], {"concept_id", "name", "category"});
  std::vector<ConceptEntry> entries;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 3) throw Error(line_error(i + 1, "concept_id", "expected 3 columns"));
    ConceptEntry e;
    auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), e.id);
    if (ec != std::errc() || ptr != f[0].data() + f[0].size()) {
      throw Error(line_error(i + 1, "concept_id", "not a non-negative integer"));
    }
    e.name = f[1];
    auto cat = parse_category(f[2]);
    if (!cat) throw Error(line_error(i + 1, "category", "unknown category '" + f[2] + "'"));
    e.category = *cat;
    entries.push_back(std::move(e));
  }
  return ConceptCatalog(std::move(entries));
}

void save_catalog(const std::filesystem::path& path, const ConceptCatalog& catalog) {
  std::string out = "concept_id,name,category\n";
  for (const auto& e : catalog.entries()) {
    out += std::to_string(e.id) + "," + csv_field(e.name) + "," +
           std::string(category_name(e.category)) + "\n";
  }
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Events

EventLog parse_events(std::string_view text, const ConceptCatalog& catalog) {
  std::vector<PhotoEvent> events;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (blank(lines[i])) continue;
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::parse_error& ex) {
      throw Error("line " + std::to_string(lineno) + ": malformed JSON: " + ex.what());
    }
    if (!j.is_object()) throw Error("line " + std::to_string(lineno) + ": expected a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (key != "user" && key != "ts" && key != "region" && key != "scores") {
        throw Error(line_error(lineno, key, "unexpected field"));
      }
    }
    PhotoEvent e;
    if (!j.contains("user") || !j["user"].is_string() || j["user"].get<std::string>().empty()) {
      throw Error(line_error(lineno, "user", "missing or not a non-empty string"));
    }
    e.user = j["user"].get<std::string>();
    if (!j.contains("ts") || !j["ts"].is_string()) {
      throw Error(line_error(lineno, "ts", "missing or not an ISO-8601 string"));
    }
    try {
      e.ts = parse_iso8601(j["ts"].get<std::string>());
    } catch (const Error& ex) {
      throw Error(line_error(lineno, "ts", ex.what()));
    }
    if (e.ts <= 0) throw Error(line_error(lineno, "ts", "timestamp must be after the epoch"));
    if (!j.contains("region") || !j["region"].is_string()) {
      throw Error(line_error(lineno, "region", "missing or not a string"));
    }
    e.region = j["region"].get<std::string>();
    if (!j.contains("scores") || !j["scores"].is_object()) {
      throw Error(line_error(lineno, "scores", "missing or not an object"));
    }
    for (const auto& [name, value] : j["scores"].items()) {
      auto id = catalog.find(name);
      if (!id) throw Error(line_error(lineno, "scores", "unknown concept '" + name + "'"));
      if (!value.is_number()) {
        throw Error(line_error(lineno, "scores", "score for '" + name + "' is not a number"));
      }
      const double s = value.get<double>();
      if (!(s >= 0.0 && s <= 1.0)) {
        throw Error(line_error(lineno, "scores",
                               "score " + format_number(s) + " for '" + name + "' outside [0,1]"));
      }
      if (s > 0.0) e.scores.push_back({*id, s});
    }
    std::sort(e.scores.begin(), e.scores.end(),
              [](const ConceptScore& a, const ConceptScore& b) { return a.concept_id < b.concept_id; });
    events.push_back(std::move(e));
  }
  return EventLog(std::move(events));
}

EventLog load_events(const std::filesystem::path& path, const ConceptCatalog& catalog) {
  try {
    return parse_events(read_file(path), catalog);
  } catch (const Error& ex) {
    throw Error(path.string() + ": " + ex.what());
  }
}

std::string format_event(const PhotoEvent& event, const ConceptCatalog& catalog) {
  std::string out = "{\"user\":";
  out += json(event.user).dump();
  out += ",\"ts\":\"" + format_iso8601(event.ts) + "\",\"region\":";
  out += json(event.region).dump();
  out += ",\"scores\":{";
  bool first = true;
  for (const auto& s : event.scores) {
    if (!first) out += ',';
    first = false;
    out += json(catalog.at(s.concept_id).name).dump();
    out += ':';
    out += format_number(s.score);
  }
  out += "}}";
  return out;
}

void save_events(const std::filesystem::path& path, const EventLog& log,
                 const ConceptCatalog& catalog) {
  std::string out;
  out.reserve(log.size() * 96);
  for (const auto& e : log.events()) {
    out += format_event(e, catalog);
    out += '\n';
  }
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Graph

SocialGraph parse_graph(std::string_view text) {
  std::vector<std::pair<UserId, UserId>> edges;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (blank(line) || line.front() == '#') continue;
    std::istringstream ss{std::string(line)};
    std::string a, b, extra;
    if (!(ss >> a >> b) || (ss >> extra)) {
      throw Error("line " + std::to_string(i + 1) + ": expected two user ids");
    }
    if (a == b) throw Error("line " + std::to_string(i + 1) + ": self-loop on user '" + a + "'");
    edges.emplace_back(std::move(a), std::move(b));
  }
  return SocialGraph(edges);
}

SocialGraph load_graph(const std::filesystem::path& path) {
  try {
    return parse_graph(read_file(path));
  } catch (const Error& ex) {
    throw Error(path.string() + ": " + ex.what());
  }
}

void save_graph(const std::filesystem::path& path, const SocialGraph& graph) {
  std::string out;
  for (const auto& [a, b] : graph.edges()) {
    out += graph.name(a) + " " + graph.name(b) + "\n";
  }
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Profiles

ProfileTable load_profiles(const std::filesystem::path& path) {
  const auto text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw Error(path.string() + ": empty profiles file");
  check_header(path.string(), lines[0], {"user", "gender", "age_bucket", "city"});
  std::vector<UserProfile> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    auto f = split_csv_line(lines[i]);
    if (f.size() != 4) {
      throw Error(path.string() + ": " + line_error(i + 1, "user", "expected 4 columns"));
    }
    if (f[0].empty()) throw Error(path.string() + ": " + line_error(i + 1, "user", "empty"));
    rows.push_back({std::move(f[0]), std::move(f[1]), std::move(f[2]), std::move(f[3])});
  }
  try {
    return ProfileTable(std::move(rows));
  } catch (const Error& ex) {
    throw Error(path.string() + ": " + ex.what());
  }
}

void save_profiles(const std::filesystem::path& path, const ProfileTable& profiles) {
  std::string out = "user,gender,age_bucket,city\n";
  for (const auto& p : profiles.rows()) {
    out += csv_field(p.user) + "," + csv_field(p.gender) + "," + csv_field(p.age_bucket) + "," +
           csv_field(p.city) + "\n";
  }
  write_file_atomic(path, out);
}

}  // namespace culture::io
