// File formats: JSONL events, whitespace edge lists, profile and catalog CSVs.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "culture/core.hpp"

namespace culture::io {

ConceptCatalog load_catalog(const std::filesystem::path& path);
void save_catalog(const std::filesystem::path& path, const ConceptCatalog& catalog);

// One JSON object per line: {"user","ts","region","scores":{name: score}}.
// Errors name the line number and the offending field.
EventLog load_events(const std::filesystem::path& path, const ConceptCatalog& catalog);
EventLog parse_events(std::string_view text, const ConceptCatalog& catalog);
void save_events(const std::filesystem::path& path, const EventLog& log,
                 const ConceptCatalog& catalog);
std::string format_event(const PhotoEvent& event, const ConceptCatalog& catalog);

SocialGraph load_graph(const std::filesystem::path& path);
SocialGraph parse_graph(std::string_view text);
void save_graph(const std::filesystem::path& path, const SocialGraph& graph);

ProfileTable load_profiles(const std::filesystem::path& path);
void save_profiles(const std::filesystem::path& path, const ProfileTable& profiles);

// Shortest decimal that round-trips the double.
std::string format_number(double v);

// Splits one CSV line; double quotes group fields and "" escapes a quote.
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_field(std::string_view value);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace culture::io
