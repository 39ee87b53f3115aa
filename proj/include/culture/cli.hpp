// culturediff command-line driver.
#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "culture/core.hpp"

namespace culture::cli {

// Usage and configuration problems; the driver exits with status 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct KeySpec {
  std::string name;
  std::string default_value;
  std::string help;
};

// Accepted keys for a subcommand, common keys first.
const std::vector<KeySpec>& keys_for(std::string_view subcommand);
const std::vector<std::string>& subcommands();

// Resolved flat key=value settings for one run.
class Config {
 public:
  Config(std::string subcommand, std::map<std::string, std::string> values)
      : subcommand_(std::move(subcommand)), values_(std::move(values)) {}

  const std::string& subcommand() const { return subcommand_; }
  const std::map<std::string, std::string>& values() const { return values_; }

  bool has(const std::string& key) const;  // set to a non-empty value
  std::string str(const std::string& key) const;
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;  // non-negative integer
  bool flag(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;  // comma separated
  Timestamp time(const std::string& key) const;                 // ISO-8601 date or datetime

 private:
  std::string subcommand_;
  std::map<std::string, std::string> values_;
};

// Parses `key = value` lines; '#' starts a comment.
std::map<std::string, std::string> parse_config_text(std::string_view text, const std::string& origin);

// Builds the resolved config from the arguments after the subcommand:
// defaults, then --config file, then --key value overrides.
Config resolve_config(const std::string& subcommand, const std::vector<std::string>& args);

std::string help_text(std::string_view subcommand);

// Runs one invocation (argv without the program name). Returns the exit
// status: 0 success, 1 runtime failure, 2 usage or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace culture::cli
