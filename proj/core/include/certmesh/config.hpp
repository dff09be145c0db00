#pragma once

#include <stdexcept>
#include <string>

#include "certmesh/scenario.hpp"

namespace certmesh {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  explicit ConfigError(const std::string& what) : std::runtime_error(what), line_(0) {}
  int line() const { return line_; }

 private:
  int line_;
};

// key=value per line, '#' starts a comment, unknown keys rejected, missing
// keys keep their defaults.
ScenarioConfig parse_config_text(const std::string& text, const std::string& source_name);

ScenarioConfig parse_config(const std::string& path);

// Applies one key=value pair (shared by the file parser and CLI overrides).
void apply_config_value(ScenarioConfig& cfg, const std::string& key, const std::string& value);

}  // namespace certmesh
