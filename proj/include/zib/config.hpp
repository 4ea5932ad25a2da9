#pragma once

#include <stdexcept>
#include <string>

#include "zib/harness.hpp"

namespace zib {

// Config parse/validation failure with the offending line (0 = file level).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                    : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Line-oriented `key = value` text with [section] headers. Sections:
// [experiment], [env], one or more [policy] blocks, plus [bounds] /
// [coverage] for those experiment kinds. '#' starts a comment. Unknown
// sections and unknown keys are hard errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical echo of a resolved config (manifest body).
std::string render_manifest(const ExperimentConfig& config);

// "lo:hi:log:count" or "lo:hi:lin:count" -> grid of n values.
std::vector<std::int64_t> parse_n_grid(const std::string& spec);

}  // namespace zib
