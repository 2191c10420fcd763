#pragma once

// Flat "key = value" run configuration shared by the command-line tool.

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaussify/measures.hpp"
#include "gaussify/protocol.hpp"

namespace gfy {

/// Raised for malformed or out-of-range configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct EtaSweep {
  double start = 0.1;
  double stop = 1.0;
  int count = 10;

  /// Parses "start:stop:count"; every value must lie in [0, 1].
  static EtaSweep parse(const std::string& text);
  std::vector<double> values() const;
};

struct RunSettings {
  ProtocolConfig protocol;
  std::optional<std::string> out;
  std::optional<EtaSweep> sweep;
  std::optional<GridSpec> grid;
  std::vector<int> wigner_steps{0, 1, 2};
  std::vector<int> sweep_steps{1, 10};
  int jobs = 1;
  double squeezing = 0.4;   // gaussian-check
  int check_cutoff = 14;    // gaussian-check
};

/// Reads "key = value" lines. Blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> parse_key_values(std::istream& in);

/// Applies one key. Throws ConfigError for unknown keys or bad values.
void apply_setting(RunSettings& settings, const std::string& key, const std::string& value);

/// Applies every key of a config file, then validates the result.
RunSettings load_settings(std::istream& in, RunSettings base = {});

/// Range checks that span several keys.
void validate(const RunSettings& settings);

/// Keys accepted by apply_setting.
const std::vector<std::string>& known_keys();

}  // namespace gfy
