#include "gaussify/config.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace gfy {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': expected a number, got '" + value + "'");
  }
  if (used != value.size()) throw ConfigError("'" + key + "': expected a number, got '" + value + "'");
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': expected an integer, got '" + value + "'");
  }
  if (used != value.size()) throw ConfigError("'" + key + "': expected an integer, got '" + value + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  std::string v = value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + value + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int(key, trim(item)));
  if (out.empty()) throw ConfigError("'" + key + "': empty list");
  return out;
}

}  // namespace

EtaSweep EtaSweep::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw ConfigError("eta sweep must be start:stop:count, got '" + text + "'");
  EtaSweep s{to_double("sweep_eta", parts[0]), to_double("sweep_eta", parts[1]), to_int("sweep_eta", parts[2])};
  if (s.count < 1) throw ConfigError("eta sweep needs at least one point");
  if (!(s.start >= 0.0 && s.start <= 1.0 && s.stop >= 0.0 && s.stop <= 1.0))
    throw ConfigError("eta sweep values must lie in [0,1]");
  if (s.count == 1 && s.start != s.stop) throw ConfigError("a one-point eta sweep needs start == stop");
  return s;
}

std::vector<double> EtaSweep::values() const {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
  v.back() = stop;
  return v;
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    if (!out.emplace(key, value).second) throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + key + "'");
  }
  return out;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "epsilon", "steps", "truncation", "max_truncation", "detector", "single_mode", "leak_threshold", "leak_policy",
      "out",     "sweep_eta", "sweep_steps", "wigner", "wigner_steps", "jobs",   "squeezing",   "check_cutoff"};
  return keys;
}

void apply_setting(RunSettings& s, const std::string& key, const std::string& value) {
  ProtocolConfig& p = s.protocol;
  try {
    if (key == "epsilon") p.epsilon = to_double(key, value);
    else if (key == "steps") p.steps = to_int(key, value);
    else if (key == "truncation") {
      const int old = p.truncation;
      p.truncation = to_int(key, value);
      if (p.max_truncation == std::max(old, 10)) p.max_truncation = std::max(p.truncation, 10);
    } else if (key == "max_truncation") p.max_truncation = to_int(key, value);
    else if (key == "detector") p.detector = DetectorModel::parse(value);
    else if (key == "single_mode") p.single_mode = to_bool(key, value);
    else if (key == "leak_threshold") p.leak_threshold = to_double(key, value);
    else if (key == "leak_policy") {
      if (value == "fail") p.leak_policy = LeakPolicy::Fail;
      else if (value == "record") p.leak_policy = LeakPolicy::Record;
      else throw ConfigError("'leak_policy': expected fail or record, got '" + value + "'");
    } else if (key == "out") s.out = value;
    else if (key == "sweep_eta") s.sweep = EtaSweep::parse(value);
    else if (key == "wigner") s.grid = GridSpec::parse(value);
    else if (key == "wigner_steps") s.wigner_steps = to_int_list(key, value);
    else if (key == "sweep_steps") s.sweep_steps = to_int_list(key, value);
    else if (key == "jobs") s.jobs = to_int(key, value);
    else if (key == "squeezing") s.squeezing = to_double(key, value);
    else if (key == "check_cutoff") s.check_cutoff = to_int(key, value);
    else throw ConfigError("unknown key '" + key + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("'" + key + "': " + e.what());
  }
}

void validate(const RunSettings& s) {
  try {
    s.protocol.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (s.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (!(s.squeezing >= 0.0)) throw ConfigError("squeezing must be >= 0");
  if (s.check_cutoff < 8) throw ConfigError("check_cutoff must be >= 8");
  for (int step : s.wigner_steps)
    if (step < 0) throw ConfigError("wigner steps must be >= 0");
  for (int step : s.sweep_steps)
    if (step < 1) throw ConfigError("sweep steps must be >= 1");
}

RunSettings load_settings(std::istream& in, RunSettings base) {
  for (const auto& [key, value] : parse_key_values(in)) apply_setting(base, key, value);
  validate(base);
  return base;
}

}  // namespace gfy
