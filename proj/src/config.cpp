#include "savflow/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace savflow::experiments {

namespace {

struct KeySpec {
  const char* name;
  enum Kind { positive, nonnegative, alpha1, boolean, text, int_list, positive_list, solver } kind;
};

const std::vector<KeySpec>& keys_for(const std::string& experiment) {
  static const std::map<std::string, std::vector<KeySpec>> specs{
      {"convergence",
       {{"output_dir", KeySpec::text},
        {"levels", KeySpec::int_list},
        {"dt", KeySpec::positive},
        {"t_end", KeySpec::nonnegative},
        {"nu", KeySpec::positive},
        {"alpha1", KeySpec::alpha1},
        {"alpha2", KeySpec::nonnegative},
        {"sav", KeySpec::boolean},
        {"solver", KeySpec::solver}}},
      {"cylinder",
       {{"output_dir", KeySpec::text},
        {"mesh_h", KeySpec::positive},
        {"dt", KeySpec::positive},
        {"t_end", KeySpec::nonnegative},
        {"nu", KeySpec::positive},
        {"alpha1", KeySpec::alpha1},
        {"alpha2", KeySpec::nonnegative},
        {"sav", KeySpec::boolean},
        {"solver", KeySpec::solver}}},
      {"offset-circles",
       {{"output_dir", KeySpec::text},
        {"mesh_h", KeySpec::positive},
        {"reynolds", KeySpec::positive_list},
        {"dt", KeySpec::positive},
        {"t_end", KeySpec::nonnegative},
        {"alpha1", KeySpec::alpha1},
        {"alpha2", KeySpec::nonnegative},
        {"sav", KeySpec::boolean},
        {"compare_nosav", KeySpec::boolean},
        {"solver", KeySpec::solver}}},
  };
  const auto it = specs.find(experiment);
  if (it == specs.end()) {
    std::string names;
    for (const auto& [k, v] : specs) names += (names.empty() ? "" : ", ") + k;
    throw ConfigError("unknown experiment '" + experiment + "'; expected one of: " + names);
  }
  return it->second;
}

std::map<std::string, std::string> defaults_for(const std::string& experiment) {
  if (experiment == "convergence")
    return {{"output_dir", "results/convergence"}, {"levels", "4,8,16,32"}, {"dt", "0.01"}, {"t_end", "0.01"},
            {"nu", "1"}, {"alpha1", "h2"}, {"alpha2", "1"}, {"sav", "true"}, {"solver", "direct"}};
  if (experiment == "cylinder")
    return {{"output_dir", "results/cylinder"}, {"mesh_h", "0.025"}, {"dt", "0.01"}, {"t_end", "8"},
            {"nu", "0.001"}, {"alpha1", "h2"}, {"alpha2", "0.001"}, {"sav", "true"}, {"solver", "direct"}};
  return {{"output_dir", "results/offset-circles"}, {"mesh_h", "0.05"}, {"reynolds", "200,800,1200"},
          {"dt", "0.025"}, {"t_end", "5"}, {"alpha1", "h2"}, {"alpha2", "1"}, {"sav", "true"},
          {"compare_nosav", "true"}, {"solver", "direct"}};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

void validate_value(const KeySpec& spec, const std::string& value) {
  const std::string key = spec.name;
  auto fail = [&](const std::string& why) { throw ConfigError("invalid value '" + value + "' for " + key + ": " + why); };
  double d = 0.0;
  switch (spec.kind) {
    case KeySpec::positive:
      if (!parse_double(value, d)) fail("not a number");
      if (!(d > 0.0)) fail("must be positive");
      break;
    case KeySpec::nonnegative:
      if (!parse_double(value, d)) fail("not a number");
      if (d < 0.0) fail("must be nonnegative");
      break;
    case KeySpec::alpha1:
      if (value == "h2" || value == "local_h2") break;
      if (!parse_double(value, d)) fail("expected h2, local_h2 or a nonnegative number");
      if (d < 0.0) fail("must be nonnegative");
      break;
    case KeySpec::boolean:
      if (value != "true" && value != "false") fail("expected true or false");
      break;
    case KeySpec::text:
      if (value.empty()) fail("must not be empty");
      break;
    case KeySpec::solver:
      if (value != "direct") fail("the only available solver is 'direct'");
      break;
    case KeySpec::int_list:
    case KeySpec::positive_list: {
      const auto items = split_list(value);
      if (items.empty()) fail("empty list");
      for (const auto& it : items) {
        if (!parse_double(it, d) || !(d > 0.0)) fail("list entries must be positive numbers");
        if (spec.kind == KeySpec::int_list && d != std::floor(d)) fail("list entries must be integers");
      }
      break;
    }
  }
}

void set_value(ExperimentConfig& c, const std::string& key, const std::string& value, const std::string& where) {
  const auto& specs = keys_for(c.experiment);
  const auto it = std::find_if(specs.begin(), specs.end(), [&](const KeySpec& s) { return key == s.name; });
  if (it == specs.end()) {
    std::string valid;
    for (const auto& s : specs) valid += (valid.empty() ? "" : ", ") + std::string(s.name);
    throw ConfigError(where + "unknown key '" + key + "' for " + c.experiment + "; valid keys: " + valid);
  }
  try {
    validate_value(*it, value);
  } catch (const ConfigError& e) {
    throw ConfigError(where + e.what());
  }
  c.values[key] = value;
}

}  // namespace

double ExperimentConfig::number(const std::string& key) const {
  double d = 0.0;
  if (!parse_double(text(key), d)) throw ConfigError("key " + key + " is not numeric");
  return d;
}

bool ExperimentConfig::flag(const std::string& key) const { return text(key) == "true"; }

std::string ExperimentConfig::text(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) throw ConfigError("missing key " + key);
  return it->second;
}

std::vector<double> ExperimentConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(text(key))) {
    double d = 0.0;
    if (!parse_double(item, d)) throw ConfigError("key " + key + " holds a non-numeric entry");
    out.push_back(d);
  }
  return out;
}

std::vector<std::string> experiment_names() { return {"convergence", "cylinder", "offset-circles"}; }

std::vector<std::string> valid_keys(const std::string& experiment) {
  std::vector<std::string> out;
  for (const auto& s : keys_for(experiment)) out.emplace_back(s.name);
  return out;
}

ExperimentConfig parse_config_text(const std::string& experiment, const std::string& text,
                                   const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig c;
  c.experiment = experiment;
  (void)keys_for(experiment);
  c.values = defaults_for(experiment);
  std::stringstream in(text);
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(number) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    set_value(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
  }
  for (const auto& [k, v] : overrides) set_value(c, k, trim(v), "--" + k + ": ");
  return c;
}

ExperimentConfig parse_config(const std::string& experiment, const std::filesystem::path& file,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::string text;
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_config_text(experiment, text, overrides);
}

std::string echo_config(const ExperimentConfig& config) {
  std::string out = "# savflow " + config.experiment + "\n";
  for (const auto& key : valid_keys(config.experiment)) out += key + " = " + config.text(key) + "\n";
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace savflow::experiments
