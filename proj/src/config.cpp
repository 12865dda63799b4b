#include "grwalk/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "grwalk/errors.hpp"

namespace grwalk {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(v);
  while (std::getline(is, cur, ',')) out.push_back(trim(cur));
  return out;
}

bool parse_integer(const std::string& s, long long& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end && !s.empty();
}

bool parse_real(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end && !s.empty();
}

bool parse_boolean(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") return out = true, true;
  if (s == "false" || s == "0" || s == "no") return out = false, true;
  return false;
}

const char* type_name(ConfigType t) {
  switch (t) {
    case ConfigType::integer: return "an integer";
    case ConfigType::real: return "a number";
    case ConfigType::text: return "text";
    case ConfigType::boolean: return "true or false";
    case ConfigType::integer_list: return "a comma-separated list of integers";
    case ConfigType::real_list: return "a comma-separated list of numbers";
  }
  return "";
}

bool well_typed(ConfigType t, const std::string& v) {
  long long i = 0;
  double x = 0;
  bool b = false;
  switch (t) {
    case ConfigType::integer: return parse_integer(v, i);
    case ConfigType::real: return parse_real(v, x);
    case ConfigType::text: return true;
    case ConfigType::boolean: return parse_boolean(v, b);
    case ConfigType::integer_list: {
      auto parts = split_list(v);
      return !parts.empty() && std::all_of(parts.begin(), parts.end(), [&](auto& p) { return parse_integer(p, i); });
    }
    case ConfigType::real_list: {
      auto parts = split_list(v);
      return !parts.empty() && std::all_of(parts.begin(), parts.end(), [&](auto& p) { return parse_real(p, x); });
    }
  }
  return false;
}

std::optional<ConfigType> type_of(const std::string& key) {
  for (const auto& [k, t] : config_schema())
    if (k == key) return t;
  return std::nullopt;
}

}  // namespace

const std::vector<std::pair<std::string, ConfigType>>& config_schema() {
  using T = ConfigType;
  static const std::vector<std::pair<std::string, ConfigType>> schema{
      {"run.seed", T::integer},          {"run.threads", T::integer},
      {"group.spec", T::text},           {"group.family", T::text},
      {"group.dim", T::integer},         {"group.lamp_order", T::integer},
      {"group.q", T::integer},           {"walk.n_max", T::integer},
      {"walk.prune_eps", T::real},       {"walk.measure", T::text},
      {"walk.samples", T::integer},      {"walk.grid", T::integer_list},
      {"walk.alpha", T::real_list},      {"walk.checkpoint", T::boolean},
      {"spectral.family", T::text},      {"spectral.v_max", T::real},
      {"spectral.tol", T::real},         {"bounds.theorem", T::text},
      {"bounds.gamma", T::text},         {"bounds.gamma_c", T::real},
      {"bounds.gamma_beta", T::real},    {"bounds.gamma_kappa", T::real},
      {"bounds.n_max", T::integer},      {"bounds.grid", T::integer_list},
      {"bounds.radius", T::integer_list}, {"bounds.r_max", T::integer},
      {"bounds.alpha", T::real_list},    {"bounds.theta", T::real},
      {"bounds.samples", T::integer},    {"bubble.sequence", T::integer_list},
      {"bubble.theta", T::real},         {"bubble.levels", T::integer},
      {"bubble.report", T::text},        {"bubble.k_max", T::integer},
      {"bubble.samples", T::integer},    {"bubble.grid", T::integer_list},
      {"bubble.max_vertices", T::integer}, {"output.dir", T::text},
      {"output.formats", T::text},
  };
  return schema;
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream is(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", line, s);
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (section.empty() || section.find_first_of(" .=") != std::string::npos)
        throw ConfigError("bad section name", line, section);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line, s);
    std::string key = trim(std::string_view(s).substr(0, eq));
    std::string value = trim(std::string_view(s).substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line, key);
    if (key.find('.') == std::string::npos) {
      if (section.empty()) throw ConfigError("key needs a section prefix", line, key);
      key = section + "." + key;
    }
    cfg.set(key, value, line);
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path, 0, "");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void Config::set(const std::string& key, const std::string& value, int line) {
  const auto t = type_of(key);
  if (!t) throw ConfigError("unknown key", line, key);
  if (!well_typed(*t, value)) throw ConfigError(std::string("value must be ") + type_name(*t), line, key);
  entries_[key] = Entry{value, line};
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.value;
}

long long Config::integer(const std::string& key, long long fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  long long v = 0;
  if (!parse_integer(it->second.value, v)) throw ConfigError("value must be an integer", it->second.line, key);
  return v;
}

double Config::real(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  double v = 0;
  if (!parse_real(it->second.value, v)) throw ConfigError("value must be a number", it->second.line, key);
  return v;
}

bool Config::boolean(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  bool v = false;
  if (!parse_boolean(it->second.value, v)) throw ConfigError("value must be true or false", it->second.line, key);
  return v;
}

std::vector<long long> Config::integers(const std::string& key, std::vector<long long> fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<long long> out;
  for (const auto& p : split_list(it->second.value)) {
    long long v = 0;
    if (!parse_integer(p, v)) throw ConfigError("list entries must be integers", it->second.line, key);
    out.push_back(v);
  }
  return out;
}

std::vector<double> Config::reals(const std::string& key, std::vector<double> fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  for (const auto& p : split_list(it->second.value)) {
    double v = 0;
    if (!parse_real(p, v)) throw ConfigError("list entries must be numbers", it->second.line, key);
    out.push_back(v);
  }
  return out;
}

void Config::require(const std::string& key) const {
  if (!has(key)) throw ConfigError("required key is missing", 0, key);
}

std::string Config::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, e] : entries_) j[k] = e.value;
  return j.dump(2);
}

ScalingSequence sequence_from_config(const Config& cfg) {
  if (cfg.has("bubble.sequence")) {
    std::vector<int> a;
    for (long long v : cfg.integers("bubble.sequence", {})) a.push_back(static_cast<int>(v));
    try {
      return ScalingSequence::explicit_list(std::move(a));
    } catch (const Error& e) {
      throw ConfigError(e.what(), cfg.entries().at("bubble.sequence").line, "bubble.sequence");
    }
  }
  const double theta = cfg.real("bubble.theta", 2.0);
  const int levels = static_cast<int>(cfg.integer("bubble.levels", 6));
  try {
    return ScalingSequence::geometric(theta, levels);
  } catch (const Error& e) {
    const std::string key = cfg.has("bubble.theta") ? "bubble.theta" : "bubble.levels";
    throw ConfigError(e.what(), cfg.has(key) ? cfg.entries().at(key).line : 0, key);
  }
}

GroupSpec group_from_config(const Config& cfg, const std::string& fallback) {
  auto line_of = [&](const std::string& k) { return cfg.has(k) ? cfg.entries().at(k).line : 0; };
  GroupSpec spec;
  if (cfg.has("group.spec")) {
    try {
      spec = GroupSpec::parse(cfg.text("group.spec", ""));
    } catch (const Error& e) {
      throw ConfigError(e.what(), line_of("group.spec"), "group.spec");
    }
  } else if (cfg.has("group.family")) {
    std::string f = cfg.text("group.family", "");
    std::transform(f.begin(), f.end(), f.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const int dim = static_cast<int>(cfg.integer("group.dim", 1));
    if (f == "z" || f == "zpowd")
      spec = GroupSpec::z(dim);
    else if (f == "heisenberg")
      spec = GroupSpec::heisenberg();
    else if (f == "lamplighter")
      spec = GroupSpec::lamplighter(dim, static_cast<int>(cfg.integer("group.lamp_order", 2)));
    else if (f == "zwrz" || f == "wreath_z_over_z")
      spec = GroupSpec::wreath_z_over_z();
    else if (f == "bs" || f == "baumslag_solitar")
      spec = GroupSpec::baumslag_solitar(static_cast<int>(cfg.integer("group.q", 2)));
    else if (f == "bubble")
      spec = GroupSpec::bubble_wreath(sequence_from_config(cfg));
    else
      throw ConfigError("unknown group family", line_of("group.family"), "group.family");
  } else {
    spec = GroupSpec::parse(fallback);
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    const std::string key = cfg.has("group.spec") ? "group.spec" : "group.family";
    throw ConfigError(e.what(), line_of(key), key);
  }
  return spec;
}

}  // namespace grwalk
