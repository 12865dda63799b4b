#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "grwalk/group.hpp"

namespace grwalk {

enum class ConfigType { integer, real, text, boolean, integer_list, real_list };

/// Flat key-value configuration.
///
///   # comment
///   section.key = value
///   [section]          following bare keys get the "section." prefix
///   key = value
///
/// Keys are checked against a fixed schema with value types; lists are comma
/// separated. Every error carries the line number and the full key. Values
/// set later (or by `set`) replace earlier ones; `set` records line 0.
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  /// Validates the key and the value's type; ConfigError otherwise.
  void set(const std::string& key, const std::string& value, int line = 0);
  bool has(const std::string& key) const { return entries_.contains(key); }
  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

  std::string text(const std::string& key, const std::string& fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  double real(const std::string& key, double fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::vector<long long> integers(const std::string& key, std::vector<long long> fallback) const;
  std::vector<double> reals(const std::string& key, std::vector<double> fallback) const;

  /// ConfigError naming `key` unless present.
  void require(const std::string& key) const;

  /// Sorted "key": "value" object.
  std::string to_json() const;

 private:
  std::map<std::string, Entry> entries_;
};

/// Every accepted key with its type, in schema order.
const std::vector<std::pair<std::string, ConfigType>>& config_schema();

/// Group from group.spec (GroupSpec::parse syntax) or from group.family with
/// group.dim, group.lamp_order, group.q and the bubble.* sequence keys.
/// `fallback` is used when neither is set.
GroupSpec group_from_config(const Config& cfg, const std::string& fallback = "Z");

/// bubble.sequence ("2,3,4") if set, else geometric(bubble.theta, bubble.levels).
ScalingSequence sequence_from_config(const Config& cfg);

}  // namespace grwalk
