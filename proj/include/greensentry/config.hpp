#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace greensentry {

/// Flat `key = value` configuration. `#` starts a comment; keys are
/// dotted (`train.epochs`, `sim.days`, ...). Later assignments win.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::string& path);

  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  bool contains(std::string_view key) const { return values_.find(std::string(key)) != values_.end(); }
  std::optional<std::string> get(std::string_view key) const;

  /// Typed lookups; throw UsageError naming the key on malformed values.
  std::optional<long long> get_int(std::string_view key) const;
  std::optional<std::uint64_t> get_u64(std::string_view key) const;
  std::optional<double> get_double(std::string_view key) const;
  std::optional<bool> get_bool(std::string_view key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace greensentry
