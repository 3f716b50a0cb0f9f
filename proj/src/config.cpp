#include "greensentry/config.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>

#include "greensentry/error.hpp"
#include "greensentry/text.hpp"

namespace greensentry {

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = std::string_view(line);
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = text::trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = text::trim(body.substr(0, eq));
    if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
    cfg.set(std::string(key), std::string(text::trim(body.substr(eq + 1))));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  return parse(in);
}

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
  const auto it = values_.find(std::string(key));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<long long> KeyValueConfig::get_int(std::string_view key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  const auto n = text::to_int(*v);
  if (!n) throw UsageError("config key '" + std::string(key) + "': expected an integer, got '" + *v + "'");
  return n;
}

std::optional<std::uint64_t> KeyValueConfig::get_u64(std::string_view key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  const auto s = text::trim(*v);
  std::uint64_t n = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError("config key '" + std::string(key) + "': expected an unsigned 64-bit integer, got '" + *v + "'");
  }
  return n;
}

std::optional<double> KeyValueConfig::get_double(std::string_view key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  const auto d = text::to_double(*v);
  if (!d) throw UsageError("config key '" + std::string(key) + "': expected a number, got '" + *v + "'");
  return d;
}

std::optional<bool> KeyValueConfig::get_bool(std::string_view key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw UsageError("config key '" + std::string(key) + "': expected true/false, got '" + *v + "'");
}

}  // namespace greensentry
