#pragma once

// Small text helpers shared by the CSV and config readers.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace greensentry::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
/// Strict full-string parse; nullopt on any trailing garbage.
std::optional<double> to_double(std::string_view s);
std::optional<long long> to_int(std::string_view s);
/// Shortest representation that parses back to the same double.
std::string shortest(double v);

}  // namespace greensentry::text
