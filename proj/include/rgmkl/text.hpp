#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rgmkl::text {

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Fixed-point with the given number of decimals.
std::string format_fixed(double v, int decimals);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace rgmkl::text
