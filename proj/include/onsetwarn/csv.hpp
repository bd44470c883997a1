#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace onsetwarn::csv {

/// Splits one line on commas. No quoting: none of the formats here need it.
std::vector<std::string_view> split(std::string_view line, char sep = ',');

std::string_view trim(std::string_view text) noexcept;

/// Full-match numeric parse; nullopt on empty or non-numeric text.
std::optional<double> parse_double(std::string_view text) noexcept;
std::optional<long long> parse_int(std::string_view text) noexcept;

/// Shortest representation that round-trips exactly.
std::string format_number(double value);
/// Fixed-point with `digits` decimals, for human-facing tables.
std::string format_fixed(double value, int digits);

}  // namespace onsetwarn::csv
