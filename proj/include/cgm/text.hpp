#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cgm {

std::string trim(std::string_view s);
/// Drops a trailing `# ...` comment that is not inside double quotes.
std::string strip_comment(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Strict parsers; throw ConfigError on trailing garbage or out-of-range values.
double parse_double(std::string_view s);
std::uint64_t parse_u64(std::string_view s);

/// Shortest-stable formatting used by every CSV writer: printf("%.17g").
std::string fmt_g17(double v);

}  // namespace cgm
