#include "cgm/text.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>

#include "cgm/errors.hpp"

namespace cgm {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return std::string(s.substr(0, i));
  }
  return std::string(s);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s) {
  const std::string str = trim(s);
  if (str.empty()) throw ConfigError("expected a number, got nothing");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(str.c_str(), &end);
  if (end != str.c_str() + str.size() || errno == ERANGE) {
    throw ConfigError("expected a number, got '" + str + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view s) {
  const std::string str = trim(s);
  if (str.empty() || str[0] == '-') {
    throw ConfigError("expected a non-negative integer, got '" + str + "'");
  }
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(str.c_str(), &end, 10);
  if (end != str.c_str() + str.size() || errno == ERANGE) {
    throw ConfigError("expected a non-negative integer, got '" + str + "'");
  }
  return static_cast<std::uint64_t>(v);
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace cgm
