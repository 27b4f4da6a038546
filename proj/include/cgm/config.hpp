#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cgm {

/// Flat key-value configuration with TOML-style `[section]` headers.
/// Values are numbers, booleans, "strings", or one-line [arrays] of those.
/// Keys are addressed as "section.key" (top-level keys have no prefix).
class ConfigDoc {
 public:
  static ConfigDoc parse(const std::string& text, const std::string& source = "<config>");
  static ConfigDoc load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;
  std::vector<std::uint64_t> get_u64_list(const std::string& key,
                                          const std::vector<std::uint64_t>& fallback) const;

  /// Throws ConfigError naming the first key never read through a getter.
  void reject_unused() const;

 private:
  struct Entry {
    std::string raw;
    int line = 0;
  };
  const Entry* find(const std::string& key) const;
  std::string where(const Entry& e) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace cgm
