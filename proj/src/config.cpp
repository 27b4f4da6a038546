#include "cgm/config.hpp"

#include <fstream>
#include <sstream>

#include "cgm/errors.hpp"
#include "cgm/text.hpp"

namespace cgm {
namespace {

bool is_quoted(const std::string& s) {
  return s.size() >= 2 && s.front() == '"' && s.back() == '"';
}

std::vector<std::string> array_items(const std::string& raw) {
  if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') {
    throw ConfigError("expected an array like [1, 2, 3]");
  }
  const std::string inner = trim(std::string_view(raw).substr(1, raw.size() - 2));
  if (inner.empty()) return {};
  auto items = split(inner, ',');
  if (!items.empty() && items.back().empty()) items.pop_back();  // trailing comma
  for (const auto& it : items) {
    if (it.empty()) throw ConfigError("empty array element");
  }
  return items;
}

}  // namespace

ConfigDoc ConfigDoc::parse(const std::string& text, const std::string& source) {
  ConfigDoc doc;
  doc.source_ = source;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(strip_comment(line));
    const std::string at = source + ":" + std::to_string(lineno) + ": ";
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) throw ConfigError(at + "malformed section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (section.empty() || section.find_first_of(" \t[]=") != std::string::npos) {
        throw ConfigError(at + "malformed section name '" + section + "'");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(at + "expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty() || key.find_first_of(" \t\"") != std::string::npos) {
      throw ConfigError(at + "malformed key '" + key + "'");
    }
    if (value.empty()) throw ConfigError(at + "missing value for '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (doc.entries_.count(full)) throw ConfigError(at + "duplicate key '" + full + "'");
    doc.entries_[full] = Entry{value, lineno};
  }
  return doc;
}

ConfigDoc ConfigDoc::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const ConfigDoc::Entry* ConfigDoc::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

std::string ConfigDoc::where(const Entry& e) const {
  return source_ + ":" + std::to_string(e.line) + ": ";
}

double ConfigDoc::get_double(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  try {
    return parse_double(e->raw);
  } catch (const Error& err) {
    throw ConfigError(where(*e) + key + ": " + err.what());
  }
}

std::uint64_t ConfigDoc::get_u64(const std::string& key, std::uint64_t fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  try {
    return parse_u64(e->raw);
  } catch (const Error& err) {
    throw ConfigError(where(*e) + key + ": " + err.what());
  }
}

bool ConfigDoc::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (e->raw == "true") return true;
  if (e->raw == "false") return false;
  throw ConfigError(where(*e) + key + ": expected true or false, got '" + e->raw + "'");
}

std::string ConfigDoc::get_string(const std::string& key, const std::string& fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (!is_quoted(e->raw)) {
    throw ConfigError(where(*e) + key + ": expected a quoted string, got " + e->raw);
  }
  return e->raw.substr(1, e->raw.size() - 2);
}

std::vector<double> ConfigDoc::get_double_list(const std::string& key,
                                               const std::vector<double>& fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  try {
    if (e->raw.front() != '[') return {parse_double(e->raw)};
    std::vector<double> out;
    for (const auto& it : array_items(e->raw)) out.push_back(parse_double(it));
    return out;
  } catch (const Error& err) {
    throw ConfigError(where(*e) + key + ": " + err.what());
  }
}

std::vector<std::uint64_t> ConfigDoc::get_u64_list(
    const std::string& key, const std::vector<std::uint64_t>& fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  try {
    if (e->raw.front() != '[') return {parse_u64(e->raw)};
    std::vector<std::uint64_t> out;
    for (const auto& it : array_items(e->raw)) out.push_back(parse_u64(it));
    return out;
  } catch (const Error& err) {
    throw ConfigError(where(*e) + key + ": " + err.what());
  }
}

void ConfigDoc::reject_unused() const {
  for (const auto& [key, e] : entries_) {
    if (!used_.count(key)) throw ConfigError(where(e) + "unknown key '" + key + "'");
  }
}

}  // namespace cgm
