#include "zpf/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace zpf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_plain(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (!s.empty() && *b == '+') ++b;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw ConfigError("not a number: '" + s + "'");
  return v;
}

}  // namespace

double parse_number(const std::string& text) {
  const std::string s = trim(text);
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_plain(s);
  const double den = parse_plain(trim(s.substr(slash + 1)));
  if (den == 0.0) throw ConfigError("zero denominator in '" + s + "'");
  return parse_plain(trim(s.substr(0, slash))) / den;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    cfg.set(section, key, trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str());
}

std::string RunConfig::serialize() const {
  std::ostringstream os;
  std::vector<std::string> order{""};
  for (const auto& e : entries_)
    if (std::find(order.begin(), order.end(), e.section) == order.end()) order.push_back(e.section);
  for (const auto& sec : order) {
    if (!sec.empty()) os << "\n[" << sec << "]\n";
    for (const auto& e : entries_)
      if (e.section == sec) os << e.key << " = " << e.value << '\n';
  }
  return os.str();
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  for (auto& e : entries_)
    if (e.section == section && e.key == key) {
      e.value = value;
      return;
    }
  entries_.push_back({section, key, value});
}

std::optional<std::string> RunConfig::get(const std::string& section,
                                          const std::string& key) const {
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) return e.value;
  for (const auto& e : entries_)
    if (e.section.empty() && e.key == key) return e.value;
  return std::nullopt;
}

std::string RunConfig::str(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  return get(section, key).value_or(fallback);
}

double RunConfig::num(const std::string& section, const std::string& key, double fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  try {
    return parse_number(*v);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

int RunConfig::integer(const std::string& section, const std::string& key, int fallback) const {
  const double v = num(section, key, fallback);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + ": expected an integer");
  return static_cast<int>(v);
}

std::vector<double> RunConfig::nums(const std::string& section, const std::string& key,
                                    const std::vector<double>& fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  std::vector<double> out;
  try {
    for (const auto& item : split_list(*v)) out.push_back(parse_number(item));
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::vector<int> RunConfig::ints(const std::string& section, const std::string& key,
                                 const std::vector<int>& fallback) const {
  std::vector<double> dflt(fallback.begin(), fallback.end());
  std::vector<int> out;
  for (double v : nums(section, key, dflt)) {
    if (v != std::floor(v)) throw ConfigError(key + ": expected integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void RunConfig::require_known(const std::string& section,
                              const std::vector<std::string>& allowed) const {
  for (const auto& e : entries_) {
    if (e.section != section) continue;
    if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end())
      throw ConfigError("unknown key '" + e.key + "'" +
                        (e.section.empty() ? std::string() : " in [" + e.section + "]"));
  }
}

}  // namespace zpf
