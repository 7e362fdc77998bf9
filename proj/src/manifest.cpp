#include "g2p/manifest.hpp"

#include <algorithm>

#include "g2p/errors.hpp"
#include "g2p/io_util.hpp"

namespace g2p {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

Manifest Manifest::parse(const std::string& contents) {
  Manifest m;
  int lineno = 0;
  for (const std::string& line : split_lines(contents)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key = value", lineno, 1);
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", lineno, 1);
    m.kv_[key] = value;
  }
  return m;
}

Manifest Manifest::load(const std::string& path) {
  return parse(read_file(path));
}

const std::string& Manifest::get(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw DataError("manifest is missing '" + key + "'");
  return it->second;
}

std::string Manifest::get_or(const std::string& key,
                             const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

int64_t Manifest::get_int(const std::string& key, int64_t fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw DataError("manifest key '" + key + "' is not an integer: '" +
                    it->second + "'");
  }
}

uint64_t Manifest::get_u64(const std::string& key) const {
  try {
    return std::stoull(get(key));
  } catch (const DataError&) {
    throw;
  } catch (const std::exception&) {
    throw DataError("manifest key '" + key + "' is not an unsigned integer");
  }
}

double Manifest::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw DataError("manifest key '" + key + "' is not a number: '" +
                    it->second + "'");
  }
}

bool Manifest::get_bool(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw DataError("manifest key '" + key + "' is not a boolean: '" +
                  it->second + "'");
}

std::string Manifest::serialize() const {
  std::string out;
  for (const auto& [k, v] : kv_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace g2p
