#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace g2p {

// Single key-value config file: "key = value" per line, '#' comments.
// Command-line flags override file entries via set().
class Manifest {
 public:
  Manifest() = default;
  static Manifest parse(const std::string& contents);
  static Manifest load(const std::string& path);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) {
    kv_[key] = value;
  }

  const std::string& get(const std::string& key) const;  // throws if absent
  std::string get_or(const std::string& key, const std::string& fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  uint64_t get_u64(const std::string& key) const;  // throws if absent
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& kv() const { return kv_; }
  std::string serialize() const;

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace g2p
