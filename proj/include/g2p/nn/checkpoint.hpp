#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "g2p/nn/graph.hpp"

namespace g2p {
namespace nn {

// Binary container: magic, version, alphabet fingerprint, a JSON config
// block, then a named tensor table (name, shape, little-endian float32).
// Loading verifies magic, version and fingerprint and fails on truncation.
struct Checkpoint {
  static constexpr char kMagic[8] = {'G', '2', 'P', 'C', 'K', 'P', 'T', '\0'};
  static constexpr uint32_t kVersion = 1;

  uint64_t alphabet_fingerprint = 0;
  nlohmann::json config;
  ParamStore params;

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& bytes);

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
  // Loads and verifies the alphabet fingerprint in one step.
  static Checkpoint load(const std::string& path, uint64_t expected_fingerprint);
};

// Copies checkpoint tensors into a freshly constructed model's store. Every
// name must exist on both sides with identical shapes.
void restore_params(ParamStore& dst, const Checkpoint& ck);

}  // namespace nn
}  // namespace g2p
