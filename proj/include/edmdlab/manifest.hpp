// manifest.hpp
// Results manifest mirroring the config grammar: config hash, software
// version, timestamps, per-run seeds, fitted quantities, and every emitted
// artifact.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace edmdlab::cli {

inline constexpr const char* kVersion = "0.1.0";

struct ResultsManifest {
  std::string command;
  std::string config_hash;
  std::string created;  // UTC timestamp
  std::uint64_t seed0 = 0;
  int seeds = 0;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<std::string> artifacts;

  void note(const std::string& key, const std::string& value) {
    notes.emplace_back(key, value);
  }
  void note(const std::string& key, double value);

  std::string serialize() const;
  void write_file(const std::string& path) const;
};

std::string utc_timestamp();

}  // namespace edmdlab::cli
