#include "edmdlab/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace edmdlab::cli {

void ResultsManifest::note(const std::string& key, double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  notes.emplace_back(key, buf);
}

std::string ResultsManifest::serialize() const {
  std::ostringstream out;
  out << "[manifest]\n";
  out << "command = " << command << "\n";
  out << "config_hash = " << config_hash << "\n";
  out << "version = " << kVersion << "\n";
  out << "created = " << created << "\n";
  out << "\n[seeds]\n";
  out << "seed0 = " << seed0 << "\n";
  out << "seeds = " << seeds << "\n";
  if (!notes.empty()) {
    out << "\n[results]\n";
    for (const auto& [k, v] : notes) out << k << " = " << v << "\n";
  }
  out << "\n[artifacts]\n";
  for (const auto& a : artifacts) out << "file = " << a << "\n";
  return out.str();
}

void ResultsManifest::write_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("manifest: cannot open " + path);
  const std::string s = serialize();
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw std::runtime_error("manifest: write failed for " + path);
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace edmdlab::cli
