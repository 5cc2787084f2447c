// config.hpp
// Experiment configuration: a flat-section key-value text file.
//
// Grammar (one statement per line):
//   [section]            sections: map, density, experiment, oracle,
//                        weights, output
//   key = value          value: number, word, or whitespace-separated list
//   # comment            full-line comments; blank lines ignored
//
// Keys:
//   [map]        degree, sin (list, coefficient of sin(m x) at position m),
//                cos (list)
//   [density]    kind = physical | uniform | explicit, cos, sin (lists)
//   [experiment] k_list, n_list, seeds, seed0, mode_rank, corr_terms,
//                corr_lags, fig3_k
//   [oracle]     k_oracle, modulus_floor
//   [weights]    t, kappa = auto | <number>
//   [output]     dir, workers
//
// Parsing is strict: unknown sections or keys, malformed numbers, and
// out-of-range values raise config_error with the line and field.

#pragma once

#include "edmdlab/circle_map.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace edmdlab::cli {

class config_error : public std::runtime_error {
 public:
  config_error(const std::string& message, int line = 0,
               std::string field = "")
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) +
                                          (field.empty() ? "" : ", " + field) +
                                          ": " + message
                                    : message),
        line_(line),
        field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

struct ExperimentConfig {
  enum class DensityKind { physical, uniform, explicit_coeffs };

  // [map]
  int degree = 4;
  std::vector<double> sin_coeffs;  // position m-1: coefficient of sin(m x)
  std::vector<double> cos_coeffs;

  // [density]
  DensityKind density_kind = DensityKind::physical;
  std::vector<double> density_cos;
  std::vector<double> density_sin;

  // [experiment]
  std::vector<int> k_list = {8, 12, 16, 20, 24, 28, 32, 36, 40};
  std::vector<long> n_list = {1000, 10000, 100000, 1000000};
  int seeds = 8;
  std::uint64_t seed0 = 12345;
  int mode_rank = 1;
  int corr_terms = 4;
  int corr_lags = 20;
  int fig3_k = 8;

  // [oracle]
  int k_oracle = 256;
  double modulus_floor = 1e-3;

  // [weights]
  double t = 0.2;
  std::optional<double> kappa_override;

  // [output]
  std::string out_dir = "out";
  int workers = 4;

  bool operator==(const ExperimentConfig&) const = default;

  // Defaults reproduce the degree-4 experiment map
  // 4x - 0.4 sin 6x + 0.08 cos 3x with its physical density.
  static ExperimentConfig defaults();
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);

  std::string serialize() const;
  std::string hash_hex() const;  // FNV-1a over the canonical serialization

  circle_map::ExpandingMap make_map() const;  // validates expansivity
  circle_map::DensitySpec make_density(const circle_map::ExpandingMap& map,
                                       int physical_order = 192) const;
  double resolve_kappa(const circle_map::ExpandingMap& map) const;
};

}  // namespace edmdlab::cli
