#pragma once

// Scenario description and market generation from the physical model:
// channel gains follow G = 10^(-attenuation/10) * d^(-alpha), types are
// theta = G_ms^2 / a, and gamma = eta * G_as / N0.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rfet/model.hpp"

namespace rfet {

using Range = std::pair<double, double>;

/// Counter-based uniform draw in [0, 1): the value depends only on
/// (seed, stream, counter), so any subset of draws can be generated
/// independently and in any order.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

enum class TypeNormalization { kUnit, kRaw };

struct PhysicalGammaConfig {
  double eta = 0.5;
  double noise_n0 = 1e-8;         // mW
  Range d_as{15.0, 25.0};         // m
  double attenuation = 30.0;      // dB at the 1 m reference distance
  double path_loss_alpha = 2.0;
};

struct TypeGenConfig {
  Range a{0.1, 1.0};
  Range d_ms{5.0, 10.0};  // m
  double attenuation = 30.0;
  double path_loss_alpha = 2.0;
  TypeNormalization normalization = TypeNormalization::kUnit;
  std::uint64_t seed = 1;
};

struct ScenarioConfig {
  int n_eaps = 2;
  int n_types = 5;
  // Exactly one of the two gamma sources.
  std::optional<double> gamma;
  std::optional<PhysicalGammaConfig> physical;
  // Exactly one of the two type sources.
  std::optional<TypeGenConfig> type_gen;
  std::optional<std::vector<double>> types;
  double bandwidth_w = 1.0;
  std::int64_t mc_draws = 10'000;
  std::uint64_t seed = 42;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Parses the JSON form; every key must be a known field.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);
std::string to_json(const ScenarioConfig& cfg);

/// Power gain at distance d: 10^(-attenuation/10) * d^(-alpha).
double path_gain(double distance, double attenuation_db, double alpha);

/// Deterministic in the config. Types come sorted strictly ascending; ties
/// are resampled a bounded number of times.
Market generate_market(const ScenarioConfig& cfg);

/// The K sampled types before any normalization.
std::vector<double> sample_raw_types(const TypeGenConfig& gen, int n_types);

}  // namespace rfet
