#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coase/game.hpp"

namespace coase {

/// Raised on malformed configuration text; `line` is 1-based (0 when the
/// problem is not tied to a single line).
class ConfigError : public ValidationError {
 public:
  ConfigError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct InstanceSpec {
  std::size_t K = 0;
  RewardModel reward_model = RewardModel::GaussianUnitVariance;
  // Explicit means, or a generator seed when `generator_seed` is set.
  std::vector<double> v_up;
  std::vector<std::vector<double>> v_down;
  std::optional<std::uint64_t> generator_seed;
  bool require_misalignment = false;

  BanditInstance build() const;
  bool operator==(const InstanceSpec&) const = default;
};

struct GameConfig {
  GameMode mode = GameMode::Property;
  InstanceSpec instance;
  std::uint64_t horizon = 0;
  double alpha = 0.75;
  double beta = 0.25;
  std::optional<double> fixed_C;  // c_mode = fixed:<value>; empty = theoretical
  UpstreamKind upstream = UpstreamKind::Ucb;
  DownstreamKind downstream = DownstreamKind::Belgic;
  std::vector<std::uint64_t> seeds{1};
  bool keep_trajectory = true;
  std::string trajectory_csv;
  std::string summary_csv;
  std::string diagnostics_csv;

  GameSpec game_spec() const;
  GameSpec game_spec(std::uint64_t horizon_override) const;
  bool operator==(const GameConfig&) const = default;
};

GameConfig parse_config_text(const std::string& text);
GameConfig parse_config(const std::string& path);

/// Canonical text form with every default spelled out; parsing it back
/// yields an equal config.
std::string serialize_config(const GameConfig& config);

/// Checks cross-field constraints (distinct seeds, policy/mode pairing,
/// BELGIC inequalities in property mode).
void validate_config(const GameConfig& config);

}  // namespace coase
