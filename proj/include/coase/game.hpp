#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "coase/bandit_env.hpp"
#include "coase/belgic.hpp"
#include "coase/upstream.hpp"

namespace coase {

enum class GameMode { NoProperty, Property };

std::string_view to_string(GameMode mode);
GameMode game_mode_from_string(std::string_view name);

/// Per-round pseudo-regret increments, all computed from true means.
struct GapRecord {
  double up_n = 0.0;    // mu*_up - v_up(A)
  double down_n = 0.0;  // max_b v_down(A, b) - v_down(A, B)
  double sw = 0.0;      // welfare(a_sw, b_sw) - welfare(A, B)
  double up_p = 0.0;    // max_a {v_up(a) + paid(a)} - (v_up(A) + paid(A))
  double down_p = 0.0;  // mu*_down - (v_down(A, B) - paid(A))

  // Expected utilities of the round; transfers cancel in their sum.
  double up_utility = 0.0;
  double down_utility = 0.0;
  double welfare = 0.0;
};

/// Without property rights pass a zero offer.
GapRecord per_round_gaps(const BanditInstance& instance, const Oracle& oracle,
                         const IncentiveOffer& offer, Arm upstream_arm, Arm downstream_arm);

/// mu*_up + mu*_down == v_up(a_sw) + v_down(a_sw, b_sw), compared exactly.
bool lemma1_identity_check(const BanditInstance& instance, const Oracle& oracle);

struct RegretLedger {
  std::uint64_t rounds = 0;
  double r_up_n = 0.0;
  double r_down_n = 0.0;
  double r_sw = 0.0;
  double r_up_p = 0.0;
  double r_down_p = 0.0;
  double up_utility = 0.0;
  double down_utility = 0.0;
  double welfare = 0.0;

  void add(const GapRecord& g);
};

struct RoundRecord {
  std::uint64_t t = 0;  // 1-based
  Phase phase = Phase::NoProperty;
  IncentiveOffer offer;
  Arm upstream_arm = 0;
  Arm downstream_arm = 0;
  double upstream_reward = 0.0;
  double downstream_reward = 0.0;
  GapRecord gaps;
};

struct RunOptions {
  bool keep_trajectory = false;
};

struct GameResult {
  RegretLedger ledger;
  std::vector<RoundRecord> trajectory;
  /// Property mode: rounds where gap_up_p + gap_down_p < gap_sw - 1e-12.
  std::uint64_t lemma1_violations = 0;
  /// Smallest gap_up_p + gap_down_p - gap_sw seen (property mode).
  double lemma1_min_margin = 0.0;
  std::optional<TransferEstimates> estimates;
  std::vector<BatchDiagnostic> diagnostics;
  std::vector<BinarySearchState> brackets;
  std::uint64_t phase1_length = 0;
  std::uint64_t seed = 0;
};

/// Upstream moves first, the downstream sees A_t before choosing B_t.
GameResult run_no_property(const BanditInstance& instance, UpstreamPolicy& upstream,
                           NoPropertyDownstream& downstream, std::uint64_t horizon,
                           std::uint64_t seed, const RunOptions& options = {});

/// The downstream emits (offer, B_t) first; the upstream answers with A_t;
/// the transfer is paid iff A_t matches the offered arm.
GameResult run_property(const BanditInstance& instance, UpstreamPolicy& upstream,
                        PropertyDownstream& downstream, std::uint64_t horizon, std::uint64_t seed,
                        const RunOptions& options = {});

/// Everything needed to instantiate and play one game.
struct GameSpec {
  BanditInstance instance;
  GameMode mode = GameMode::Property;
  std::uint64_t horizon = 0;
  UpstreamKind upstream = UpstreamKind::Ucb;
  DownstreamKind downstream = DownstreamKind::Belgic;
  double alpha = 0.75;
  double beta = 0.25;
  /// Empty means the UCB certificate for (K, horizon).
  std::optional<double> fixed_C;

  BelgicParams belgic_params() const;
};

/// Validates the policy/mode combination (and BELGIC parameters) up front.
void validate_spec(const GameSpec& spec);

GameResult play(const GameSpec& spec, std::uint64_t seed, const RunOptions& options = {});

}  // namespace coase
