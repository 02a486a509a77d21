#pragma once

#include <cstdint>
#include <memory>
#include <string_view>
#include <utility>
#include <vector>

#include "coase/bandit_env.hpp"
#include "coase/upstream.hpp"

namespace coase {

struct BelgicParams {
  std::size_t K = 0;
  std::uint64_t horizon = 0;
  double alpha = 0.75;
  double beta = 0.25;
  RegretCertificate certificate;
};

/// Ceiling that snaps values within a few ulps of an integer onto it, so that
/// exact powers such as 4096^0.75 = 512 are not pushed up by pow rounding.
std::uint64_t stable_ceil(double x);

/// Batch length ceil(T^alpha).
std::uint64_t batch_length(const BelgicParams& params);
/// Batches per arm ceil(log2 T^beta) = ceil(beta * log2 T).
std::uint64_t batches_per_arm(const BelgicParams& params);
/// Bracket slack 1 / T^beta.
double precision(const BelgicParams& params);
/// Worst-case phase-1 length K * ceil(T^alpha) * ceil(log2 T^beta).
std::uint64_t phase1_budget(const BelgicParams& params);

/// Throws ValidationError naming the first violated condition among
/// beta/alpha < 1 - kappa, phase 1 fitting in the horizon, and
/// C * Tb^(kappa + beta/alpha) < Tb / 2 with Tb the batch length.
void validate_params(const BelgicParams& params);

/// Mismatch threshold C * Tb^(kappa + beta/alpha).
double threshold(const BelgicParams& params);

enum class BatchBranch { RaiseLower, LowerUpper, EarlyReturn };

std::string_view to_string(BatchBranch branch);

/// Bracket of the batched binary search on one arm.
struct BinarySearchState {
  Arm arm = 0;
  double tau_lower = 0.0;
  double tau_upper = 1.0;
  std::uint64_t batch_index = 0;
  std::uint64_t mismatch_count = 0;
  bool finished = false;
  bool early_return = false;
  bool clamped = false;  // last update was cut back into [0, 1]

  double tau_mid() const { return (tau_lower + tau_upper) / 2.0; }
  double width() const { return tau_upper - tau_lower; }
};

/// Applies the end-of-batch rule for a batch offered at tau_mid():
///   threshold < m < Tb - threshold      -> early return, bracket kept
///   m <= Tb - threshold                 -> tau_upper = tau_mid + 1/T^beta
///   otherwise                           -> tau_lower = tau_mid - 1/T^beta
/// The bracket is then clamped to [0, 1].
BatchBranch binary_search_batch_update(BinarySearchState& state, std::uint64_t mismatch_count,
                                       const BelgicParams& params);

struct TransferEstimates {
  Vector tau_hat;
};

/// tau_hat(a) = tau_upper(a) + 1/T^beta + C * T^((kappa - 1) / 2).
TransferEstimates transfer_estimates(const std::vector<BinarySearchState>& brackets,
                                     const BelgicParams& params);

struct BatchDiagnostic {
  Arm arm = 0;
  std::uint64_t batch = 0;  // 1-based within the arm
  double tau_mid = 0.0;
  std::uint64_t mismatch_count = 0;
  BatchBranch branch = BatchBranch::LowerUpper;
  double tau_lower = 0.0;
  double tau_upper = 1.0;
  bool clamped = false;
};

/// UCB over the K^2 pairs (offered arm, own arm) fed with shifted rewards.
struct DownstreamBanditState {
  std::size_t K = 0;
  std::uint64_t horizon = 0;
  std::vector<std::uint64_t> counts;  // row-major over (offered, own)
  std::vector<double> means;
  std::size_t init_cursor = 0;  // first pair still lacking a sample
  std::uint64_t samples = 0;

  std::size_t pairs() const { return K * K; }
};

DownstreamBanditState pair_ucb_init(std::size_t K, std::uint64_t horizon);

/// Round-robin over pairs until each holds one sample, then the argmax of
/// mean + 2 sqrt(log(K^2 T^3) / n); ties to the lowest row-major pair.
std::pair<Arm, Arm> bandit_alg_step(const DownstreamBanditState& state);

/// Records reward - tau_hat(offered) on the played pair when the upstream
/// accepted the offer; otherwise leaves the state untouched.
void shifted_update(DownstreamBanditState& state, std::pair<Arm, Arm> played_pair,
                    Arm upstream_arm, double reward, const Vector& tau_hat);

enum class Phase { NoProperty, Phase1, Phase2 };

std::string_view to_string(Phase phase);

struct DownstreamAction {
  IncentiveOffer offer;
  Arm own_arm = 0;
  Phase phase = Phase::Phase2;
};

/// Downstream player of the property game: emits the triple
/// (offered arm, transfer, own arm) before the upstream moves.
class PropertyDownstream {
 public:
  virtual ~PropertyDownstream() = default;
  virtual DownstreamAction propose(std::uint64_t round, Rng& rng) = 0;
  virtual void observe(const DownstreamAction& action, Arm upstream_arm, double reward) = 0;
};

class Belgic final : public PropertyDownstream {
 public:
  explicit Belgic(BelgicParams params);

  DownstreamAction propose(std::uint64_t round, Rng& rng) override;
  void observe(const DownstreamAction& action, Arm upstream_arm, double reward) override;

  const BelgicParams& params() const { return params_; }
  Phase phase() const { return phase_; }
  const std::vector<BinarySearchState>& brackets() const { return brackets_; }
  const std::vector<BatchDiagnostic>& diagnostics() const { return diagnostics_; }
  const DownstreamBanditState& bandit_state() const { return bandit_; }
  /// Empty until phase 1 is over.
  const TransferEstimates& estimates() const { return estimates_; }
  std::uint64_t phase1_length() const { return phase1_length_; }

 private:
  void finish_batch();

  BelgicParams params_;
  std::uint64_t batch_len_;
  Phase phase_ = Phase::Phase1;
  std::uint64_t round_ = 0;
  Arm current_arm_ = 0;
  std::uint64_t batch_rounds_ = 0;
  std::uint64_t batch_mismatches_ = 0;
  std::vector<BinarySearchState> brackets_;
  std::vector<BatchDiagnostic> diagnostics_;
  TransferEstimates estimates_;
  DownstreamBanditState bandit_;
  std::uint64_t phase1_length_ = 0;
};

struct Phase1Result {
  TransferEstimates estimates;
  std::vector<BinarySearchState> brackets;
  std::vector<BatchDiagnostic> diagnostics;
  std::uint64_t length = 0;
};

/// Runs only the transfer-estimation phase of BELGIC against `upstream`,
/// sampling upstream rewards from `instance`.
Phase1Result run_phase1(const BanditInstance& instance, UpstreamPolicy& upstream,
                        const BelgicParams& params, Rng& rng);

/// Offers (a_sw, tau*(a_sw)) and plays b_sw every round.
class OracleDownstream final : public PropertyDownstream {
 public:
  explicit OracleDownstream(const BanditInstance& instance);
  DownstreamAction propose(std::uint64_t round, Rng& rng) override;
  void observe(const DownstreamAction&, Arm, double) override {}

 private:
  DownstreamAction action_;
};

/// Never pays: a zero offer on arm 0 and own arm 0 every round.
class ZeroTransferDownstream final : public PropertyDownstream {
 public:
  DownstreamAction propose(std::uint64_t, Rng&) override { return {}; }
  void observe(const DownstreamAction&, Arm, double) override {}
};

/// Downstream player without property rights: sees the upstream arm of the
/// current round and answers with her own arm.
class NoPropertyDownstream {
 public:
  virtual ~NoPropertyDownstream() = default;
  virtual Arm choose(Arm upstream_arm, Rng& rng) = 0;
  virtual void observe(Arm upstream_arm, Arm own_arm, double reward) = 0;
};

/// One independent UCB per observed upstream arm. Within a context: one pull
/// per arm first, then mean + sqrt(2 log(n_ctx) / n) with n_ctx the number of
/// earlier rounds in that context.
class ContextualUcb final : public NoPropertyDownstream {
 public:
  explicit ContextualUcb(std::size_t K);
  Arm choose(Arm upstream_arm, Rng& rng) override;
  void observe(Arm upstream_arm, Arm own_arm, double reward) override;

  std::uint64_t context_rounds(Arm context) const { return context_rounds_[context]; }

 private:
  std::size_t K_;
  std::vector<std::uint64_t> context_rounds_;
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> counts_;
  Matrix means_;
};

/// Plays argmax_b v_down(upstream_arm, b), lowest index on ties.
class BestResponseDownstream final : public NoPropertyDownstream {
 public:
  explicit BestResponseDownstream(Matrix v_down) : v_down_(std::move(v_down)) {}
  Arm choose(Arm upstream_arm, Rng& rng) override;
  void observe(Arm, Arm, double) override {}

 private:
  Matrix v_down_;
};

enum class DownstreamKind { Belgic, Oracle, ZeroTransfer, NaiveUcb, BestResponse };

std::string_view to_string(DownstreamKind kind);
DownstreamKind downstream_kind_from_string(std::string_view name);
bool is_property_kind(DownstreamKind kind);

}  // namespace coase
