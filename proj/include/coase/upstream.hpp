#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "coase/bandit_env.hpp"

namespace coase {

/// Transfer proposed by the downstream player: `amount` is paid iff the
/// upstream player pulls `target_arm`. A zero amount stands for "no offer".
struct IncentiveOffer {
  Arm target_arm = 0;
  double amount = 0.0;

  double paid_on(Arm a) const { return a == target_arm ? amount : 0.0; }
};

/// Constants (C, kappa, zeta) of a high-probability batched regret bound
/// C * t^kappa holding with probability at least 1 - t^-zeta.
struct RegretCertificate {
  double C = 0.0;
  double kappa = 0.5;
  double zeta = 2.0;
};

/// C = 8 sqrt(K log(K T^3)), kappa = 1/2, zeta = 2 (natural log).
RegretCertificate ucb_certificate(std::size_t K, std::uint64_t horizon);

class UpstreamPolicy {
 public:
  virtual ~UpstreamPolicy() = default;
  virtual Arm choose(const IncentiveOffer& offer, Rng& rng) = 0;
  virtual void observe(Arm arm, double reward) = 0;
};

struct UpstreamState {
  std::size_t K = 0;
  std::uint64_t horizon = 0;
  std::uint64_t round = 0;  // completed rounds
  std::vector<std::uint64_t> pull_counts;
  Vector empirical_means;
};

UpstreamState ucb_init(std::size_t K, std::uint64_t horizon);

/// mu_hat(a) + 2 sqrt(log(K T^3) / T_a) + 1{a = target} * amount.
double ucb_index(const UpstreamState& state, const IncentiveOffer& offer, Arm a);

/// Arm pulled at the next round. The first K rounds pull arms 0..K-1 in order
/// regardless of the offer; afterwards the index argmax, lowest arm on ties.
Arm ucb_step(const UpstreamState& state, const IncentiveOffer& offer);

void ucb_update(UpstreamState& state, Arm arm, double reward);

/// Incentive-aware UCB over upstream rewards; transfers enter only the index.
class IncentiveUcb final : public UpstreamPolicy {
 public:
  IncentiveUcb(std::size_t K, std::uint64_t horizon) : state_(ucb_init(K, horizon)) {}

  Arm choose(const IncentiveOffer& offer, Rng& rng) override;
  void observe(Arm arm, double reward) override { ucb_update(state_, arm, reward); }

  const UpstreamState& state() const { return state_; }

 private:
  UpstreamState state_;
};

/// Knows v_up and plays argmax_a v_up(a) + 1{a = target} * amount. Ties go to
/// the offered arm first, then to the lowest index.
class BestResponseUpstream final : public UpstreamPolicy {
 public:
  explicit BestResponseUpstream(Vector v_up) : v_up_(std::move(v_up)) {}

  Arm choose(const IncentiveOffer& offer, Rng& rng) override;
  void observe(Arm, double) override {}

 private:
  Vector v_up_;
};

Arm best_response(const Vector& v_up, const IncentiveOffer& offer);

enum class UpstreamKind { Ucb, BestResponse };

std::string_view to_string(UpstreamKind kind);
UpstreamKind upstream_kind_from_string(std::string_view name);

std::unique_ptr<UpstreamPolicy> make_upstream(UpstreamKind kind, const BanditInstance& instance,
                                              std::uint64_t horizon);

}  // namespace coase
