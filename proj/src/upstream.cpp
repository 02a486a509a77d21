#include "coase/upstream.hpp"

#include <cmath>

namespace coase {

RegretCertificate ucb_certificate(std::size_t K, std::uint64_t horizon) {
  const double k = static_cast<double>(K);
  const double T = static_cast<double>(horizon);
  return RegretCertificate{8.0 * std::sqrt(k * std::log(k * T * T * T)), 0.5, 2.0};
}

UpstreamState ucb_init(std::size_t K, std::uint64_t horizon) {
  if (K == 0) throw ValidationError("K must be positive");
  if (horizon < K) {
    throw ValidationError("horizon " + std::to_string(horizon) +
                          " cannot cover the K=" + std::to_string(K) + " initialization rounds");
  }
  UpstreamState s;
  s.K = K;
  s.horizon = horizon;
  s.pull_counts.assign(K, 0);
  s.empirical_means = Vector::Zero(static_cast<Eigen::Index>(K));
  return s;
}

double ucb_index(const UpstreamState& state, const IncentiveOffer& offer, Arm a) {
  const double T = static_cast<double>(state.horizon);
  const double log_term = std::log(static_cast<double>(state.K) * T * T * T);
  const double n = static_cast<double>(state.pull_counts[a]);
  return state.empirical_means(static_cast<Eigen::Index>(a)) + 2.0 * std::sqrt(log_term / n) +
         offer.paid_on(a);
}

Arm ucb_step(const UpstreamState& state, const IncentiveOffer& offer) {
  if (state.round < state.K) return static_cast<Arm>(state.round);
  Arm best = 0;
  double best_index = ucb_index(state, offer, 0);
  for (Arm a = 1; a < state.K; ++a) {
    const double idx = ucb_index(state, offer, a);
    if (idx > best_index) {
      best_index = idx;
      best = a;
    }
  }
  return best;
}

void ucb_update(UpstreamState& state, Arm arm, double reward) {
  const auto n = ++state.pull_counts[arm];
  auto& mean = state.empirical_means(static_cast<Eigen::Index>(arm));
  mean = (static_cast<double>(n - 1) * mean + reward) / static_cast<double>(n);
  ++state.round;
}

Arm IncentiveUcb::choose(const IncentiveOffer& offer, Rng&) { return ucb_step(state_, offer); }

Arm best_response(const Vector& v_up, const IncentiveOffer& offer) {
  // Starting from the offered arm and replacing only on strict improvement
  // gives the documented tie order when scanning arms in ascending order.
  Arm best = offer.target_arm;
  double best_value = v_up(static_cast<Eigen::Index>(best)) + offer.amount;
  for (Arm a = 0; a < static_cast<Arm>(v_up.size()); ++a) {
    const double value = v_up(static_cast<Eigen::Index>(a)) + offer.paid_on(a);
    if (value > best_value) {
      best_value = value;
      best = a;
    }
  }
  return best;
}

Arm BestResponseUpstream::choose(const IncentiveOffer& offer, Rng&) {
  return best_response(v_up_, offer);
}

std::string_view to_string(UpstreamKind kind) {
  return kind == UpstreamKind::Ucb ? "ucb" : "best_response";
}

UpstreamKind upstream_kind_from_string(std::string_view name) {
  if (name == "ucb") return UpstreamKind::Ucb;
  if (name == "best_response") return UpstreamKind::BestResponse;
  throw ValidationError("unknown upstream policy '" + std::string(name) +
                        "' (expected ucb or best_response)");
}

std::unique_ptr<UpstreamPolicy> make_upstream(UpstreamKind kind, const BanditInstance& instance,
                                              std::uint64_t horizon) {
  if (kind == UpstreamKind::BestResponse) {
    return std::make_unique<BestResponseUpstream>(instance.v_up);
  }
  return std::make_unique<IncentiveUcb>(instance.K, horizon);
}

}  // namespace coase
