#include "coase/game.hpp"

#include <algorithm>
#include <limits>

namespace coase {

std::string_view to_string(GameMode mode) {
  return mode == GameMode::Property ? "property" : "no_property";
}

GameMode game_mode_from_string(std::string_view name) {
  if (name == "property") return GameMode::Property;
  if (name == "no_property" || name == "no-property") return GameMode::NoProperty;
  throw ValidationError("unknown mode '" + std::string(name) +
                        "' (expected property or no_property)");
}

GapRecord per_round_gaps(const BanditInstance& instance, const Oracle& oracle,
                         const IncentiveOffer& offer, Arm upstream_arm, Arm downstream_arm) {
  const auto A = static_cast<Eigen::Index>(upstream_arm);
  const auto B = static_cast<Eigen::Index>(downstream_arm);
  const double v_up = instance.v_up(A);
  const double v_down = instance.v_down(A, B);
  const double paid = offer.paid_on(upstream_arm);

  double best_incentivized = -std::numeric_limits<double>::infinity();
  for (Arm a = 0; a < instance.K; ++a) {
    best_incentivized =
        std::max(best_incentivized, instance.v_up(static_cast<Eigen::Index>(a)) + offer.paid_on(a));
  }

  GapRecord g;
  g.up_n = oracle.mu_star_up - v_up;
  g.down_n = instance.v_down.row(A).maxCoeff() - v_down;
  g.sw = oracle.welfare_sw - (v_up + v_down);
  g.up_p = best_incentivized - (v_up + paid);
  g.down_p = oracle.mu_star_down - (v_down - paid);
  g.up_utility = v_up + paid;
  g.down_utility = v_down - paid;
  g.welfare = v_up + v_down;
  return g;
}

bool lemma1_identity_check(const BanditInstance& instance, const Oracle& oracle) {
  const auto a = static_cast<Eigen::Index>(oracle.a_sw);
  const auto b = static_cast<Eigen::Index>(oracle.b_sw);
  return oracle.mu_star_up + oracle.mu_star_down == instance.v_up(a) + instance.v_down(a, b);
}

void RegretLedger::add(const GapRecord& g) {
  ++rounds;
  r_up_n += g.up_n;
  r_down_n += g.down_n;
  r_sw += g.sw;
  r_up_p += g.up_p;
  r_down_p += g.down_p;
  up_utility += g.up_utility;
  down_utility += g.down_utility;
  welfare += g.welfare;
}

GameResult run_no_property(const BanditInstance& instance, UpstreamPolicy& upstream,
                           NoPropertyDownstream& downstream, std::uint64_t horizon,
                           std::uint64_t seed, const RunOptions& options) {
  const auto oracle = compute_oracle(instance);
  Rng rng(seed);
  GameResult result;
  result.seed = seed;
  if (options.keep_trajectory) result.trajectory.reserve(horizon);
  const IncentiveOffer none{};

  for (std::uint64_t t = 0; t < horizon; ++t) {
    const Arm a = upstream.choose(none, rng);
    const Arm b = downstream.choose(a, rng);
    const double z = sample_upstream(instance, a, rng);
    const double x = sample_downstream(instance, a, b, rng);
    upstream.observe(a, z);
    downstream.observe(a, b, x);

    const auto gaps = per_round_gaps(instance, oracle, none, a, b);
    result.ledger.add(gaps);
    if (options.keep_trajectory) {
      result.trajectory.push_back(RoundRecord{t + 1, Phase::NoProperty, none, a, b, z, x, gaps});
    }
  }
  return result;
}

GameResult run_property(const BanditInstance& instance, UpstreamPolicy& upstream,
                        PropertyDownstream& downstream, std::uint64_t horizon, std::uint64_t seed,
                        const RunOptions& options) {
  constexpr double kLemma1Slack = 1e-12;
  const auto oracle = compute_oracle(instance);
  Rng rng(seed);
  GameResult result;
  result.seed = seed;
  result.lemma1_min_margin = std::numeric_limits<double>::infinity();
  if (options.keep_trajectory) result.trajectory.reserve(horizon);

  for (std::uint64_t t = 0; t < horizon; ++t) {
    const auto action = downstream.propose(t, rng);
    const Arm a = upstream.choose(action.offer, rng);
    const Arm b = action.own_arm;
    const double z = sample_upstream(instance, a, rng);
    const double x = sample_downstream(instance, a, b, rng);
    upstream.observe(a, z);
    downstream.observe(action, a, x);

    const auto gaps = per_round_gaps(instance, oracle, action.offer, a, b);
    const double margin = gaps.up_p + gaps.down_p - gaps.sw;
    result.lemma1_min_margin = std::min(result.lemma1_min_margin, margin);
    if (margin < -kLemma1Slack) ++result.lemma1_violations;
    result.ledger.add(gaps);
    if (options.keep_trajectory) {
      result.trajectory.push_back(RoundRecord{t + 1, action.phase, action.offer, a, b, z, x, gaps});
    }
  }

  if (const auto* belgic = dynamic_cast<const Belgic*>(&downstream)) {
    if (belgic->phase() == Phase::Phase2) result.estimates = belgic->estimates();
    result.diagnostics = belgic->diagnostics();
    result.brackets = belgic->brackets();
    result.phase1_length = belgic->phase1_length();
  }
  return result;
}

BelgicParams GameSpec::belgic_params() const {
  BelgicParams p;
  p.K = instance.K;
  p.horizon = horizon;
  p.alpha = alpha;
  p.beta = beta;
  p.certificate = ucb_certificate(instance.K, horizon);
  if (fixed_C) p.certificate.C = *fixed_C;
  return p;
}

void validate_spec(const GameSpec& spec) {
  if (spec.horizon == 0) throw ValidationError("horizon must be positive");
  if (spec.upstream == UpstreamKind::Ucb) ucb_init(spec.instance.K, spec.horizon);
  const bool property_policy = is_property_kind(spec.downstream);
  if (spec.mode == GameMode::Property && !property_policy) {
    throw ValidationError("downstream policy '" + std::string(to_string(spec.downstream)) +
                          "' is not available in property mode");
  }
  if (spec.mode == GameMode::NoProperty && property_policy) {
    throw ValidationError("downstream policy '" + std::string(to_string(spec.downstream)) +
                          "' is not available in no_property mode");
  }
  if (spec.downstream == DownstreamKind::Belgic) validate_params(spec.belgic_params());
}

GameResult play(const GameSpec& spec, std::uint64_t seed, const RunOptions& options) {
  validate_spec(spec);
  auto upstream = make_upstream(spec.upstream, spec.instance, spec.horizon);
  if (spec.mode == GameMode::NoProperty) {
    std::unique_ptr<NoPropertyDownstream> downstream;
    if (spec.downstream == DownstreamKind::BestResponse) {
      downstream = std::make_unique<BestResponseDownstream>(spec.instance.v_down);
    } else {
      downstream = std::make_unique<ContextualUcb>(spec.instance.K);
    }
    return run_no_property(spec.instance, *upstream, *downstream, spec.horizon, seed, options);
  }
  std::unique_ptr<PropertyDownstream> downstream;
  switch (spec.downstream) {
    case DownstreamKind::Oracle:
      downstream = std::make_unique<OracleDownstream>(spec.instance);
      break;
    case DownstreamKind::ZeroTransfer:
      downstream = std::make_unique<ZeroTransferDownstream>();
      break;
    default:
      downstream = std::make_unique<Belgic>(spec.belgic_params());
      break;
  }
  return run_property(spec.instance, *upstream, *downstream, spec.horizon, seed, options);
}

}  // namespace coase
