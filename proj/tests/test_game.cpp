#include <doctest.h>

#include <cmath>

#include "coase/acceptance.hpp"
#include "helpers.hpp"

using namespace coase;
using coase::testing::example_instance;
using coase::testing::make_instance;

namespace {

GameSpec property_spec(const BanditInstance& inst, std::uint64_t T, UpstreamKind up,
                       DownstreamKind down, double C = 1.0) {
  GameSpec s;
  s.instance = inst;
  s.mode = GameMode::Property;
  s.horizon = T;
  s.upstream = up;
  s.downstream = down;
  s.fixed_C = C;
  return s;
}

GameSpec no_property_spec(const BanditInstance& inst, std::uint64_t T, UpstreamKind up,
                          DownstreamKind down) {
  GameSpec s;
  s.instance = inst;
  s.mode = GameMode::NoProperty;
  s.horizon = T;
  s.upstream = up;
  s.downstream = down;
  return s;
}

// Checks every invariant that must hold round by round on a trajectory.
void check_ledger_invariants(const GameSpec& spec, const GameResult& r) {
  RegretLedger running;
  for (const auto& rec : r.trajectory) {
    const auto prev = running;
    running.add(rec.gaps);
    CHECK(running.r_sw >= prev.r_sw);
    CHECK(rec.gaps.sw >= 0.0);
    CHECK(rec.gaps.down_n >= 0.0);
    if (spec.mode == GameMode::NoProperty) {
      CHECK(rec.gaps.up_n >= 0.0);
    } else {
      CHECK(rec.gaps.up_p >= 0.0);
      // max_a {v_up(a) + paid(a)} >= mu*_up because transfers are >= 0, and
      // the transfer terms cancel in gap_up_p + gap_down_p, leaving
      // >= mu*_up + mu*_down - welfare(A, B) = gap_sw.
      CHECK(rec.gaps.up_p + rec.gaps.down_p >= rec.gaps.sw - 1e-12);
    }
    CHECK(rec.gaps.up_utility + rec.gaps.down_utility ==
          doctest::Approx(rec.gaps.welfare).epsilon(1e-15));
  }
  CHECK(running.r_sw == r.ledger.r_sw);
  CHECK(r.ledger.up_utility + r.ledger.down_utility ==
        doctest::Approx(r.ledger.welfare).epsilon(1e-12));
  CHECK(r.lemma1_violations == 0);
}

}  // namespace

TEST_CASE("per-round gaps on the example instance") {
  const auto inst = example_instance();
  const auto o = compute_oracle(inst);
  const auto g = per_round_gaps(inst, o, {}, 0, 1);
  CHECK(g.sw == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(g.up_n == 0.0);
  CHECK(g.down_n == 0.0);

  const auto p = per_round_gaps(inst, o, IncentiveOffer{1, 0.7}, 1, 0);
  CHECK(p.up_p == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(p.up_p) < 1e-15);
  CHECK(std::abs(p.down_p) < 1e-15);
  CHECK(p.sw == 0.0);
  CHECK(p.up_utility == doctest::Approx(1.0));
  CHECK(p.down_utility == doctest::Approx(0.2));

  const auto z = per_round_gaps(inst, o, IncentiveOffer{0, 0.0}, 0, 0);
  CHECK(z.up_p == 0.0);
}

TEST_CASE("welfare decomposition identity") {
  const auto inst = example_instance();
  const auto o = compute_oracle(inst);
  CHECK(lemma1_identity_check(inst, o));
  CHECK(o.mu_star_up + o.mu_star_down == doctest::Approx(1.2).epsilon(1e-15));

  const auto flat = make_instance({0.3, 0.3, 0.3}, {{0.1, 0.9, 0.4}, {0.2, 0.5, 0.0}, {1, 0, 0}});
  CHECK(lemma1_identity_check(flat, compute_oracle(flat)));

  for (std::uint64_t i = 0; i < 50; ++i) {
    const std::size_t Ks[] = {2, 3, 5};
    const auto r = generate_instance(Ks[i % 3], 1000 + i, RewardModel::GaussianUnitVariance, false);
    CHECK(lemma1_identity_check(r, compute_oracle(r)));
  }
}

TEST_CASE("no-property oracle doubles incur exactly the welfare gap every round") {
  const auto inst = example_instance();
  const auto o = compute_oracle(inst);
  const std::uint64_t T = 5000;
  const auto r = play(no_property_spec(inst, T, UpstreamKind::BestResponse,
                                       DownstreamKind::BestResponse), 1);
  CHECK(r.ledger.r_sw == doctest::Approx(T * o.delta_sw).epsilon(1e-12));
  CHECK(r.ledger.r_up_n == 0.0);
  CHECK(r.ledger.r_down_n == 0.0);

  const auto aligned = make_instance({1.0, 0.3}, {{0.9, 0.0}, {0.1, 0.2}});
  const auto a = play(no_property_spec(aligned, T, UpstreamKind::BestResponse,
                                       DownstreamKind::BestResponse), 1);
  CHECK(a.ledger.r_sw == 0.0);
}

TEST_CASE("no-property UCB + naive downstream obeys the path-wise breakdown bound") {
  const auto inst = example_instance();
  const auto o = compute_oracle(inst);
  const std::uint64_t T = 1 << 14;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto spec = no_property_spec(inst, T, UpstreamKind::Ucb, DownstreamKind::NaiveUcb);
    const auto r = play(spec, seed, RunOptions{true});
    const double Td = static_cast<double>(T);
    const double lower = o.delta_sw * (1.0 - r.ledger.r_up_n / (Td * o.delta_up));
    CHECK(r.ledger.r_sw / Td >= lower - 1e-12);
    CHECK(r.ledger.r_sw / Td <= o.delta_sw + 1e-12);
    check_ledger_invariants(spec, r);
  }
}

TEST_CASE("property oracle doubles reach the downstream optimum") {
  const auto inst = example_instance();
  const auto spec = property_spec(inst, 3000, UpstreamKind::BestResponse, DownstreamKind::Oracle);
  const auto r = play(spec, 9, RunOptions{true});
  for (const auto& rec : r.trajectory) {
    CHECK(rec.upstream_arm == 1);
    CHECK(rec.downstream_arm == 0);
    CHECK(std::abs(rec.gaps.down_p) < 1e-15);
    CHECK(rec.gaps.sw == 0.0);
  }
}

TEST_CASE("zero transfers reduce the upstream to the no-property dynamics") {
  const auto inst = example_instance();
  const std::uint64_t T = 4000;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto p = play(property_spec(inst, T, UpstreamKind::Ucb, DownstreamKind::ZeroTransfer), seed);
    const auto n = play(no_property_spec(inst, T, UpstreamKind::Ucb, DownstreamKind::NaiveUcb), seed);
    CHECK(p.ledger.r_up_p == n.ledger.r_up_n);
  }
}

TEST_CASE("property runs keep every ledger invariant") {
  const auto inst = example_instance();
  for (auto up : {UpstreamKind::Ucb, UpstreamKind::BestResponse}) {
    for (auto down : {DownstreamKind::Belgic, DownstreamKind::Oracle, DownstreamKind::ZeroTransfer}) {
      const auto spec = property_spec(inst, 1 << 14, up, down, 1.68);
      const auto r = play(spec, 4, RunOptions{true});
      CHECK(r.trajectory.size() == spec.horizon);
      check_ledger_invariants(spec, r);
      if (down == DownstreamKind::Belgic) {
        const auto p = spec.belgic_params();
        const double T = static_cast<double>(p.horizon);
        const double slack = 4.0 * precision(p) + p.certificate.C * std::pow(T, -0.25);
        CHECK(r.ledger.r_down_p >= -T * slack);
        REQUIRE(r.estimates.has_value());
        CHECK(r.phase1_length > 0);
        CHECK(r.trajectory[r.phase1_length - 1].phase == Phase::Phase1);
        CHECK(r.trajectory[r.phase1_length].phase == Phase::Phase2);
      }
    }
  }
}

TEST_CASE("BELGIC welfare regret per round shrinks with the horizon") {
  const auto inst = example_instance();
  auto mean_rate = [&](std::uint64_t T) {
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto spec = property_spec(inst, T, UpstreamKind::Ucb, DownstreamKind::Belgic, calibrated_c(2, T));
      total += play(spec, seed).ledger.r_sw / static_cast<double>(T);
    }
    return total / 10.0;
  };
  CHECK(mean_rate(1 << 16) < 0.5 * mean_rate(1 << 11));
}

TEST_CASE("identical spec and seed give identical ledgers") {
  const auto spec = property_spec(example_instance(), 1 << 13, UpstreamKind::Ucb,
                                  DownstreamKind::Belgic, 1.0);
  const auto a = play(spec, 77, RunOptions{true});
  const auto b = play(spec, 77, RunOptions{true});
  CHECK(a.ledger.r_sw == b.ledger.r_sw);
  CHECK(a.ledger.r_down_p == b.ledger.r_down_p);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    REQUIRE(a.trajectory[i].offer.amount == b.trajectory[i].offer.amount);
    REQUIRE(a.trajectory[i].upstream_arm == b.trajectory[i].upstream_arm);
    REQUIRE(a.trajectory[i].downstream_arm == b.trajectory[i].downstream_arm);
  }
}

TEST_CASE("validate_spec rejects mismatched mode and policy") {
  auto spec = property_spec(example_instance(), 1 << 14, UpstreamKind::Ucb, DownstreamKind::NaiveUcb);
  CHECK_THROWS_AS(validate_spec(spec), ValidationError);
  spec.mode = GameMode::NoProperty;
  CHECK_NOTHROW(validate_spec(spec));
  spec.downstream = DownstreamKind::Belgic;
  CHECK_THROWS_AS(validate_spec(spec), ValidationError);
  CHECK(game_mode_from_string("no-property") == GameMode::NoProperty);
  CHECK_THROWS_AS(game_mode_from_string("anarchy"), ValidationError);
}
