#include <doctest.h>

#include <cmath>

#include "helpers.hpp"

using namespace coase;
using coase::testing::example_instance;
using coase::testing::make_instance;

TEST_CASE("build_instance validates ranges and shapes") {
  CHECK_NOTHROW(example_instance());

  Vector up(2);
  up << 1.2, 0.3;
  Matrix down = Matrix::Zero(2, 2);
  CHECK_THROWS_AS(build_instance(2, up, down, RewardModel::GaussianUnitVariance), ValidationError);

  up << 1.0, 0.3;
  CHECK_THROWS_AS(build_instance(2, up, Matrix::Zero(3, 2), RewardModel::GaussianUnitVariance),
                  ValidationError);
  down(1, 1) = -0.1;
  CHECK_THROWS_AS(build_instance(2, up, down, RewardModel::Bernoulli), ValidationError);
  CHECK_THROWS_AS(build_instance(3, up, Matrix::Zero(3, 3), RewardModel::Bernoulli), ValidationError);
}

TEST_CASE("degenerate Bernoulli draws") {
  const auto inst = make_instance({1.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}});
  auto bern = inst;
  bern.reward_model = RewardModel::Bernoulli;
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    CHECK(sample_upstream(bern, 0, rng) == 1.0);
    CHECK(sample_upstream(bern, 1, rng) == 0.0);
    CHECK(sample_downstream(bern, 0, 0, rng) == 1.0);
    CHECK(sample_downstream(bern, 0, 1, rng) == 0.0);
  }
}

TEST_CASE("sampling rejects out-of-range arms") {
  const auto inst = example_instance();
  Rng rng(1);
  CHECK_THROWS_AS(sample_upstream(inst, 2, rng), std::out_of_range);
  CHECK_THROWS_AS(sample_downstream(inst, 0, 2, rng), std::out_of_range);
}

TEST_CASE("Gaussian sample means over 10^6 draws") {
  const auto inst = make_instance({0.5, 0.1}, {{0.9, 0.0}, {0.0, 0.0}});
  Rng rng(11);
  double up = 0.0, down = 0.0, sq = 0.0;
  constexpr int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double z = sample_upstream(inst, 0, rng);
    up += z;
    sq += (z - 0.5) * (z - 0.5);
    down += sample_downstream(inst, 0, 0, rng);
  }
  CHECK(std::abs(up / n - 0.5) < 0.01);
  CHECK(std::abs(down / n - 0.9) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.01);
}

TEST_CASE("sub-Gaussian concentration sanity") {
  const auto inst = make_instance({0.3, 0.7}, {{0.2, 0.4}, {0.6, 0.8}});
  constexpr int n = 400;
  constexpr int seeds = 400;
  constexpr double delta = 0.05;
  const double radius = 4.0 * std::sqrt(std::log(1.0 / delta) / n);
  for (auto model : {RewardModel::GaussianUnitVariance, RewardModel::Bernoulli}) {
    auto in = inst;
    in.reward_model = model;
    int failures = 0;
    for (int s = 0; s < seeds; ++s) {
      Rng rng(100 + s);
      double m = 0.0;
      for (int i = 0; i < n; ++i) m += sample_downstream(in, 1, 0, rng);
      if (std::abs(m / n - 0.6) >= radius) ++failures;
    }
    CHECK(static_cast<double>(failures) / seeds <= delta);
  }
}

TEST_CASE("oracle of the example instance") {
  const auto o = compute_oracle(example_instance());
  CHECK(o.a_sw == 1);
  CHECK(o.b_sw == 0);
  CHECK(o.welfare_sw == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(o.tau_star(0) == 0.0);
  CHECK(o.tau_star(1) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(o.mu_star_up == 1.0);
  CHECK(o.mu_star_down == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(o.delta_up == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(o.delta_sw == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(o.v_bar == 0.9);
  CHECK(o.v_under == 0.0);
  CHECK(o.a_star_up == 0);
  CHECK(o.a_star_up_unique);
}

// Independent reference: brute force over every (a, b) and over a grid of
// transfers, smallest tau making arm a a best response.
TEST_CASE("oracle agrees with brute force on random instances") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t K = 2 + seed % 4;
    const auto inst = generate_instance(K, seed, RewardModel::GaussianUnitVariance, false);
    const auto o = compute_oracle(inst);
    double best = -1.0;
    for (Arm a = 0; a < K; ++a) {
      for (Arm b = 0; b < K; ++b) best = std::max(best, inst.welfare(a, b));
    }
    CHECK(o.welfare_sw == best);
    CHECK(inst.welfare(o.a_sw, o.b_sw) == best);

    constexpr double step = 1e-4;
    for (Eigen::Index a = 0; a < inst.v_up.size(); ++a) {
      double tau = 0.0;
      auto wins = [&](double t) {
        for (Eigen::Index x = 0; x < inst.v_up.size(); ++x) {
          if (x != a && inst.v_up(x) > inst.v_up(a) + t) return false;
        }
        return true;
      };
      while (!wins(tau)) tau += step;
      CHECK(o.tau_star(a) <= tau + 1e-12);
      CHECK(o.tau_star(a) > tau - step - 1e-12);
      CHECK(o.tau_star(a) == o.mu_star_up - inst.v_up(a));
      CHECK(o.tau_star(a) >= 0.0);
    }
    CHECK(o.tau_star(static_cast<Eigen::Index>(o.a_star_up)) == 0.0);
  }
}

TEST_CASE("three-arm transfers") {
  const auto inst = make_instance({0.9, 0.5, 0.2}, {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  const auto o = compute_oracle(inst);
  CHECK(o.tau_star(0) == 0.0);
  CHECK(o.tau_star(1) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(o.tau_star(2) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(o.delta_up == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("constant v_up gives zero transfers and a non-unique argmax") {
  const auto inst = make_instance({0.4, 0.4, 0.4}, {{0.1, 0.2, 0.3}, {0.3, 0.2, 0.1}, {0, 0, 1}});
  const auto o = compute_oracle(inst);
  CHECK(o.tau_star.isZero(0.0));
  CHECK_FALSE(o.a_star_up_unique);
  CHECK(o.a_star_up == 0);
  CHECK(o.delta_up == 0.0);
  CHECK_THROWS_AS(misalignment_holds(inst, o), ValidationError);
}

TEST_CASE("ties break toward the lowest index") {
  const auto inst = make_instance({0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}});
  const auto o = compute_oracle(inst);
  CHECK(o.a_sw == 0);
  CHECK(o.b_sw == 0);
}

TEST_CASE("misalignment") {
  const auto inst = example_instance();
  CHECK(misalignment_holds(inst, compute_oracle(inst)));

  const auto aligned = make_instance({1.0, 0.3}, {{0.9, 0.0}, {0.1, 0.2}});
  CHECK_FALSE(misalignment_holds(aligned, compute_oracle(aligned)));

  const auto tie = make_instance({0.5, 0.5}, {{0, 0}, {0, 0}});
  CHECK_THROWS_AS(misalignment_holds(tie, compute_oracle(tie)), ValidationError);
}

TEST_CASE("compute_oracle is pure") {
  const auto inst = generate_instance(4, 9, RewardModel::Bernoulli, false);
  const auto a = compute_oracle(inst);
  const auto b = compute_oracle(inst);
  CHECK(a.tau_star == b.tau_star);
  CHECK(a.mu_star_down == b.mu_star_down);
  CHECK(a.delta_sw == b.delta_sw);
}

TEST_CASE("generator honours the misalignment requirement and its seed") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = generate_instance(3, seed, RewardModel::GaussianUnitVariance, true);
    const auto o = compute_oracle(inst);
    CHECK(o.a_star_up_unique);
    CHECK(misalignment_holds(inst, o));
    const auto again = generate_instance(3, seed, RewardModel::GaussianUnitVariance, true);
    CHECK(again.v_up == inst.v_up);
    CHECK(again.v_down == inst.v_down);
  }
  CHECK_THROWS_AS(generate_instance(1, 0, RewardModel::Bernoulli, true), ValidationError);
}

TEST_CASE("reward model names") {
  CHECK(reward_model_from_string("gaussian") == RewardModel::GaussianUnitVariance);
  CHECK(reward_model_from_string("bernoulli") == RewardModel::Bernoulli);
  CHECK(to_string(RewardModel::Bernoulli) == "bernoulli");
  CHECK_THROWS_AS(reward_model_from_string("poisson"), ValidationError);
}
