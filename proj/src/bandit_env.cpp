#include "coase/bandit_env.hpp"

#include <limits>

namespace coase {

std::string_view to_string(RewardModel model) {
  switch (model) {
    case RewardModel::GaussianUnitVariance:
      return "gaussian";
    case RewardModel::Bernoulli:
      return "bernoulli";
  }
  return "gaussian";
}

RewardModel reward_model_from_string(std::string_view name) {
  if (name == "gaussian") return RewardModel::GaussianUnitVariance;
  if (name == "bernoulli") return RewardModel::Bernoulli;
  throw ValidationError("unknown reward model '" + std::string(name) +
                        "' (expected gaussian or bernoulli)");
}

namespace {

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

double draw(RewardModel model, double mean, Rng& rng) {
  if (model == RewardModel::Bernoulli) {
    return std::bernoulli_distribution(mean)(rng) ? 1.0 : 0.0;
  }
  return std::normal_distribution<double>(mean, 1.0)(rng);
}

}  // namespace

BanditInstance build_instance(std::size_t K, const Vector& v_up, const Matrix& v_down,
                              RewardModel reward_model) {
  if (K == 0) throw ValidationError("K must be positive");
  if (static_cast<std::size_t>(v_up.size()) != K) {
    throw ValidationError("v_up has " + std::to_string(v_up.size()) + " entries, expected K=" +
                          std::to_string(K));
  }
  if (static_cast<std::size_t>(v_down.rows()) != K ||
      static_cast<std::size_t>(v_down.cols()) != K) {
    throw ValidationError("v_down is " + std::to_string(v_down.rows()) + "x" +
                          std::to_string(v_down.cols()) + ", expected " + std::to_string(K) +
                          "x" + std::to_string(K));
  }
  for (Eigen::Index a = 0; a < v_up.size(); ++a) {
    if (!in_unit_interval(v_up(a))) {
      throw ValidationError("v_up(" + std::to_string(a) + ") must lie in [0,1]");
    }
  }
  for (Eigen::Index a = 0; a < v_down.rows(); ++a) {
    for (Eigen::Index b = 0; b < v_down.cols(); ++b) {
      if (!in_unit_interval(v_down(a, b))) {
        throw ValidationError("v_down(" + std::to_string(a) + "," + std::to_string(b) +
                              ") must lie in [0,1]");
      }
    }
  }
  return BanditInstance{K, v_up, v_down, reward_model};
}

double sample_upstream(const BanditInstance& instance, Arm arm, Rng& rng) {
  if (arm >= instance.K) throw std::out_of_range("upstream arm out of range");
  return draw(instance.reward_model, instance.v_up(static_cast<Eigen::Index>(arm)), rng);
}

double sample_downstream(const BanditInstance& instance, Arm a, Arm b, Rng& rng) {
  if (a >= instance.K || b >= instance.K) throw std::out_of_range("downstream pair out of range");
  return draw(instance.reward_model,
              instance.v_down(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)), rng);
}

Oracle compute_oracle(const BanditInstance& instance) {
  const auto K = static_cast<Eigen::Index>(instance.K);
  Oracle o;

  // Eigen's maxCoeff returns the first maximiser, which is the lowest index.
  Eigen::Index a_star = 0;
  o.mu_star_up = instance.v_up.maxCoeff(&a_star);
  o.a_star_up = static_cast<Arm>(a_star);
  o.a_star_up_unique = true;
  o.delta_up = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < K; ++a) {
    if (a == a_star) continue;
    if (instance.v_up(a) == o.mu_star_up) o.a_star_up_unique = false;
    o.delta_up = std::min(o.delta_up, o.mu_star_up - instance.v_up(a));
  }
  if (K == 1) o.delta_up = 0.0;

  o.tau_star = Vector::Constant(K, o.mu_star_up) - instance.v_up;

  o.welfare_sw = -std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < K; ++a) {
    for (Eigen::Index b = 0; b < K; ++b) {
      const double w = instance.v_up(a) + instance.v_down(a, b);
      if (w > o.welfare_sw) {
        o.welfare_sw = w;
        o.a_sw = static_cast<Arm>(a);
        o.b_sw = static_cast<Arm>(b);
      }
    }
  }
  o.mu_star_down = o.welfare_sw - o.mu_star_up;

  double best_response_welfare = -std::numeric_limits<double>::infinity();
  for (Eigen::Index b = 0; b < K; ++b) {
    best_response_welfare =
        std::max(best_response_welfare, instance.v_up(a_star) + instance.v_down(a_star, b));
  }
  o.delta_sw = o.welfare_sw - best_response_welfare;

  o.v_bar = instance.v_down.maxCoeff();
  o.v_under = instance.v_down.minCoeff();
  return o;
}

bool misalignment_holds(const BanditInstance& instance, const Oracle& oracle) {
  if (!oracle.a_star_up_unique) {
    throw ValidationError("misalignment requires a unique upstream-optimal arm");
  }
  const auto a = static_cast<Eigen::Index>(oracle.a_star_up);
  for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(instance.K); ++b) {
    if (!(oracle.welfare_sw > instance.v_up(a) + instance.v_down(a, b))) return false;
  }
  return true;
}

BanditInstance generate_instance(std::size_t K, std::uint64_t seed, RewardModel reward_model,
                                 bool require_misalignment) {
  if (K == 0) throw ValidationError("K must be positive");
  if (require_misalignment && K < 2) {
    throw ValidationError("misalignment needs at least two arms");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(K);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vector v_up(n);
    Matrix v_down(n, n);
    for (Eigen::Index a = 0; a < n; ++a) v_up(a) = unit(rng);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) v_down(a, b) = unit(rng);
    }
    auto instance = build_instance(K, v_up, v_down, reward_model);
    if (!require_misalignment) return instance;
    const auto oracle = compute_oracle(instance);
    if (oracle.a_star_up_unique && misalignment_holds(instance, oracle)) return instance;
  }
  throw ValidationError("generator could not find a misaligned instance");
}

}  // namespace coase
