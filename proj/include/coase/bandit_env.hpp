#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace coase {

using Arm = std::size_t;
using Rng = std::mt19937_64;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a user-supplied quantity violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class RewardModel { GaussianUnitVariance, Bernoulli };

std::string_view to_string(RewardModel model);
RewardModel reward_model_from_string(std::string_view name);

/// Ground truth of the two-player game. Row a of `v_down` holds the
/// downstream means when the upstream player pulls arm a.
struct BanditInstance {
  std::size_t K = 0;
  Vector v_up;
  Matrix v_down;
  RewardModel reward_model = RewardModel::GaussianUnitVariance;

  double welfare(Arm a, Arm b) const { return v_up(a) + v_down(a, b); }
};

/// Validates dimensions and that every mean lies in [0, 1].
BanditInstance build_instance(std::size_t K, const Vector& v_up, const Matrix& v_down,
                              RewardModel reward_model);

double sample_upstream(const BanditInstance& instance, Arm arm, Rng& rng);
double sample_downstream(const BanditInstance& instance, Arm a, Arm b, Rng& rng);

/// Closed-form benchmarks computed by enumeration over the finite action sets.
/// Every argmax breaks ties toward the lowest index (row-major for pairs).
struct Oracle {
  Arm a_sw = 0;
  Arm b_sw = 0;
  double welfare_sw = 0.0;
  Vector tau_star;
  double mu_star_up = 0.0;
  double mu_star_down = 0.0;
  double delta_up = 0.0;
  double delta_sw = 0.0;
  double v_bar = 0.0;
  double v_under = 0.0;
  Arm a_star_up = 0;
  bool a_star_up_unique = true;
};

Oracle compute_oracle(const BanditInstance& instance);

/// Whether the upstream's privately optimal arm loses welfare against
/// (a_sw, b_sw) for every downstream response. Throws ValidationError if the
/// argmax of v_up is not a singleton.
bool misalignment_holds(const BanditInstance& instance, const Oracle& oracle);

/// Draws means uniformly in [0, 1]; with `require_misalignment`, redraws until
/// the argmax of v_up is unique and misalignment holds.
BanditInstance generate_instance(std::size_t K, std::uint64_t seed, RewardModel reward_model,
                                 bool require_misalignment);

}  // namespace coase
