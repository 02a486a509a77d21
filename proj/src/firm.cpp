#include "coase/firm.hpp"

#include <cmath>

#include "coase/bandit_env.hpp"

namespace coase {

void validate(const FirmExample& ex) {
  if (!(ex.p > 0.0)) throw ValidationError("firm example: p must be positive");
  if (!(ex.k1 > 0.0) || !(ex.k2 > 0.0)) throw ValidationError("firm example: k1, k2 must be positive");
  if (!(ex.alpha >= 0.0)) throw ValidationError("firm example: alpha must be nonnegative");
  if (!(ex.p - ex.alpha > 0.0)) throw ValidationError("firm example: p - alpha must be positive");
}

double profit1(const FirmExample& ex, double q1) { return ex.p * q1 - ex.k1 * q1 * q1 / 2.0; }

double profit2(const FirmExample& ex, double q1, double q2) {
  return ex.p * q2 - ex.k2 * q2 * q2 / 2.0 - ex.alpha * q1;
}

double welfare(const FirmExample& ex, const Eigen::Vector2d& q) {
  return profit1(ex, q(0)) + profit2(ex, q(0), q(1));
}

FirmReport firm_demo(const FirmExample& ex) {
  validate(ex);
  FirmReport r;

  // Each firm sets marginal cost to price, ignoring the externality.
  r.competitive << ex.p / ex.k1, ex.p / ex.k2;

  // W is concave quadratic: grad W = g + H q with H = -diag(k1, k2).
  const Eigen::Vector2d g(ex.p - ex.alpha, ex.p);
  const Eigen::Matrix2d H = Eigen::Vector2d(-ex.k1, -ex.k2).asDiagonal();
  r.efficient = H.ldlt().solve(-g);

  r.welfare_competitive = welfare(ex, r.competitive);
  r.welfare_efficient = welfare(ex, r.efficient);

  const double q1 = r.efficient(0);
  const double q2 = r.efficient(1);
  r.transfer = profit1(ex, r.competitive(0)) - profit1(ex, q1);
  r.bargaining_welfare = (profit1(ex, q1) + r.transfer) + (profit2(ex, q1, q2) - r.transfer);

  constexpr int kGrid = 100;
  r.grid_optimal = true;
  const Eigen::Vector2d span = r.efficient.cwiseAbs().cwiseMax(1.0);
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const Eigen::Vector2d q(q1 + span(0) * (2.0 * i / (kGrid - 1) - 1.0),
                              q2 + span(1) * (2.0 * j / (kGrid - 1) - 1.0));
      if (welfare(ex, q) > r.welfare_efficient) r.grid_optimal = false;
    }
  }
  return r;
}

}  // namespace coase
