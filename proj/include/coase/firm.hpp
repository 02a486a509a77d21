#pragma once

#include <Eigen/Dense>

namespace coase {

/// Two price-taking firms with quadratic costs c_i(q) = k_i q^2 / 2. Firm 1's
/// output imposes a linear external cost `alpha` per unit on firm 2.
struct FirmExample {
  double p = 10.0;
  double k1 = 1.0;
  double k2 = 1.0;
  double alpha = 2.0;
};

void validate(const FirmExample& ex);

double profit1(const FirmExample& ex, double q1);
double profit2(const FirmExample& ex, double q1, double q2);
double welfare(const FirmExample& ex, const Eigen::Vector2d& q);

struct FirmReport {
  Eigen::Vector2d competitive;
  Eigen::Vector2d efficient;
  double welfare_competitive = 0.0;
  double welfare_efficient = 0.0;
  double transfer = 0.0;              // max_q pi1(q) - pi1(q1*)
  double bargaining_welfare = 0.0;    // (pi1* + tau) + (pi2* - tau)
  bool grid_optimal = false;          // W(q*) >= W on a 100x100 grid around q*
};

FirmReport firm_demo(const FirmExample& ex);

}  // namespace coase
