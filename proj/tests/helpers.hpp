#pragma once

#include "coase/game.hpp"

namespace coase::testing {

inline BanditInstance example_instance(RewardModel model = RewardModel::GaussianUnitVariance) {
  Vector v_up(2);
  v_up << 1.0, 0.3;
  Matrix v_down(2, 2);
  v_down << 0.0, 0.0, 0.9, 0.2;
  return build_instance(2, v_up, v_down, model);
}

inline BanditInstance make_instance(std::initializer_list<double> up,
                                    std::initializer_list<std::initializer_list<double>> down) {
  const auto K = static_cast<Eigen::Index>(up.size());
  Vector v_up(K);
  Matrix v_down(K, K);
  Eigen::Index i = 0;
  for (double x : up) v_up(i++) = x;
  i = 0;
  for (const auto& row : down) {
    Eigen::Index j = 0;
    for (double x : row) v_down(i, j++) = x;
    ++i;
  }
  return build_instance(up.size(), v_up, v_down, RewardModel::GaussianUnitVariance);
}

}  // namespace coase::testing
