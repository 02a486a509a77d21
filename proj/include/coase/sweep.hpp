#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coase/config.hpp"
#include "coase/csv.hpp"

namespace coase {

/// Worker count for parallel runs: COASE_MAX_WORKERS when set, otherwise the
/// hardware concurrency (at least 1).
unsigned worker_limit();

/// Runs job(i) for i in [0, n) on up to `workers` threads. Results must be
/// written to slot i by the job itself so ordering never depends on timing.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& job);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& xs);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SweepRow {
  std::uint64_t horizon = 0;
  std::size_t seeds = 0;
  MeanSe sw;      // r_sw(T) / T
  MeanSe first;   // r_down_p / T (property) or r_up_n / T
  MeanSe second;  // unused (property) or r_down_n / T
  double mean_r_sw = 0.0;
};

struct SweepResult {
  GameMode mode = GameMode::Property;
  std::vector<SweepRow> rows;
  std::vector<RunSummary> runs;  // sorted by (horizon, seed)
  double slope = 0.0;            // of mean r_sw against T
};

/// Plays every (horizon, seed) pair of the config. Each horizon is validated
/// before anything runs.
SweepResult sweep(const GameConfig& config, const std::vector<std::uint64_t>& horizons,
                  unsigned workers = worker_limit());

std::string sweep_csv(const SweepResult& result);

}  // namespace coase
