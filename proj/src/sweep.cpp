#include "coase/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace coase {

unsigned worker_limit() {
  if (const char* env = std::getenv("COASE_MAX_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& job) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

MeanSe mean_and_se(const std::vector<double>& xs) {
  MeanSe r;
  if (xs.empty()) return r;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) r.mean += x;
  r.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return r;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nan("");
  Eigen::MatrixXd design(static_cast<Eigen::Index>(x.size()), 2);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nan("");
    design(static_cast<Eigen::Index>(i), 0) = 1.0;
    design(static_cast<Eigen::Index>(i), 1) = std::log(x[i]);
    rhs(static_cast<Eigen::Index>(i)) = std::log(y[i]);
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
  return coef(1);
}

SweepResult sweep(const GameConfig& config, const std::vector<std::uint64_t>& horizons,
                  unsigned workers) {
  if (horizons.empty()) throw ValidationError("sweep needs at least one horizon");
  std::vector<GameSpec> specs;
  for (auto T : horizons) {
    specs.push_back(config.game_spec(T));
    try {
      validate_spec(specs.back());
    } catch (const ValidationError& e) {
      throw ValidationError("horizon " + std::to_string(T) + ": " + e.what());
    }
  }

  const std::size_t n_seeds = config.seeds.size();
  std::vector<RunSummary> runs(horizons.size() * n_seeds);
  parallel_for(runs.size(), workers, [&](std::size_t i) {
    const auto& spec = specs[i / n_seeds];
    const auto seed = config.seeds[i % n_seeds];
    runs[i] = make_summary(spec, play(spec, seed));
  });

  SweepResult result;
  result.mode = config.mode;
  std::vector<double> xs, ys;
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    const double T = static_cast<double>(horizons[h]);
    std::vector<double> sw, first, second;
    double sum_sw = 0.0;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const auto& r = runs[h * n_seeds + s];
      sw.push_back(r.r_sw / T);
      sum_sw += r.r_sw;
      if (config.mode == GameMode::Property) {
        first.push_back(r.r_down_p / T);
      } else {
        first.push_back(r.r_up_n / T);
        second.push_back(r.r_down_n / T);
      }
    }
    SweepRow row;
    row.horizon = horizons[h];
    row.seeds = n_seeds;
    row.sw = mean_and_se(sw);
    row.first = mean_and_se(first);
    row.second = mean_and_se(second);
    row.mean_r_sw = sum_sw / static_cast<double>(n_seeds);
    result.rows.push_back(row);
    xs.push_back(T);
    ys.push_back(row.mean_r_sw);
  }
  result.slope = loglog_slope(xs, ys);

  std::vector<std::size_t> order(runs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(runs[a].horizon, runs[a].seed) < std::pair(runs[b].horizon, runs[b].seed);
  });
  for (auto i : order) result.runs.push_back(runs[i]);
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  const bool property = result.mode == GameMode::Property;
  out << "horizon,seeds,mean_r_sw_over_T,se_r_sw_over_T,"
      << (property ? "mean_r_down_p_over_T,se_r_down_p_over_T"
                   : "mean_r_up_n_over_T,se_r_up_n_over_T,mean_r_down_n_over_T,se_r_down_n_over_T")
      << ",mean_r_sw\n";
  for (const auto& r : result.rows) {
    out << r.horizon << ',' << r.seeds << ',' << format_real(r.sw.mean) << ','
        << format_real(r.sw.se) << ',' << format_real(r.first.mean) << ','
        << format_real(r.first.se);
    if (!property) out << ',' << format_real(r.second.mean) << ',' << format_real(r.second.se);
    out << ',' << format_real(r.mean_r_sw) << '\n';
  }
  return out.str();
}

}  // namespace coase
