#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>

#include "coase/acceptance.hpp"
#include "coase/firm.hpp"
#include "coase/sweep.hpp"
#include "helpers.hpp"

using namespace coase;

namespace {

GameConfig example_config(GameMode mode) {
  GameConfig c;
  c.mode = mode;
  c.instance.K = 2;
  c.instance.v_up = {1.0, 0.3};
  c.instance.v_down = {{0.0, 0.0}, {0.9, 0.2}};
  c.downstream = mode == GameMode::Property ? DownstreamKind::Belgic : DownstreamKind::NaiveUcb;
  if (mode == GameMode::Property) c.fixed_C = 1.0;
  return c;
}

std::vector<std::uint64_t> seeds(std::uint64_t n) {
  std::vector<std::uint64_t> s;
  for (std::uint64_t i = 1; i <= n; ++i) s.push_back(i);
  return s;
}

}  // namespace

TEST_CASE("worker limit honours the environment") {
  ::setenv("COASE_MAX_WORKERS", "3", 1);
  CHECK(worker_limit() == 3);
  ::setenv("COASE_MAX_WORKERS", "junk", 1);
  CHECK(worker_limit() >= 1);
  ::unsetenv("COASE_MAX_WORKERS");
  CHECK(worker_limit() >= 1);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw ValidationError("boom");
                  }),
                  ValidationError);
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("statistics helpers") {
  const auto m = mean_and_se({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(mean_and_se({7.0}).se == 0.0);
  CHECK(loglog_slope({1, 2, 4, 8}, {3, 3 * std::pow(2, 0.75), 3 * std::pow(4, 0.75), 3 * std::pow(8, 0.75)}) ==
        doctest::Approx(0.75));
  CHECK(std::isnan(loglog_slope({1, 2}, {0.0, 1.0})));
}

TEST_CASE("single horizon, single seed sweep") {
  auto c = example_config(GameMode::Property);
  const auto r = sweep(c, {1 << 12});
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].seeds == 1);
  CHECK(r.runs.size() == 1);
  CHECK(std::isnan(r.slope));
  const auto csv = sweep_csv(r);
  CHECK(csv.rfind("horizon,seeds,mean_r_sw_over_T,se_r_sw_over_T,mean_r_down_p_over_T", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("sweep validates every horizon up front") {
  auto c = example_config(GameMode::Property);
  CHECK_THROWS_WITH_AS(sweep(c, {1 << 12, 1 << 10}), doctest::Contains("horizon 1024"), ValidationError);
  CHECK_THROWS_AS(sweep(c, {}), ValidationError);
}

TEST_CASE("no-property sweep converges to the welfare gap") {
  auto c = example_config(GameMode::NoProperty);
  c.seeds = seeds(10);
  const auto r = sweep(c, {1 << 10, 1 << 12, 1 << 14});
  const double dsw = 0.2;
  CHECK(std::abs(r.rows.back().sw.mean - dsw) <= 0.1 * dsw);
  CHECK(sweep_csv(r).find("mean_r_up_n_over_T") != std::string::npos);
}

TEST_CASE("property sweep slope stays below 0.9") {
  auto c = example_config(GameMode::Property);
  c.seeds = seeds(50);
  const auto r = sweep(c, {1 << 11, 1 << 12, 1 << 13, 1 << 14});
  CHECK(r.slope <= 0.9);
  // Runs come back sorted by (horizon, seed).
  for (std::size_t i = 1; i < r.runs.size(); ++i) {
    CHECK(std::pair(r.runs[i - 1].horizon, r.runs[i - 1].seed) <
          std::pair(r.runs[i].horizon, r.runs[i].seed));
  }
}

TEST_CASE("firm example with an externality") {
  const auto r = firm_demo(FirmExample{10.0, 1.0, 1.0, 2.0});
  CHECK(r.competitive == Eigen::Vector2d(10.0, 10.0));
  CHECK(r.efficient == Eigen::Vector2d(8.0, 10.0));
  CHECK(r.welfare_competitive == 80.0);
  CHECK(r.welfare_efficient == 82.0);
  CHECK(r.transfer == 2.0);
  CHECK(profit1(FirmExample{}, 10.0) == 50.0);
  CHECK(profit1(FirmExample{}, 8.0) == 48.0);
  CHECK(r.bargaining_welfare == r.welfare_efficient);
  CHECK(r.grid_optimal);
}

TEST_CASE("no externality: competitive is efficient") {
  const auto r = firm_demo(FirmExample{10.0, 1.0, 1.0, 0.0});
  CHECK(r.competitive == r.efficient);
  CHECK(r.transfer == 0.0);
}

TEST_CASE("efficient output of firm 1 falls as the externality grows") {
  double last = 1e300;
  for (double a : {0.0, 0.5, 1.0, 2.0, 4.0, 7.5}) {
    const auto r = firm_demo(FirmExample{10.0, 2.0, 3.0, a});
    if (a > 0.0) CHECK(r.efficient(0) < last);
    last = r.efficient(0);
    CHECK(r.welfare_efficient >= r.welfare_competitive);
    CHECK(r.grid_optimal);
  }
}

TEST_CASE("firm example validation") {
  CHECK_THROWS_AS(firm_demo(FirmExample{10.0, 0.0, 1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(firm_demo(FirmExample{10.0, 1.0, 1.0, 10.0}), ValidationError);
  CHECK_THROWS_AS(firm_demo(FirmExample{10.0, 1.0, 1.0, -1.0}), ValidationError);
  CHECK_THROWS_AS(firm_demo(FirmExample{-1.0, 1.0, 1.0, 0.0}), ValidationError);
}

TEST_CASE("acceptance helpers") {
  // Right at the ceiling the threshold equals half a batch.
  const double c = calibrated_c(2, 1 << 14, 0.75, 0.25, 1.0);
  CHECK(c == doctest::Approx(0.5 * std::pow(1449.0, 1.0 / 6.0)));
  const double k = 2.0, T = 4096.0;
  const double expected =
      (10 + 4 * k + 32 * std::sqrt(k * std::log2(k * T * T * T)) + 0.9) * 12.0 * (3 + 2 * 512.0) +
      3 * k * k * 0.9;
  CHECK(downstream_regret_bound(2, 4096, 0.9, 0.0) == doctest::Approx(expected));
  CHECK_THROWS_AS(run_acceptance("nope"), ValidationError);
  CHECK(acceptance_suites().size() == 9);
}
