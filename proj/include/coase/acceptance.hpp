#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace coase {

struct CriterionResult {
  int id = 0;
  std::string suite;
  std::string name;
  bool passed = false;
  std::string measured;
  std::string tolerance;
  double seconds = 0.0;
  double time_limit = 0.0;
};

/// Suite ids: oracle, pathwise, breakdown, belgic, welfare, h2, firm,
/// determinism, or all.
std::vector<std::string> acceptance_suites();

/// Throws ValidationError on an unknown id.
std::vector<CriterionResult> run_acceptance(std::string_view suite);

/// Single line: "criterion <id> <suite> PASS|FAIL ..."
std::string format_result(const CriterionResult& r);

/// C just under the ceiling 0.5 * Tb^(1 - kappa - beta/alpha) that keeps
/// the mismatch threshold below half a batch.
double calibrated_c(std::size_t K, unsigned long long horizon, double alpha = 0.75,
                    double beta = 0.25, double fraction = 0.99);

/// (10 + 4K + 32 sqrt(K log2(K T^3)) + vbar - vunder) log2(T) (3 + 2 T^(3/4))
///   + 3 K^2 (vbar - vunder)
double downstream_regret_bound(std::size_t K, unsigned long long horizon, double v_bar, double v_under);

}  // namespace coase
