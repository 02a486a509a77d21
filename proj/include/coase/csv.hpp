#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coase/game.hpp"

namespace coase {

/// Shortest round-trip form is not required; 17 significant digits always
/// reproduce the double exactly.
std::string format_real(double x);

/// t,phase,a_tilde,tau,A,B,gap_sw,gap_up,gap_down in property mode;
/// t,phase,A,B,gap_sw,gap_up,gap_down without property rights.
std::string trajectory_csv(GameMode mode, const std::vector<RoundRecord>& trajectory);

/// arm,batch,tau_mid,mismatch_count,branch,tau_lower,tau_upper
std::string diagnostics_csv(const std::vector<BatchDiagnostic>& diagnostics);

/// One line of the run summary: final ledgers, transfer estimates and the
/// oracle quantities of the instance.
struct RunSummary {
  std::uint64_t seed = 0;
  GameMode mode = GameMode::Property;
  std::uint64_t horizon = 0;
  std::size_t K = 0;
  double r_up_n = 0.0;
  double r_down_n = 0.0;
  double r_sw = 0.0;
  double r_up_p = 0.0;
  double r_down_p = 0.0;
  double up_utility = 0.0;
  double down_utility = 0.0;
  double welfare = 0.0;
  std::uint64_t phase1_length = 0;
  std::vector<double> tau_hat;
  std::uint64_t lemma1_violations = 0;
  std::size_t a_sw = 0;
  std::size_t b_sw = 0;
  double welfare_sw = 0.0;
  double mu_star_up = 0.0;
  double mu_star_down = 0.0;
  double delta_up = 0.0;
  double delta_sw = 0.0;

  bool operator==(const RunSummary&) const = default;
};

RunSummary make_summary(const GameSpec& spec, const GameResult& result);

std::string summary_csv(const std::vector<RunSummary>& rows);
std::vector<RunSummary> parse_summary_csv(const std::string& text);

void write_file(const std::string& path, const std::string& contents);

}  // namespace coase
