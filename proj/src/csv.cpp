#include "coase/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace coase {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trajectory_csv(GameMode mode, const std::vector<RoundRecord>& trajectory) {
  std::ostringstream out;
  const bool property = mode == GameMode::Property;
  out << (property ? "t,phase,a_tilde,tau,A,B,gap_sw,gap_up,gap_down\n"
                   : "t,phase,A,B,gap_sw,gap_up,gap_down\n");
  for (const auto& r : trajectory) {
    out << r.t << ',' << to_string(r.phase) << ',';
    if (property) out << r.offer.target_arm << ',' << format_real(r.offer.amount) << ',';
    out << r.upstream_arm << ',' << r.downstream_arm << ',' << format_real(r.gaps.sw) << ','
        << format_real(property ? r.gaps.up_p : r.gaps.up_n) << ','
        << format_real(property ? r.gaps.down_p : r.gaps.down_n) << '\n';
  }
  return out.str();
}

std::string diagnostics_csv(const std::vector<BatchDiagnostic>& diagnostics) {
  std::ostringstream out;
  out << "arm,batch,tau_mid,mismatch_count,branch,tau_lower,tau_upper\n";
  for (const auto& d : diagnostics) {
    out << d.arm << ',' << d.batch << ',' << format_real(d.tau_mid) << ',' << d.mismatch_count
        << ',' << to_string(d.branch) << ',' << format_real(d.tau_lower) << ','
        << format_real(d.tau_upper) << '\n';
  }
  return out.str();
}

RunSummary make_summary(const GameSpec& spec, const GameResult& result) {
  const auto oracle = compute_oracle(spec.instance);
  RunSummary s;
  s.seed = result.seed;
  s.mode = spec.mode;
  s.horizon = spec.horizon;
  s.K = spec.instance.K;
  s.r_up_n = result.ledger.r_up_n;
  s.r_down_n = result.ledger.r_down_n;
  s.r_sw = result.ledger.r_sw;
  s.r_up_p = result.ledger.r_up_p;
  s.r_down_p = result.ledger.r_down_p;
  s.up_utility = result.ledger.up_utility;
  s.down_utility = result.ledger.down_utility;
  s.welfare = result.ledger.welfare;
  s.phase1_length = result.phase1_length;
  if (result.estimates) {
    const auto& t = result.estimates->tau_hat;
    s.tau_hat.assign(t.data(), t.data() + t.size());
  }
  s.lemma1_violations = result.lemma1_violations;
  s.a_sw = oracle.a_sw;
  s.b_sw = oracle.b_sw;
  s.welfare_sw = oracle.welfare_sw;
  s.mu_star_up = oracle.mu_star_up;
  s.mu_star_down = oracle.mu_star_down;
  s.delta_up = oracle.delta_up;
  s.delta_sw = oracle.delta_sw;
  return s;
}

namespace {

constexpr const char* kSummaryHeader =
    "seed,mode,horizon,K,r_up_n,r_down_n,r_sw,r_up_p,r_down_p,up_utility,down_utility,welfare,"
    "phase1_length,tau_hat,lemma1_violations,a_sw,b_sw,welfare_sw,mu_star_up,mu_star_down,"
    "delta_up,delta_sw";

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double to_real(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("summary CSV: bad real '" + s + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("summary CSV: bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

std::string summary_csv(const std::vector<RunSummary>& rows) {
  std::ostringstream out;
  out << kSummaryHeader << '\n';
  for (const auto& s : rows) {
    std::string tau;
    for (std::size_t i = 0; i < s.tau_hat.size(); ++i) tau += (i ? ";" : "") + format_real(s.tau_hat[i]);
    out << s.seed << ',' << to_string(s.mode) << ',' << s.horizon << ',' << s.K << ','
        << format_real(s.r_up_n) << ',' << format_real(s.r_down_n) << ',' << format_real(s.r_sw)
        << ',' << format_real(s.r_up_p) << ',' << format_real(s.r_down_p) << ','
        << format_real(s.up_utility) << ',' << format_real(s.down_utility) << ','
        << format_real(s.welfare) << ',' << s.phase1_length << ',' << tau << ','
        << s.lemma1_violations << ',' << s.a_sw << ',' << s.b_sw << ','
        << format_real(s.welfare_sw) << ',' << format_real(s.mu_star_up) << ','
        << format_real(s.mu_star_down) << ',' << format_real(s.delta_up) << ','
        << format_real(s.delta_sw) << '\n';
  }
  return out.str();
}

std::vector<RunSummary> parse_summary_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSummaryHeader) {
    throw ValidationError("summary CSV: unexpected header");
  }
  std::vector<RunSummary> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line, ',');
    if (f.size() != 22) throw ValidationError("summary CSV: expected 22 fields");
    RunSummary s;
    s.seed = to_uint(f[0]);
    s.mode = game_mode_from_string(f[1]);
    s.horizon = to_uint(f[2]);
    s.K = to_uint(f[3]);
    s.r_up_n = to_real(f[4]);
    s.r_down_n = to_real(f[5]);
    s.r_sw = to_real(f[6]);
    s.r_up_p = to_real(f[7]);
    s.r_down_p = to_real(f[8]);
    s.up_utility = to_real(f[9]);
    s.down_utility = to_real(f[10]);
    s.welfare = to_real(f[11]);
    s.phase1_length = to_uint(f[12]);
    if (!f[13].empty()) {
      for (const auto& x : split_fields(f[13], ';')) s.tau_hat.push_back(to_real(x));
    }
    s.lemma1_violations = to_uint(f[14]);
    s.a_sw = to_uint(f[15]);
    s.b_sw = to_uint(f[16]);
    s.welfare_sw = to_real(f[17]);
    s.mu_star_up = to_real(f[18]);
    s.mu_star_down = to_real(f[19]);
    s.delta_up = to_real(f[20]);
    s.delta_sw = to_real(f[21]);
    rows.push_back(std::move(s));
  }
  return rows;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << contents;
}

}  // namespace coase
