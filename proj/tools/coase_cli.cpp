#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "coase/acceptance.hpp"
#include "coase/config.hpp"
#include "coase/csv.hpp"
#include "coase/firm.hpp"
#include "coase/sweep.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kAcceptance = 2;

std::uint64_t parse_horizon(const std::string& text) {
  const auto caret = text.find('^');
  try {
    std::size_t used = 0;
    if (caret == std::string::npos) {
      const auto v = std::stoull(text, &used);
      if (used == text.size()) return v;
    } else {
      const auto base = std::stoull(text.substr(0, caret));
      const auto exp = std::stoull(text.substr(caret + 1), &used);
      if (used == text.size() - caret - 1 && exp < 64) {
        std::uint64_t v = 1;
        for (std::uint64_t i = 0; i < exp; ++i) v *= base;
        return v;
      }
    }
  } catch (const std::exception&) {
  }
  throw coase::ValidationError("bad horizon '" + text + "' (expected N or B^E)");
}

// "{seed}" is replaced by the seed; otherwise multi-seed runs get ".seedN"
// spliced in before the extension.
std::string per_seed_path(const std::string& path, std::uint64_t seed, bool multi) {
  const auto mark = path.find("{seed}");
  if (mark != std::string::npos) {
    return path.substr(0, mark) + std::to_string(seed) + path.substr(mark + 6);
  }
  if (!multi) return path;
  std::filesystem::path p(path);
  const auto ext = p.extension().string();
  p.replace_extension();
  return p.string() + ".seed" + std::to_string(seed) + ext;
}

int simulate(const std::string& path) {
  const auto cfg = coase::parse_config(path);
  const auto spec = cfg.game_spec();
  const bool multi = cfg.seeds.size() > 1;
  const bool keep = cfg.keep_trajectory && !cfg.trajectory_csv.empty();

  std::vector<coase::RunSummary> rows(cfg.seeds.size());
  std::vector<coase::GameResult> results(cfg.seeds.size());
  coase::parallel_for(cfg.seeds.size(), coase::worker_limit(), [&](std::size_t i) {
    results[i] = coase::play(spec, cfg.seeds[i], coase::RunOptions{keep});
    rows[i] = coase::make_summary(spec, results[i]);
    if (keep) {
      coase::write_file(per_seed_path(cfg.trajectory_csv, cfg.seeds[i], multi),
                        coase::trajectory_csv(cfg.mode, results[i].trajectory));
    }
    if (!cfg.diagnostics_csv.empty() && cfg.mode == coase::GameMode::Property) {
      coase::write_file(per_seed_path(cfg.diagnostics_csv, cfg.seeds[i], multi),
                        coase::diagnostics_csv(results[i].diagnostics));
    }
    results[i].trajectory.clear();
  });

  const auto table = coase::summary_csv(rows);
  const auto resolved = coase::serialize_config(cfg);
  if (cfg.summary_csv.empty()) {
    std::cout << table;
    std::cerr << resolved;
  } else {
    coase::write_file(cfg.summary_csv, table);
    coase::write_file(cfg.summary_csv + ".cfg", resolved);
  }
  return kOk;
}

int run_sweep(const std::string& path, const std::vector<std::string>& horizon_text,
              const std::string& out, const std::string& runs_out) {
  const auto cfg = coase::parse_config(path);
  std::vector<std::uint64_t> horizons;
  for (const auto& h : horizon_text) horizons.push_back(parse_horizon(h));
  const auto result = coase::sweep(cfg, horizons);
  const auto table = coase::sweep_csv(result);
  if (out.empty()) {
    std::cout << table;
  } else {
    coase::write_file(out, table);
  }
  if (!runs_out.empty()) coase::write_file(runs_out, coase::summary_csv(result.runs));
  std::fprintf(stderr, "log-log slope of mean r_sw vs T: %.4f\n", result.slope);
  return kOk;
}

int oracle(const std::string& path) {
  const auto cfg = coase::parse_config(path);
  const auto inst = cfg.instance.build();
  const auto o = coase::compute_oracle(inst);
  const auto real = coase::format_real;
  std::cout << "K = " << inst.K << '\n'
            << "a_sw = " << o.a_sw << '\n'
            << "b_sw = " << o.b_sw << '\n'
            << "welfare_sw = " << real(o.welfare_sw) << '\n'
            << "tau_star =";
  for (Eigen::Index a = 0; a < o.tau_star.size(); ++a) std::cout << ' ' << real(o.tau_star(a));
  std::cout << '\n'
            << "mu_star_up = " << real(o.mu_star_up) << '\n'
            << "mu_star_down = " << real(o.mu_star_down) << '\n'
            << "delta_up = " << real(o.delta_up) << '\n'
            << "delta_sw = " << real(o.delta_sw) << '\n'
            << "v_bar = " << real(o.v_bar) << '\n'
            << "v_under = " << real(o.v_under) << '\n'
            << "a_star_up = " << o.a_star_up << (o.a_star_up_unique ? "" : " (not unique)") << '\n'
            << "lemma1_identity = " << (coase::lemma1_identity_check(inst, o) ? "exact" : "inexact")
            << '\n';
  if (o.a_star_up_unique) {
    std::cout << "misalignment = " << (coase::misalignment_holds(inst, o) ? "true" : "false") << '\n';
  }
  return kOk;
}

int firm(const coase::FirmExample& ex) {
  const auto r = coase::firm_demo(ex);
  const auto real = coase::format_real;
  std::cout << "competitive q = (" << real(r.competitive(0)) << ", " << real(r.competitive(1))
            << ")  W = " << real(r.welfare_competitive) << '\n'
            << "efficient q   = (" << real(r.efficient(0)) << ", " << real(r.efficient(1))
            << ")  W = " << real(r.welfare_efficient) << '\n'
            << "transfer      = " << real(r.transfer) << '\n'
            << "bargaining W  = " << real(r.bargaining_welfare)
            << (r.bargaining_welfare == r.welfare_efficient ? " (equals efficient)" : " (differs)")
            << '\n'
            << "grid check    = " << (r.grid_optimal ? "efficient point is optimal" : "FAILED") << '\n';
  return kOk;
}

int accept(const std::string& suite, const std::string& json_path) {
  const auto results = coase::run_acceptance(suite);
  bool all = true;
  nlohmann::json report = nlohmann::json::array();
  for (const auto& r : results) {
    std::cout << coase::format_result(r) << std::endl;
    all = all && r.passed;
    report.push_back({{"criterion", r.id},
                      {"suite", r.suite},
                      {"name", r.name},
                      {"passed", r.passed},
                      {"measured", r.measured},
                      {"required", r.tolerance},
                      {"seconds", r.seconds}});
  }
  if (!json_path.empty()) coase::write_file(json_path, report.dump(2) + "\n");
  return all ? kOk : kAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for the two-player externality bandit game"};
  app.require_subcommand(1);

  std::string config_path;
  auto* sim = app.add_subcommand("simulate", "Run every seed of a config");
  sim->add_option("config", config_path, "Config file")->required();

  std::vector<std::string> horizons;
  std::string sweep_out, sweep_runs;
  auto* sw = app.add_subcommand("sweep", "Run a config across several horizons");
  sw->add_option("config", config_path, "Config file")->required();
  sw->add_option("--horizons", horizons, "Horizons, e.g. 1024 2^11 4096")->required()->delimiter(',');
  sw->add_option("--out", sweep_out, "Per-horizon table (default: stdout)");
  sw->add_option("--runs", sweep_runs, "Per-run summary CSV");

  auto* orc = app.add_subcommand("oracle", "Print oracle quantities of the config's instance");
  orc->add_option("config", config_path, "Config file")->required();

  coase::FirmExample ex;
  auto* fe = app.add_subcommand("firm-example", "Competitive vs efficient output of two firms");
  fe->add_option("--p", ex.p, "Output price")->capture_default_str();
  fe->add_option("--k1", ex.k1, "Cost slope of firm 1")->capture_default_str();
  fe->add_option("--k2", ex.k2, "Cost slope of firm 2")->capture_default_str();
  fe->add_option("--alpha", ex.alpha, "Externality per unit of firm 1 output")->capture_default_str();

  std::string suite, json_path;
  auto* acc = app.add_subcommand("accept", "Run an acceptance suite");
  acc->add_option("suite", suite, "oracle|pathwise|breakdown|belgic|welfare|h2|firm|determinism|all")
      ->required();
  acc->add_option("--json", json_path, "Also write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (*sim) return simulate(config_path);
    if (*sw) return run_sweep(config_path, horizons, sweep_out, sweep_runs);
    if (*orc) return oracle(config_path);
    if (*fe) return firm(ex);
    if (*acc) return accept(suite, json_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kOk;
}
