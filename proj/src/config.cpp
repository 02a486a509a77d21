#include "coase/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "coase/csv.hpp"

namespace coase {

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : ValidationError(line ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_real(std::string_view s, std::size_t line, std::string_view key) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(line, "'" + std::string(key) + "': expected a real number, got '" +
                                std::string(s) + "'");
  }
  return value;
}

std::uint64_t parse_uint(std::string_view s, std::size_t line, std::string_view key) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(line, "'" + std::string(key) + "': expected a nonnegative integer, got '" +
                                std::string(s) + "'");
  }
  return value;
}

bool parse_bool(std::string_view s, std::size_t line, std::string_view key) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError(line, "'" + std::string(key) + "': expected true or false");
}

std::vector<double> parse_reals(std::string_view s, std::size_t line, std::string_view key) {
  std::vector<double> out;
  for (auto item : split(s, ',')) out.push_back(parse_real(item, line, key));
  return out;
}

template <typename Fn>
auto rethrow_at(std::size_t line, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(line, e.what());
  }
}

}  // namespace

BanditInstance InstanceSpec::build() const {
  if (generator_seed) {
    return generate_instance(K, *generator_seed, reward_model, require_misalignment);
  }
  const auto n = static_cast<Eigen::Index>(K);
  if (v_up.size() != K) {
    throw ValidationError("v_up has " + std::to_string(v_up.size()) + " entries, expected K=" +
                          std::to_string(K));
  }
  if (v_down.size() != K) {
    throw ValidationError("v_down has " + std::to_string(v_down.size()) + " rows, expected K=" +
                          std::to_string(K));
  }
  Vector up = Eigen::Map<const Vector>(v_up.data(), n);
  Matrix down(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto& row = v_down[static_cast<std::size_t>(a)];
    if (row.size() != K) {
      throw ValidationError("v_down row " + std::to_string(a) + " has " +
                            std::to_string(row.size()) + " entries, expected K=" +
                            std::to_string(K));
    }
    for (Eigen::Index b = 0; b < n; ++b) down(a, b) = row[static_cast<std::size_t>(b)];
  }
  auto instance = build_instance(K, up, down, reward_model);
  if (require_misalignment) {
    const auto oracle = compute_oracle(instance);
    if (!misalignment_holds(instance, oracle)) {
      throw ValidationError("instance is required to be misaligned but is not");
    }
  }
  return instance;
}

GameSpec GameConfig::game_spec() const { return game_spec(horizon); }

GameSpec GameConfig::game_spec(std::uint64_t horizon_override) const {
  GameSpec spec;
  spec.instance = instance.build();
  spec.mode = mode;
  spec.horizon = horizon_override;
  spec.upstream = upstream;
  spec.downstream = downstream;
  spec.alpha = alpha;
  spec.beta = beta;
  spec.fixed_C = fixed_C;
  return spec;
}

void validate_config(const GameConfig& config) {
  std::set<std::uint64_t> seen;
  for (auto s : config.seeds) {
    if (!seen.insert(s).second) {
      throw ValidationError("seeds must be pairwise distinct (" + std::to_string(s) +
                            " repeats)");
    }
  }
  if (config.seeds.empty()) throw ValidationError("at least one seed is required");
  validate_spec(config.game_spec());
}

GameConfig parse_config_text(const std::string& text) {
  GameConfig cfg;
  cfg.downstream = DownstreamKind::Belgic;
  std::optional<DownstreamKind> downstream;
  std::map<std::string, std::size_t> seen_keys;
  std::string section;
  std::size_t config_line = 0;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> known{"game",      "instance", "upstream",
                                               "downstream", "belgic",   "output"};
      if (!known.count(section)) throw ConfigError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    if (section.empty()) throw ConfigError(line_no, "key outside of any [section]");
    const auto key = std::string(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const auto full = section + "." + key;
    if (seen_keys.count(full)) {
      throw ConfigError(line_no, "duplicate key '" + full + "' (first on line " +
                                     std::to_string(seen_keys[full]) + ")");
    }
    seen_keys[full] = line_no;

    if (full == "game.mode") {
      cfg.mode = rethrow_at(line_no, [&] { return game_mode_from_string(value); });
    } else if (full == "game.horizon") {
      cfg.horizon = parse_uint(value, line_no, full);
    } else if (full == "game.seeds") {
      cfg.seeds.clear();
      for (auto item : split(value, ',')) cfg.seeds.push_back(parse_uint(item, line_no, full));
    } else if (full == "game.retention") {
      if (value == "full") {
        cfg.keep_trajectory = true;
      } else if (value == "ledger") {
        cfg.keep_trajectory = false;
      } else {
        throw ConfigError(line_no, "'game.retention': expected full or ledger");
      }
    } else if (full == "instance.k") {
      cfg.instance.K = parse_uint(value, line_no, full);
    } else if (full == "instance.reward_model") {
      cfg.instance.reward_model =
          rethrow_at(line_no, [&] { return reward_model_from_string(value); });
    } else if (full == "instance.v_up") {
      cfg.instance.v_up = parse_reals(value, line_no, full);
    } else if (full == "instance.v_down") {
      cfg.instance.v_down.clear();
      for (auto row : split(value, ';')) cfg.instance.v_down.push_back(parse_reals(row, line_no, full));
    } else if (full == "instance.generator_seed") {
      cfg.instance.generator_seed = parse_uint(value, line_no, full);
    } else if (full == "instance.require_misalignment") {
      cfg.instance.require_misalignment = parse_bool(value, line_no, full);
    } else if (full == "upstream.policy") {
      cfg.upstream = rethrow_at(line_no, [&] { return upstream_kind_from_string(value); });
    } else if (full == "upstream.c_mode") {
      if (value == "theoretical") {
        cfg.fixed_C.reset();
      } else if (value.starts_with("fixed:")) {
        cfg.fixed_C = parse_real(trim(value.substr(6)), line_no, full);
      } else {
        throw ConfigError(line_no, "'upstream.c_mode': expected theoretical or fixed:<value>");
      }
    } else if (full == "downstream.policy") {
      downstream = rethrow_at(line_no, [&] { return downstream_kind_from_string(value); });
    } else if (full == "belgic.alpha") {
      cfg.alpha = parse_real(value, line_no, full);
    } else if (full == "belgic.beta") {
      cfg.beta = parse_real(value, line_no, full);
    } else if (full == "output.trajectory_csv") {
      cfg.trajectory_csv = std::string(value);
    } else if (full == "output.summary_csv") {
      cfg.summary_csv = std::string(value);
    } else if (full == "output.diagnostics_csv") {
      cfg.diagnostics_csv = std::string(value);
    } else {
      throw ConfigError(line_no, "unknown key '" + full + "'");
    }
    if (section == "belgic" || full == "upstream.c_mode") config_line = line_no;
  }

  for (const char* required : {"game.mode", "game.horizon", "instance.k"}) {
    if (!seen_keys.count(required)) {
      throw ConfigError(0, "missing required key '" + std::string(required) + "'");
    }
  }
  if (!cfg.instance.generator_seed &&
      (!seen_keys.count("instance.v_up") || !seen_keys.count("instance.v_down"))) {
    throw ConfigError(0, "instance needs v_up and v_down, or generator_seed");
  }
  cfg.downstream = downstream.value_or(cfg.mode == GameMode::Property ? DownstreamKind::Belgic
                                                                      : DownstreamKind::NaiveUcb);
  const auto first_line = [&](std::initializer_list<const char*> keys) {
    std::size_t best = 0;
    for (auto k : keys) {
      if (seen_keys.count(k)) best = best ? std::min(best, seen_keys[k]) : seen_keys[k];
    }
    return best;
  };
  try {
    validate_config(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    std::size_t line = 0;
    if (what.find("seeds") != std::string::npos) {
      line = first_line({"game.seeds"});
    } else if (what.find("v_up") != std::string::npos || what.find("v_down") != std::string::npos ||
               what.find("misaligned") != std::string::npos) {
      line = first_line({"instance.v_up", "instance.v_down", "instance.generator_seed"});
    } else if (what.find("violated") != std::string::npos ||
               what.find("alpha") != std::string::npos || what.find("beta") != std::string::npos) {
      line = config_line ? config_line : first_line({"game.horizon"});
    }
    throw ConfigError(line, what);
  }
  return cfg;
}

GameConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const GameConfig& c) {
  std::ostringstream out;
  const auto join = [](const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + format_real(xs[i]);
    return s;
  };
  out << "[game]\n";
  out << "mode = " << to_string(c.mode) << "\n";
  out << "horizon = " << c.horizon << "\n";
  out << "seeds = ";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) out << (i ? ", " : "") << c.seeds[i];
  out << "\n";
  out << "retention = " << (c.keep_trajectory ? "full" : "ledger") << "\n\n";
  out << "[instance]\n";
  out << "k = " << c.instance.K << "\n";
  out << "reward_model = " << to_string(c.instance.reward_model) << "\n";
  if (c.instance.generator_seed) {
    out << "generator_seed = " << *c.instance.generator_seed << "\n";
  } else {
    out << "v_up = " << join(c.instance.v_up) << "\n";
    out << "v_down = ";
    for (std::size_t r = 0; r < c.instance.v_down.size(); ++r) {
      out << (r ? "; " : "") << join(c.instance.v_down[r]);
    }
    out << "\n";
  }
  out << "require_misalignment = " << (c.instance.require_misalignment ? "true" : "false")
      << "\n\n";
  out << "[upstream]\n";
  out << "policy = " << to_string(c.upstream) << "\n";
  out << "c_mode = " << (c.fixed_C ? "fixed:" + format_real(*c.fixed_C) : "theoretical")
      << "\n\n";
  out << "[downstream]\n";
  out << "policy = " << to_string(c.downstream) << "\n\n";
  out << "[belgic]\n";
  out << "alpha = " << format_real(c.alpha) << "\n";
  out << "beta = " << format_real(c.beta) << "\n";
  if (!c.trajectory_csv.empty() || !c.summary_csv.empty() || !c.diagnostics_csv.empty()) {
    out << "\n[output]\n";
    if (!c.trajectory_csv.empty()) out << "trajectory_csv = " << c.trajectory_csv << "\n";
    if (!c.summary_csv.empty()) out << "summary_csv = " << c.summary_csv << "\n";
    if (!c.diagnostics_csv.empty()) out << "diagnostics_csv = " << c.diagnostics_csv << "\n";
  }
  return out.str();
}

}  // namespace coase
