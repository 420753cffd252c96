#pragma once

// Session configuration (JSON) and run manifest.
//
// Keys carry their unit as a suffix (_s seconds, _n newtons, _pct percent
// contrast, _kg, _nspu N s per unit, _npu N per unit). Unknown keys are errors
// so that a typo cannot silently fall back to a default.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "../agents.hpp"
#include "../coupling_sim.hpp"

namespace hapdec::harness {

using nlohmann::json;

inline constexpr const char* kToolkitVersion = "0.1.0";

inline const std::vector<double>& default_thresholds() {
  static const std::vector<double> t{0.05, 0.08, 0.10, 0.15, 0.20, 0.25, 0.30};
  return t;
}

struct DyadConfig {
  AgentProfile member_a;
  AgentProfile member_b;
};

struct SessionConfig {
  std::uint64_t master_seed = 0;
  int n_blocks = kBlocksPerSession;
  std::vector<DyadConfig> dyads;
  CouplingConfig coupling;
  std::vector<double> thresholds = default_thresholds();
  std::string output_dir;  // not part of the hash
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
void read_opt(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

inline YieldRule parse_rule(const std::string& s) {
  if (s == "deterministic") return YieldRule::deterministic;
  if (s == "stochastic") return YieldRule::stochastic;
  throw ConfigError("yield_rule must be 'deterministic' or 'stochastic', got '" + s + "'");
}

inline YieldStyle parse_style(const std::string& s) {
  if (s == "resist") return YieldStyle::resist;
  if (s == "comply") return YieldStyle::comply;
  throw ConfigError("yield_style must be 'resist' or 'comply', got '" + s + "'");
}

inline std::string rule_name(YieldRule r) { return r == YieldRule::stochastic ? "stochastic" : "deterministic"; }
inline std::string style_name(YieldStyle s) { return s == YieldStyle::comply ? "comply" : "resist"; }

}  // namespace detail

inline AgentProfile profile_from_json(const json& j, const std::string& where) {
  detail::check_keys(j,
                     {"sigma_pct", "bias_pct", "rt_base_s", "rt_gain_s", "onset_base_s", "onset_gain_s",
                      "force_gain_n", "f_max_n", "yield_dwell_s", "resist_gain", "seed", "yield_rule", "yield_style"},
                     where);
  AgentProfile p;
  detail::read_opt(j, "sigma_pct", p.sigma, where);
  detail::read_opt(j, "bias_pct", p.bias_b, where);
  detail::read_opt(j, "rt_base_s", p.rt_base, where);
  detail::read_opt(j, "rt_gain_s", p.rt_gain, where);
  detail::read_opt(j, "onset_base_s", p.onset_base, where);
  detail::read_opt(j, "onset_gain_s", p.onset_gain, where);
  detail::read_opt(j, "force_gain_n", p.force_gain, where);
  detail::read_opt(j, "f_max_n", p.f_max, where);
  detail::read_opt(j, "yield_dwell_s", p.yield_dwell, where);
  detail::read_opt(j, "resist_gain", p.resist_gain, where);
  detail::read_opt(j, "seed", p.seed, where);
  std::string rule = detail::rule_name(p.yield_rule), style = detail::style_name(p.yield_style);
  detail::read_opt(j, "yield_rule", rule, where);
  detail::read_opt(j, "yield_style", style, where);
  p.yield_rule = detail::parse_rule(rule);
  p.yield_style = detail::parse_style(style);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return p;
}

inline json profile_to_json(const AgentProfile& p) {
  return {{"sigma_pct", p.sigma},         {"bias_pct", p.bias_b},         {"rt_base_s", p.rt_base},
          {"rt_gain_s", p.rt_gain},       {"onset_base_s", p.onset_base}, {"onset_gain_s", p.onset_gain},
          {"force_gain_n", p.force_gain}, {"f_max_n", p.f_max},           {"yield_dwell_s", p.yield_dwell},
          {"resist_gain", p.resist_gain}, {"seed", p.seed},
          {"yield_rule", detail::rule_name(p.yield_rule)},
          {"yield_style", detail::style_name(p.yield_style)}};
}

inline CouplingConfig coupling_from_json(const json& j) {
  const std::string where = "coupling";
  detail::check_keys(j,
                     {"dt_s", "handle_mass_kg", "handle_damping_nspu", "coupling_stiffness_npu",
                      "coupling_damping_nspu", "target_threshold", "dwell_s", "timeout_s", "x_thresh"},
                     where);
  CouplingConfig c;
  detail::read_opt(j, "dt_s", c.dt, where);
  detail::read_opt(j, "handle_mass_kg", c.handle_mass, where);
  detail::read_opt(j, "handle_damping_nspu", c.handle_damping, where);
  detail::read_opt(j, "coupling_stiffness_npu", c.coupling_stiffness, where);
  if (j.contains("coupling_damping_nspu") && !j.at("coupling_damping_nspu").is_null()) {
    double d = 0.0;
    detail::read_opt(j, "coupling_damping_nspu", d, where);
    c.coupling_damping = d;
  }
  detail::read_opt(j, "target_threshold", c.target_threshold, where);
  detail::read_opt(j, "dwell_s", c.dwell, where);
  detail::read_opt(j, "timeout_s", c.timeout, where);
  detail::read_opt(j, "x_thresh", c.x_thresh, where);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline json coupling_to_json(const CouplingConfig& c) {
  return {{"dt_s", c.dt},
          {"handle_mass_kg", c.handle_mass},
          {"handle_damping_nspu", c.handle_damping},
          {"coupling_stiffness_npu", c.coupling_stiffness},
          {"coupling_damping_nspu", c.coupling_damping ? json(*c.coupling_damping) : json(nullptr)},
          {"target_threshold", c.target_threshold},
          {"dwell_s", c.dwell},
          {"timeout_s", c.timeout},
          {"x_thresh", c.x_thresh}};
}

inline SessionConfig config_from_json(const json& j) {
  detail::check_keys(j, {"master_seed", "n_blocks", "dyads", "coupling", "thresholds", "output_dir"}, "config");
  SessionConfig cfg;
  if (!j.contains("master_seed")) throw ConfigError("config: master_seed is required (runs must be reproducible)");
  const json& seed = j.at("master_seed");
  if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0))
    throw ConfigError("config.master_seed: expected a non-negative integer");
  cfg.master_seed = seed.get<std::uint64_t>();
  detail::read_opt(j, "n_blocks", cfg.n_blocks, "config");
  if (cfg.n_blocks < 1) throw ConfigError("config.n_blocks must be >= 1");
  if (!j.contains("dyads") || !j.at("dyads").is_array() || j.at("dyads").empty())
    throw ConfigError("config.dyads: expected a non-empty array");
  for (std::size_t i = 0; i < j.at("dyads").size(); ++i) {
    const json& d = j.at("dyads")[i];
    const std::string where = "config.dyads[" + std::to_string(i) + "]";
    detail::check_keys(d, {"member_a", "member_b"}, where);
    if (!d.contains("member_a") || !d.contains("member_b")) throw ConfigError(where + ": needs member_a and member_b");
    cfg.dyads.push_back({profile_from_json(d.at("member_a"), where + ".member_a"),
                         profile_from_json(d.at("member_b"), where + ".member_b")});
  }
  if (j.contains("coupling")) cfg.coupling = coupling_from_json(j.at("coupling"));
  if (j.contains("thresholds")) {
    detail::read_opt(j, "thresholds", cfg.thresholds, "config");
    if (cfg.thresholds.empty()) throw ConfigError("config.thresholds: must not be empty");
  }
  for (double t : cfg.thresholds)
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("config.thresholds: every threshold must lie in (0, 1)");
  detail::read_opt(j, "output_dir", cfg.output_dir, "config");
  return cfg;
}

/// Fully expanded config (defaults filled in), without output_dir.
inline json normalized_json(const SessionConfig& cfg) {
  json dyads = json::array();
  for (const auto& d : cfg.dyads)
    dyads.push_back({{"member_a", profile_to_json(d.member_a)}, {"member_b", profile_to_json(d.member_b)}});
  return {{"master_seed", cfg.master_seed},
          {"n_blocks", cfg.n_blocks},
          {"dyads", dyads},
          {"coupling", coupling_to_json(cfg.coupling)},
          {"thresholds", cfg.thresholds}};
}

/// FNV-1a (64 bit) of the normalized config dump, as 16 hex digits.
inline std::string config_hash(const SessionConfig& cfg) {
  const std::string text = normalized_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xF];
  return out;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline SessionConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

struct Manifest {
  std::string toolkit_version;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  SessionConfig config;
};

inline json manifest_json(const SessionConfig& cfg) {
  return {{"toolkit_version", kToolkitVersion},
          {"config_hash", config_hash(cfg)},
          {"master_seed", cfg.master_seed},
          {"config", normalized_json(cfg)}};
}

/// Reads a manifest and checks that its recorded hash matches its config.
inline Manifest load_manifest(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  for (const char* key : {"toolkit_version", "config_hash", "master_seed", "config"})
    if (!j.contains(key)) throw ConfigError(path.string() + ": manifest lacks '" + key + "'");
  Manifest m;
  m.toolkit_version = j.at("toolkit_version").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.config = config_from_json(j.at("config"));
  const std::string recomputed = config_hash(m.config);
  if (recomputed != m.config_hash)
    throw ConfigError(path.string() + ": config hash mismatch (manifest says " + m.config_hash + ", config hashes to " +
                      recomputed + ")");
  return m;
}

}  // namespace hapdec::harness
