#include "common.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "linktheft/errors.hpp"

namespace linktheft::cli {

void take_last_wins(CLI::App& app) {
  for (CLI::Option* opt : app.get_options()) {
    if (opt->get_expected_min() > 0)
      opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
}

namespace {

std::string flag_to_env(const std::string& flag) {
  std::string env = "LINKTHEFT_";
  for (char c : flag) env += c == '-' ? '_' : static_cast<char>(toupper(c));
  return env;
}

std::string flag_to_key(const std::string& flag) {
  std::string key = flag;
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

}  // namespace

std::vector<std::string> resolve_args(
    const std::vector<std::string>& args,
    const std::vector<std::string>& known_flags) {
  // Pre-scan for --config; its values sit between env and explicit flags.
  nlohmann::json file_cfg;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      std::ifstream in(args[i + 1]);
      if (!in) throw ConfigError("cannot open config file " + args[i + 1]);
      try {
        in >> file_cfg;
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + args[i + 1] + ": " + e.what());
      }
      if (!file_cfg.is_object())
        throw ConfigError("config file must hold a JSON object");
    }
  }

  std::vector<std::string> effective;
  for (const std::string& flag : known_flags) {
    if (const char* env = std::getenv(flag_to_env(flag).c_str())) {
      effective.push_back("--" + flag);
      effective.push_back(env);
    }
  }
  for (const std::string& flag : known_flags) {
    const std::string key = flag_to_key(flag);
    if (!file_cfg.contains(key)) continue;
    const auto& v = file_cfg[key];
    effective.push_back("--" + flag);
    if (v.is_string()) {
      effective.push_back(v.get<std::string>());
    } else {
      effective.push_back(v.dump());
    }
  }
  effective.insert(effective.end(), args.begin(), args.end());
  return effective;
}

std::vector<uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<uint64_t> seeds;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      seeds.push_back(std::stoull(tok));
    } catch (...) {
      throw ConfigError("bad seed '" + tok + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("empty seed list");
  std::vector<uint64_t> unique = seeds;
  std::sort(unique.begin(), unique.end());
  if (std::adjacent_find(unique.begin(), unique.end()) != unique.end())
    throw ConfigError("seeds must be distinct");
  return seeds;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stoi(tok));
    } catch (...) {
      throw ConfigError("bad integer '" + tok + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

std::vector<int> parse_attack_list(const std::string& csv) {
  if (csv == "all") return {0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<int> ids = parse_int_list(csv);
  for (int id : ids)
    if (id < 0 || id > 7) throw ConfigError("attack ids must be in 0..7");
  return ids;
}

Dataset load_bundle_checked(const std::string& dir, bool warn_to_stderr) {
  std::vector<std::string> warnings;
  Dataset ds = load_bundle(dir, &warnings);
  if (warn_to_stderr)
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return ds;
}

void apply_model_flags(ExperimentConfig& cfg, const ModelFlagValues& flags) {
  if (flags.epochs >= 0) cfg.target_config.epochs = flags.epochs;
  if (flags.learning_rate >= 0.0)
    cfg.target_config.learning_rate = flags.learning_rate;
  if (flags.dropout >= 0.0) {
    cfg.target_config.dropout_rate = flags.dropout;
    cfg.reference_config.dropout_rate = flags.dropout;
    cfg.attack_config.dropout_rate = flags.dropout;
  }
  if (!flags.hidden.empty())
    cfg.target_config.hidden_dims = parse_int_list(flags.hidden);
}

}  // namespace linktheft::cli
