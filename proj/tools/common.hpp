#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linktheft/dataset.hpp"
#include "linktheft/experiment.hpp"

namespace CLI {
class App;
}

namespace linktheft::cli {

/// Repeated occurrences of an option take the last value, which lets
/// env-derived and config-file-derived flags be overridden by later ones.
void take_last_wins(CLI::App& app);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

/// Builds the effective argument list for a subcommand: defaults are
/// overridden by LINKTHEFT_* environment variables, then by the JSON config
/// file (--config FILE), then by the flags actually passed. Implemented by
/// injecting synthesized flags before the user's, so later (user) occurrences
/// win under CLI11's take-last policy.
std::vector<std::string> resolve_args(const std::vector<std::string>& args,
                                      const std::vector<std::string>& known_flags);

std::vector<uint64_t> parse_seed_list(const std::string& csv);
std::vector<int> parse_attack_list(const std::string& csv);
std::vector<int> parse_int_list(const std::string& csv);

Dataset load_bundle_checked(const std::string& dir, bool warn_to_stderr = true);

/// Applies shared model-hyperparameter flags onto an ExperimentConfig.
struct ModelFlagValues {
  int epochs = -1;
  double learning_rate = -1.0;
  double dropout = -1.0;
  std::string hidden;
};
void apply_model_flags(ExperimentConfig& cfg, const ModelFlagValues& flags);

}  // namespace linktheft::cli
