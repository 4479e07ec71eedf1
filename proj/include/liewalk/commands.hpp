#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "liewalk/config.hpp"
#include "liewalk/errors.hpp"

namespace liewalk {

struct CmdOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides cfg.seed
  std::optional<int> threads;         // overrides cfg.threads
};

struct CmdResult {
  int exit_code = 0;
  RunManifest manifest;
  /// Human-readable lines for the terminal; data lives in manifest.outputs.
  std::vector<std::string> notes;
};

/// Exit-code policy: 0 ok, 1 check failure, 2 config error, 3 resource cap.
int exit_code_for(const Error& e);

CmdResult cmd_verify(const ExperimentConfig& cfg, const CmdOptions& opts);
CmdResult cmd_entropy(const ExperimentConfig& cfg, const CmdOptions& opts);
CmdResult cmd_trace(const ExperimentConfig& cfg, const CmdOptions& opts);
CmdResult cmd_select(const ExperimentConfig& cfg, const CmdOptions& opts);
CmdResult cmd_separation(const ExperimentConfig& cfg, const CmdOptions& opts);
CmdResult cmd_walk(const ExperimentConfig& cfg, const CmdOptions& opts);

/// Dispatch by subcommand name; throws ConfigError for unknown names.
CmdResult run_command(const std::string& name, const ExperimentConfig& cfg,
                      const CmdOptions& opts);

}  // namespace liewalk
