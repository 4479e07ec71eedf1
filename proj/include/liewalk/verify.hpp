#pragma once

#include <string>
#include <vector>

#include "liewalk/config.hpp"

namespace liewalk {

struct VerifyCheck {
  std::string name;
  bool pass = false;
  /// Slack left before the check would fail; nonnegative iff pass, except
  /// for exact identities where it is 0 on pass.
  double margin = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass = false;
};

/// Runs the named invariant battery: kernel closed forms, exact walk
/// entropies, separation rates, smoothing/conditioning estimators, scale
/// selection, stopped walks, and Monte-Carlo determinism.  Monte-Carlo
/// margins use cfg.verify.tolerance standard errors.  Throws ConfigError
/// when the configured kernel cannot be built at all.
VerifyReport run_verify_battery(const ExperimentConfig& cfg);

std::string to_json(const VerifyReport& r);

}  // namespace liewalk
