#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "liewalk/lie_group.hpp"
#include "liewalk/measure.hpp"
#include "liewalk/rational.hpp"

namespace liewalk {

/// One flat config per run.  Decimal literals convert to the nearest double
/// and are carried as that double's exact rational; "p/q" strings stay
/// exact verbatim.  Unknown keys are rejected.
struct ExperimentConfig {
  std::string model_name = "sl2r";
  int model_dim = 1;  // abelian only

  /// One generator per atom: matrix entries for the matrix models, a flat
  /// coordinate vector (dim x 1) for abelian.
  std::vector<RatMat> generators;
  std::vector<Rational> weights;

  double a = 2.0;
  std::vector<double> scales;

  std::size_t n_samples = 20000;
  std::uint64_t seed = 1;
  int threads = 1;

  struct EntropyBlock {
    std::vector<int> powers = {1, 2, 3};
  } entropy;

  struct TraceBlock {
    double r_lo = 0.005;
    double r_hi = 0.04;
    std::size_t grid = 12;
  } trace;

  struct SelectBlock {
    double r1 = 0.004;
    double r2 = 0.02;
    double A = 1.6;
    std::size_t grid = 16;
    double required_gap = 0.0;
    double trace_constant = 1.0;
  } select;

  struct SeparationBlock {
    int n = 5;
  } separation;

  struct WalkBlock {
    std::string kind = "renewal";  // "deterministic" | "renewal"
    std::vector<int> schedule;
    std::vector<Rational> costs;
    std::vector<Rational> thresholds;
    int cap = 64;
    double S = 0.76246189861593985;
    double epsilon = 0.2;
    std::vector<std::size_t> grid;
  } walk;

  struct VerifyBlock {
    /// Standard-error multiplier for every Monte-Carlo margin.
    double tolerance = 4.0;
  } verify;
};

/// Built-in configuration: the free pair in SL(2,R) with uniform weights.
ExperimentConfig default_config();

/// Parses and schema-validates JSON text.  Throws ConfigError on malformed
/// JSON, unknown keys, missing required fields, or infeasible values
/// (including a kernel radius that reaches the model's chart radius).
ExperimentConfig parse_config(const std::string& json_text);

/// Reads the file and delegates to parse_config.
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON emission: fixed key order, rationals as "p/q" strings.
/// parse_config(emit_config(c)) reproduces every in-memory value.
std::string emit_config(const ExperimentConfig& cfg);

bool operator==(const ExperimentConfig& x, const ExperimentConfig& y);

/// FNV-1a over the canonical emission, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

LieGroupModel config_model(const ExperimentConfig& cfg);

/// Builds the walk measure, surfacing generator validation failures as
/// ConfigError with the offending index.
FinSuppMeasure config_measure(const ExperimentConfig& cfg);

/// Run metadata written next to the data files.  wall_clock is
/// informational; every data output is a deterministic function of the
/// config and the effective seed.
struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::string wall_clock;
  std::vector<std::string> outputs;
};

std::string to_json(const RunManifest& m);

}  // namespace liewalk
