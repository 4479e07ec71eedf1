#include "liewalk/commands.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "liewalk/conditioning.hpp"
#include "liewalk/entropy.hpp"
#include "liewalk/kernel.hpp"
#include "liewalk/measure.hpp"
#include "liewalk/scales.hpp"
#include "liewalk/verify.hpp"
#include "liewalk/version.hpp"
#include "liewalk/walks.hpp"

namespace liewalk {

namespace {

using nlohmann::json;

std::string iso8601_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunContext {
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  RunManifest manifest;
};

RunContext begin_run(const ExperimentConfig& cfg, const CmdOptions& opts) {
  RunContext ctx;
  ctx.seed = opts.seed.value_or(cfg.seed);
  exec::set_threads(opts.threads.value_or(cfg.threads));
  ctx.dir = opts.out_dir.empty() ? "." : opts.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(ctx.dir, ec);
  ctx.manifest.config_hash = config_hash(cfg);
  ctx.manifest.seed = ctx.seed;
  ctx.manifest.version = kVersion;
  ctx.manifest.wall_clock = iso8601_now();
  return ctx;
}

void write_file(RunContext& ctx, const std::string& name,
                const std::string& content, bool record = true) {
  const std::filesystem::path path = ctx.dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write output file: " + path.string());
  out << content;
  if (!out) throw Error("failed writing output file: " + path.string());
  if (record) ctx.manifest.outputs.push_back(name);
}

CmdResult finish(RunContext ctx, int exit_code,
                 std::vector<std::string> notes) {
  write_file(ctx, "manifest.json", to_json(ctx.manifest), false);
  CmdResult res;
  res.exit_code = exit_code;
  res.manifest = std::move(ctx.manifest);
  res.notes = std::move(notes);
  return res;
}

StoppingTimeSpec walk_spec(const ExperimentConfig& cfg) {
  if (cfg.walk.kind == "deterministic") {
    return StoppingTimeSpec::deterministic(cfg.walk.schedule, cfg.walk.cap);
  }
  return StoppingTimeSpec::renewal(cfg.walk.costs, cfg.walk.thresholds,
                                   cfg.walk.cap);
}

json ldp_to_json(const LdpReport& r) {
  json out;
  out["epsilon"] = r.epsilon;
  out["grid"] = r.grid;
  out["L"] = r.L;
  out["tail"] = r.tail;
  out["used_monte_carlo"] = r.used_monte_carlo;
  out["degenerate"] = r.degenerate;
  out["delta_hat"] = r.delta_hat;
  out["delta_std_error"] = r.delta_std_error;
  out["passes"] = r.passes;
  out["note"] = r.note;
  return out;
}

}  // namespace

int exit_code_for(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const RangeTooNarrow*>(&e)) return 2;
  if (dynamic_cast<const SupportOverflow*>(&e)) return 3;
  if (dynamic_cast<const CapExceeded*>(&e)) return 3;
  if (dynamic_cast<const InsufficientSamples*>(&e)) return 3;
  return 1;
}

CmdResult cmd_verify(const ExperimentConfig& cfg, const CmdOptions& opts) {
  RunContext ctx = begin_run(cfg, opts);
  const VerifyReport report = run_verify_battery(cfg);
  write_file(ctx, "verify_report.json", to_json(report));
  std::vector<std::string> notes;
  for (const VerifyCheck& c : report.checks) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-34s %s  margin=%.4g", c.name.c_str(),
                  c.pass ? "pass" : "FAIL", c.margin);
    notes.push_back(line);
  }
  notes.push_back(report.all_pass ? "all checks passed"
                                  : "one or more checks FAILED");
  return finish(std::move(ctx), report.all_pass ? 0 : 1, std::move(notes));
}

CmdResult cmd_entropy(const ExperimentConfig& cfg, const CmdOptions& opts) {
  RunContext ctx = begin_run(cfg, opts);
  const LieGroupModel model = config_model(cfg);
  const FinSuppMeasure mu = config_measure(cfg);
  const RngStream base(ctx.seed, 0);

  std::string csv = "k,r,H_scale,std_error,bias_budget,n_samples,H_discrete\n";
  std::uint64_t row = 0;
  for (int k : cfg.entropy.powers) {
    const FinSuppMeasure qk = convolution_power(mu, k);
    const double h_discrete = shannon_entropy(qk);
    for (double r : cfg.scales) {
      const SmoothingKernel kernel(model, cfg.a, r);
      const EntropyEstimate est =
          entropy_at_scale(qk, kernel, cfg.n_samples, base.fork(row));
      char line[256];
      std::snprintf(line, sizeof(line),
                    "%d,%.17g,%.17g,%.17g,%.17g,%zu,%.17g\n", k, r, est.value,
                    est.std_error, est.bias_budget, est.n_samples, h_discrete);
      csv += line;
      ++row;
    }
  }
  write_file(ctx, "entropy.csv", csv);
  return finish(std::move(ctx), 0,
                {"wrote entropy.csv with " + std::to_string(row) + " rows"});
}

CmdResult cmd_trace(const ExperimentConfig& cfg, const CmdOptions& opts) {
  RunContext ctx = begin_run(cfg, opts);
  const FinSuppMeasure mu = config_measure(cfg);
  const TraceProfile profile =
      trace_profile(mu, cfg.a, cfg.trace.r_lo, cfg.trace.r_hi, cfg.trace.grid,
                    cfg.n_samples, RngStream(ctx.seed, 0));
  write_file(ctx, "trace_profile.csv", profile_to_csv(profile));
  char note[128];
  std::snprintf(note, sizeof(note),
                "wrote trace_profile.csv, log-integral %.6g",
                log_integral(profile));
  return finish(std::move(ctx), 0, {note});
}

CmdResult cmd_select(const ExperimentConfig& cfg, const CmdOptions& opts) {
  RunContext ctx = begin_run(cfg, opts);
  const FinSuppMeasure mu = config_measure(cfg);
  try {
    const GapTraceReport report = entropy_gap_to_trace_sum(
        mu, cfg.a, cfg.select.r1, cfg.select.r2, cfg.select.A, cfg.n_samples,
        RngStream(ctx.seed, 0), cfg.select.required_gap,
        cfg.select.trace_constant, cfg.select.grid);
    json gap;
    gap["failed"] = false;
    gap["C"] = report.C;
    gap["C_std_error"] = report.C_std_error;
    gap["N"] = report.N;
    gap["predicted_bound"] = report.predicted_bound;
    gap["probes_r1"] = report.probes_r1;
    gap["entropy_r1"] = report.entropy_r1;
    gap["probes_r2"] = report.probes_r2;
    gap["entropy_r2"] = report.entropy_r2;
    write_file(ctx, "gap_report.json", gap.dump(2) + "\n");
    write_file(ctx, "selection.json", to_json(report.selection));
    write_file(ctx, "trace_profile.csv", profile_to_csv(report.profile));
    char note[160];
    std::snprintf(note, sizeof(note),
                  "gap %.6g, selected %zu scales, certified trace sum %.6g",
                  report.C, report.selection.m, report.selection.trace_sum);
    return finish(std::move(ctx), 0, {note});
  } catch (const HypothesisFailed& e) {
    json gap;
    gap["failed"] = true;
    gap["message"] = e.what();
    write_file(ctx, "gap_report.json", gap.dump(2) + "\n");
    return finish(std::move(ctx), 1,
                  {std::string("entropy-gap hypothesis failed: ") + e.what()});
  }
}

CmdResult cmd_separation(const ExperimentConfig& cfg, const CmdOptions& opts) {
  RunContext ctx = begin_run(cfg, opts);
  const FinSuppMeasure mu = config_measure(cfg);
  std::string csv =
      "n,M_n,M_is_lower_bound,S_n,S_is_upper_bound,support_size,pair_count\n";
  for (int n = 1; n <= cfg.separation.n; ++n) {
    const SeparationReport sep = separation_rate(mu, n);
    char line[256];
    std::snprintf(line, sizeof(line), "%d,%.17g,%d,%.17g,%d,%zu,%zu\n", n,
                  sep.min_distance.bound(), sep.min_distance.at_least ? 1 : 0,
                  sep.rate ? *sep.rate : std::nan(""),
                  sep.rate_is_upper_bound ? 1 : 0, sep.support_size,
                  sep.pair_count);
    csv += line;
  }
  write_file(ctx, "separation.csv", csv);
  return finish(std::move(ctx), 0,
                {"wrote separation.csv for n = 1.." +
                 std::to_string(cfg.separation.n)});
}

CmdResult cmd_walk(const ExperimentConfig& cfg, const CmdOptions& opts) {
  RunContext ctx = begin_run(cfg, opts);
  const FinSuppMeasure mu = config_measure(cfg);
  const StoppingTimeSpec spec = walk_spec(cfg);

  const HarnessTable table =
      theorem_harness(mu, spec, cfg.a, cfg.walk.S, cfg.walk.grid,
                      cfg.n_samples, RngStream(ctx.seed, 0), cfg.walk.epsilon);
  const LdpReport ldp = ldp_check(mu, spec, cfg.walk.epsilon, cfg.walk.grid,
                                  cfg.n_samples, RngStream(ctx.seed, 1));

  write_file(ctx, "harness.csv", harness_to_csv(table));
  json report;
  report["a"] = table.a;
  report["S"] = table.S;
  report["epsilon"] = table.epsilon;
  report["h_mu"] = table.h_mu;
  report["h_mu_steps"] = table.h_mu_steps;
  report["max_separation_rate"] = table.max_separation_rate;
  report["scale_rule_ok"] = table.scale_rule_ok;
  report["warning"] = table.warning;
  report["ldp"] = ldp_to_json(ldp);
  write_file(ctx, "walk_report.json", report.dump(2) + "\n");

  std::vector<std::string> notes;
  int exit_code = 0;
  const double tol = cfg.verify.tolerance;
  for (const HarnessRow& row : table.rows) {
    if (row.deficit < -(tol * row.std_error + row.bias_budget)) {
      char line[160];
      std::snprintf(line, sizeof(line),
                    "entropy deficit at n=%zu exceeds its allowance: %.6g",
                    row.n, row.deficit);
      notes.push_back(line);
      exit_code = 1;
    }
  }
  if (!ldp.passes) {
    char line[192];
    std::snprintf(line, sizeof(line),
                  "deviation-rate check failed: delta %.4g, std error %.4g "
                  "(%s)",
                  ldp.delta_hat, ldp.delta_std_error, ldp.note.c_str());
    notes.push_back(line);
    exit_code = 1;
  }
  if (!table.scale_rule_ok) notes.push_back("warning: " + table.warning);
  notes.push_back("wrote harness.csv and walk_report.json");
  return finish(std::move(ctx), exit_code, std::move(notes));
}

CmdResult run_command(const std::string& name, const ExperimentConfig& cfg,
                      const CmdOptions& opts) {
  if (name == "verify") return cmd_verify(cfg, opts);
  if (name == "entropy") return cmd_entropy(cfg, opts);
  if (name == "trace") return cmd_trace(cfg, opts);
  if (name == "select") return cmd_select(cfg, opts);
  if (name == "separation") return cmd_separation(cfg, opts);
  if (name == "walk") return cmd_walk(cfg, opts);
  throw ConfigError("unknown command '" + name + "'");
}

}  // namespace liewalk
