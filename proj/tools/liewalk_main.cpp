#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include "liewalk/commands.hpp"
#include "liewalk/config.hpp"
#include "liewalk/errors.hpp"
#include "liewalk/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"entropy-at-scale laboratory for random walks on matrix groups"};
  app.set_version_flag("--version", std::string("liewalk ") + liewalk::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  const char* env_out = std::getenv("LIEWALK_OUT");
  std::string out_dir = env_out ? env_out : ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  app.add_option("--config", config_path, "experiment config file (JSON)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--threads", threads,
                 "worker count; never changes the results");

  app.add_subcommand("verify", "run the invariant battery")->fallthrough();
  app.add_subcommand("entropy", "entropy at scale of convolution powers")
      ->fallthrough();
  app.add_subcommand("trace", "trace lower-bound profile over scales")
      ->fallthrough();
  app.add_subcommand("select", "entropy gap to selected trace scales")
      ->fallthrough();
  app.add_subcommand("separation", "separation rates of the walk")
      ->fallthrough();
  app.add_subcommand("walk", "stopped-walk entropy growth harness")
      ->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const liewalk::ExperimentConfig cfg = config_path.empty()
                                              ? liewalk::default_config()
                                              : liewalk::load_config(config_path);
    liewalk::CmdOptions opts;
    opts.out_dir = out_dir;
    opts.seed = seed;
    opts.threads = threads;

    const std::string name = app.get_subcommands().front()->get_name();
    const liewalk::CmdResult res = liewalk::run_command(name, cfg, opts);
    for (const std::string& line : res.notes) {
      std::printf("%s\n", line.c_str());
    }
    return res.exit_code;
  } catch (const liewalk::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return liewalk::exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
}
