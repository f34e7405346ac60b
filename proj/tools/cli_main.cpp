#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "common.hpp"
#include "recall/errors.hpp"

namespace {

using recall::cli::RunContext;

struct SubArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string preset;
  std::string out_dir;
  std::int64_t seed = -1;
  int jobs = 0;
};

void add_common_flags(CLI::App* sub, SubArgs& args) {
  sub->add_option("--config", args.config_path, "config file (flat key=value or a run manifest)");
  sub->add_option("--set", args.overrides, "override a config key (key=value, repeatable)");
  sub->add_option("--preset", args.preset, "named preset");
  sub->add_option("--out", args.out_dir, "output directory");
  sub->add_option("--seed", args.seed, "master seed");
  sub->add_option("--jobs", args.jobs, "worker pool size");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"associative-memory and factual-recall workbench"};
  app.require_subcommand(1);

  struct Cmd {
    const char* name;
    const char* help;
    int (*fn)(RunContext&);
  };
  const Cmd cmds[] = {
      {"am-capacity", "associative-memory capacity sweeps", recall::cli::cmd_am_capacity},
      {"tf-construct", "explicit one-layer transformer constructions", recall::cli::cmd_tf_construct},
      {"tf-train", "train one-layer transformers (single / capacity / tradeoff)", recall::cli::cmd_tf_train},
      {"dynamics", "linear-attention gradient-flow trajectories", recall::cli::cmd_dynamics},
      {"bounds", "information-theoretic lower bounds", recall::cli::cmd_bounds},
  };

  std::vector<SubArgs> args(std::size(cmds));
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(cmds); ++i) {
    CLI::App* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    add_common_flags(sub, args[i]);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : recall::cli::kExitUsage;
  }

  for (std::size_t i = 0; i < std::size(cmds); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      RunContext ctx = recall::cli::make_context(
          cmds[i].name, args[i].config_path, args[i].overrides, args[i].preset,
          args[i].out_dir, args[i].seed, args[i].jobs);
      return cmds[i].fn(ctx);
    } catch (const recall::InfeasibleError& e) {
      std::fprintf(stderr, "construction infeasible: %s\n", e.what());
      return recall::cli::kExitInfeasible;
    } catch (const recall::NumericError& e) {
      std::fprintf(stderr, "numeric failure: %s\n", e.what());
      return recall::cli::kExitNumeric;
    } catch (const std::invalid_argument& e) {
      std::fprintf(stderr, "usage error: %s\n", e.what());
      return recall::cli::kExitUsage;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return recall::cli::kExitNumeric;
    }
  }
  return recall::cli::kExitUsage;
}
