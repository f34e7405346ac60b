#pragma once

#include <filesystem>
#include <string>

#include "recall/config.hpp"
#include "recall/thread_pool.hpp"

namespace recall::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitInfeasible = 4;

// Resolved invocation shared by every subcommand.
struct RunContext {
  ExperimentConfig cfg;
  std::filesystem::path out_dir;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;

  void write_manifest(const std::string& command) const;
  std::filesystem::path out(const std::string& filename) const {
    return out_dir / filename;
  }
};

RunContext make_context(const std::string& command, const std::string& config_path,
                        const std::vector<std::string>& overrides,
                        const std::string& preset, const std::string& out_dir,
                        std::int64_t seed_flag, int jobs_flag);

int cmd_am_capacity(RunContext& ctx);
int cmd_tf_construct(RunContext& ctx);
int cmd_tf_train(RunContext& ctx);
int cmd_dynamics(RunContext& ctx);
int cmd_bounds(RunContext& ctx);

}  // namespace recall::cli
