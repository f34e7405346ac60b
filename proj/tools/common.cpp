#include "common.hpp"

#include <stdexcept>
#include <thread>

#include "recall/csv.hpp"

namespace recall::cli {
namespace {

// Named presets are defaults: config-file keys and flags override them.
void apply_preset(ExperimentConfig& cfg, const std::string& command,
                  const std::string& preset,
                  const std::map<std::string, std::string>& existing) {
  std::map<std::string, std::string> keys;
  if (preset.empty()) return;
  if (command == "dynamics" && preset == "fig5") {
    keys = {{"S", "16"},        {"R", "4"},         {"D", "8"},
            {"T", "32"},        {"assignment", "balanced"},
            {"alpha", "1e-5"},  {"init", "balanced"},
            {"horizon", "9000"}, {"step", "0.5"},   {"mode", "flow"}};
  } else if (command == "dynamics" && preset == "confinement") {
    keys = {{"S", "64"},        {"R", "2"},         {"D", "2"},
            {"T", "8"},         {"n_noise", "256"}, {"assignment", "balanced"},
            {"alpha", "1e-5"},  {"init", "balanced"},
            {"horizon", "150"}, {"step", "0.5"},    {"mode", "flow"}};
  } else if (command == "am-capacity" && preset == "linear-fig1") {
    keys = {{"kind", "linear"},
            {"d_grid", "16,24,32,48"},
            {"n_grid", "8,12,16,24,32,48,64,96,128,192,256"}};
  } else if (command == "am-capacity" && preset == "mod32") {
    keys = {{"kind", "mlp-train"},
            {"map", "mod32"},
            {"d_grid", "16,32"},
            {"m_grid", "32,64,128"},
            {"n_grid", "32,64,96,128,192,256,384,512,768,1024"}};
  } else {
    throw std::invalid_argument("unknown preset '" + preset + "' for " + command);
  }
  for (const auto& [k, v] : keys)
    if (!existing.count(k)) cfg.set(k, v);
}

}  // namespace

void RunContext::write_manifest(const std::string& command) const {
  write_file_atomic(out_dir / "manifest.json", cfg.manifest_json(command));
}

RunContext make_context(const std::string& command, const std::string& config_path,
                        const std::vector<std::string>& overrides,
                        const std::string& preset, const std::string& out_dir,
                        std::int64_t seed_flag, int jobs_flag) {
  RunContext ctx;
  if (!config_path.empty())
    ctx.cfg = ExperimentConfig::from_file(config_path);
  for (const std::string& kv : overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    ctx.cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  std::string preset_name = preset;
  if (preset_name.empty()) preset_name = ctx.cfg.get_string("preset", "");
  apply_preset(ctx.cfg, command, preset_name, ctx.cfg.entries());
  if (!preset_name.empty()) ctx.cfg.set("preset", preset_name);

  if (seed_flag >= 0) ctx.cfg.set("seed", std::to_string(seed_flag));
  if (!out_dir.empty()) ctx.cfg.set("out", out_dir);
  if (jobs_flag > 0) ctx.cfg.set("jobs", std::to_string(jobs_flag));

  ctx.seed = ctx.cfg.get_u64("seed", 0);
  std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  ctx.jobs = ctx.cfg.get_size("jobs", hw);
  ctx.out_dir = ctx.cfg.get_string("out", "out");
  std::filesystem::create_directories(ctx.out_dir);
  return ctx;
}

}  // namespace recall::cli
