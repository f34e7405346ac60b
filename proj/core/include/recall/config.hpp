#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace recall {

// Flat key=value experiment configuration. Typed getters mark keys as
// consumed; anything left unconsumed is rejected, so typos fail loudly.
// Accepts either the flat format ('#' comments) or a previously written run
// manifest (JSON with a "config" object), which makes manifests re-runnable.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;

  static ExperimentConfig from_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);  // overrides win

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback) const;
  std::vector<std::size_t> get_size_list(const std::string& key,
                                         std::vector<std::size_t> fallback) const;

  // Throws std::invalid_argument naming every unconsumed key.
  void require_all_consumed() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

  // JSON manifest with the resolved configuration; rerunning a command with
  // the manifest as --config reproduces the run.
  std::string manifest_json(const std::string& command) const;

 private:
  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> consumed_;
};

}  // namespace recall
