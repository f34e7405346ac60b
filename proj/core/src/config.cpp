#include "recall/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace recall {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  ExperimentConfig cfg;
  std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    auto j = nlohmann::json::parse(body);
    const auto& obj = j.contains("config") ? j.at("config") : j;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (it.value().is_string())
        cfg.entries_[it.key()] = it.value().get<std::string>();
      else
        cfg.entries_[it.key()] = it.value().dump();
    }
    return cfg;
  }
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: missing '=' at line " +
                                  std::to_string(lineno));
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: empty key at line " + std::to_string(lineno));
    cfg.entries_[key] = value;
  }
  return cfg;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
  consumed_.insert(key);
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  consumed_.insert(key);
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument("config: key '" + key + "' is not a number: " +
                                it->second);
  }
}

std::size_t ExperimentConfig::get_size(const std::string& key,
                                       std::size_t fallback) const {
  double v = get_double(key, static_cast<double>(fallback));
  if (v < 0.0 || v != std::floor(v))
    throw std::invalid_argument("config: key '" + key + "' must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
  return static_cast<int>(get_size(key, static_cast<std::size_t>(fallback)));
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key,
                                        std::uint64_t fallback) const {
  consumed_.insert(key);
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (...) {
    throw std::invalid_argument("config: key '" + key + "' is not an integer");
  }
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  std::string v = get_string(key, fallback ? "true" : "false");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: key '" + key + "' is not a boolean: " + v);
}

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::vector<double> ExperimentConfig::get_double_list(
    const std::string& key, std::vector<double> fallback) const {
  consumed_.insert(key);
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  for (const std::string& item : split_commas(it->second)) out.push_back(std::stod(item));
  if (out.empty())
    throw std::invalid_argument("config: key '" + key + "' is an empty list");
  return out;
}

std::vector<std::size_t> ExperimentConfig::get_size_list(
    const std::string& key, std::vector<std::size_t> fallback) const {
  consumed_.insert(key);
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<std::size_t> out;
  for (const std::string& item : split_commas(it->second))
    out.push_back(static_cast<std::size_t>(std::stoull(item)));
  if (out.empty())
    throw std::invalid_argument("config: key '" + key + "' is an empty list");
  return out;
}

void ExperimentConfig::require_all_consumed() const {
  std::string unknown;
  for (const auto& [key, value] : entries_) {
    if (!consumed_.count(key)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty())
    throw std::invalid_argument("config: unknown keys: " + unknown);
}

std::string ExperimentConfig::manifest_json(const std::string& command) const {
  nlohmann::json j;
  j["command"] = command;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [key, value] : entries_) cfg[key] = value;
  j["config"] = cfg;
  return j.dump(2) + "\n";
}

}  // namespace recall
