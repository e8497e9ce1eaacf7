#pragma once

// Experiment driver shared by the cqms-lab tool and the acceptance runner.
//
// A configuration is one JSON document:
//
//   {
//     "seed": 20261018,
//     "caps": {"cardinality": 1e7, "iterations": 1e4, "ball_elements": 6e6, "compositions": 1e5},
//     "cache_dir": "cache",
//     "output": {"dir": "out", "emit": "json"},
//     "commands": {"growth": {"scenarios": [...]}, "entropy": {...}, ...}
//   }
//
// Every scenario carries a unique "name", an "anchor" string naming the
// result it checks, and optionally an integer "criterion" used for grouping.
// The remaining scenario fields depend on the command (see configs/).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cqms::lab {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> cache_dir;
  /// Run the commands of a suite concurrently. Results do not depend on it.
  bool parallel = false;
};

struct Verdict {
  std::string scenario;
  std::string check;
  bool passed = false;
  std::string anchor;
  std::optional<int> criterion;
  nlohmann::json observed;
  nlohmann::json bound;
  std::string detail;
};

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Wall-clock per scenario. Kept out of the JSON report so reports stay
/// byte-identical between runs.
struct ScenarioTiming {
  std::string scenario;
  std::optional<int> criterion;
  double seconds = 0;
};

struct CommandResult {
  std::string command;
  nlohmann::json report;
  std::vector<Verdict> verdicts;
  std::vector<Table> tables;
  std::vector<ScenarioTiming> timings;

  bool passed() const;
};

const std::vector<std::string>& command_names();

/// splitmix64(seed ^ fnv1a(stream)); each named stream gets its own generator.
std::uint64_t stream_seed(std::uint64_t seed, std::string_view stream);
std::mt19937_64 make_stream(std::uint64_t seed, std::string_view stream);

nlohmann::json load_config(const std::filesystem::path& path);
/// Throws ParameterError when the seed is missing or a cap is not positive.
void validate_config(const nlohmann::json& config);

CommandResult run_command(const std::string& command, const nlohmann::json& config, const RunOptions& options = {});
/// Runs every command that has a section in the config, in command_names() order.
std::vector<CommandResult> run_suite(const nlohmann::json& config, const RunOptions& options = {});

nlohmann::json suite_report(const std::vector<CommandResult>& results);

nlohmann::json to_json(const Verdict& v);
Table verdict_table(const std::vector<Verdict>& verdicts);
void write_csv(std::ostream& out, const Table& table);

}  // namespace cqms::lab
