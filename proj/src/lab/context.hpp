#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cqms/automorphism.hpp"
#include "cqms/group.hpp"
#include "cqms/lab/lab.hpp"
#include "cqms/operator.hpp"
#include "cqms/word_metric.hpp"

namespace cqms::lab::detail {

using nlohmann::json;

class Context {
 public:
  Context(std::string command, const json& config, const RunOptions& options);

  const std::string& command() const { return command_; }
  const json& section() const { return section_; }
  std::uint64_t seed() const { return seed_; }

  /// Generator for the stream "<command>/<scenario>/<purpose>".
  std::mt19937_64 rng(std::string_view scenario, std::string_view purpose) const;

  GroupPtr group(const json& descriptor);
  WordMetric& metric(const GroupPtr& group);
  Automorphism automorphism(const GroupPtr& group, const json& spec) const;

  std::uint64_t cap(const std::string& name) const;
  PowerIterationOptions iteration_limits() const;
  const std::optional<std::filesystem::path>& cache_dir() const { return cache_dir_; }

  /// Ball-size sequences are cached next to the metric caches.
  std::optional<std::vector<std::pair<std::uint64_t, std::uint64_t>>> cached_growth(const GroupPtr& g,
                                                                                   std::uint64_t n_max) const;
  void store_growth(const GroupPtr& g, const std::vector<std::pair<std::uint64_t, std::uint64_t>>& counts) const;

  /// Writes metric caches that grew during the run.
  void flush_caches();
  json fingerprints() const;

 private:
  struct MetricEntry {
    std::unique_ptr<WordMetric> metric;
    std::uint64_t loaded_radius = 0;
  };

  std::string command_;
  json config_;
  json section_;
  std::uint64_t seed_ = 0;
  std::optional<std::filesystem::path> cache_dir_;
  std::map<std::string, MetricEntry> metrics_;
  std::set<std::string> fingerprints_;
};

/// Collects the result block and verdicts of one scenario. Exceptions thrown
/// while the scenario runs become a failed "completed" verdict.
class Scenario {
 public:
  Scenario(CommandResult& out, const json& spec);
  ~Scenario();
  Scenario(const Scenario&) = delete;
  Scenario& operator=(const Scenario&) = delete;

  const json& spec() const { return spec_; }
  const std::string& name() const { return name_; }
  json& block() { return block_; }

  void verdict(std::string check, bool passed, json observed, json bound, std::string detail = {});
  void fail(const std::string& error);

 private:
  CommandResult& out_;
  json spec_;
  std::string name_;
  std::string anchor_;
  std::optional<int> criterion_;
  json block_;
  std::chrono::steady_clock::time_point start_;
};

/// {"value": v, "certificate": tag}
json tagged(const json& value, std::string certificate);
std::string format_number(double v);

/// Runs body(scenario) for every entry of section["scenarios"].
template <class Body>
void for_each_scenario(Context& ctx, CommandResult& out, Body&& body) {
  const auto& list = ctx.section().at("scenarios");
  std::set<std::string> names;
  for (const auto& spec : list) {
    Scenario sc(out, spec);
    if (!names.insert(sc.name()).second) {
      sc.fail("duplicate scenario name");
      continue;
    }
    try {
      body(sc);
    } catch (const std::exception& e) {
      sc.fail(e.what());
    }
  }
}

void run_growth(Context& ctx, CommandResult& out);
void run_lipschitz(Context& ctx, CommandResult& out);
void run_hyperbolic_cert(Context& ctx, CommandResult& out);
void run_leibniz(Context& ctx, CommandResult& out);
void run_seminorm(Context& ctx, CommandResult& out);
void run_mdim(Context& ctx, CommandResult& out);
void run_entropy(Context& ctx, CommandResult& out);

}  // namespace cqms::lab::detail
