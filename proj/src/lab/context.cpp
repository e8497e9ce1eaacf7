#include "context.hpp"

#include <cmath>
#include <fstream>

#include "cqms/errors.hpp"

namespace cqms::lab {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

const std::map<std::string, std::uint64_t>& default_caps() {
  static const std::map<std::string, std::uint64_t> caps{
      {"cardinality", 10'000'000}, {"iterations", 10'000}, {"ball_elements", 6'000'000}, {"compositions", 100'000}};
  return caps;
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::string_view stream) { return splitmix64(seed ^ fnv1a(stream)); }

std::mt19937_64 make_stream(std::uint64_t seed, std::string_view stream) {
  return std::mt19937_64(stream_seed(seed, stream));
}

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false, true);
  if (j.is_discarded() || !j.is_object()) throw ParameterError("config " + path.string() + " is not a JSON object");
  return j;
}

void validate_config(const nlohmann::json& config) {
  if (!config.contains("seed") || !config["seed"].is_number_unsigned())
    throw ParameterError("config needs a non-negative integer \"seed\"");
  if (config.contains("caps")) {
    for (const auto& [name, v] : config["caps"].items()) {
      if (!default_caps().count(name)) throw ParameterError("unknown cap \"" + name + "\"");
      if (!v.is_number() || !(v.get<double>() >= 1)) throw ParameterError("cap \"" + name + "\" must be positive");
    }
  }
  if (!config.contains("commands") || !config["commands"].is_object())
    throw ParameterError("config needs a \"commands\" object");
  for (const auto& [name, section] : config["commands"].items()) {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw ParameterError("unknown command section \"" + name + "\"");
    if (!section.contains("scenarios") || !section["scenarios"].is_array())
      throw ParameterError("command \"" + name + "\" needs a \"scenarios\" array");
    for (const auto& sc : section["scenarios"]) {
      if (!sc.contains("name") || !sc["name"].is_string()) throw ParameterError("scenario without a name in " + name);
      if (!sc.contains("anchor") || !sc["anchor"].is_string() || sc["anchor"].get<std::string>().empty())
        throw ParameterError("scenario " + sc["name"].get<std::string>() + " needs an anchor string");
    }
  }
}

namespace detail {

Context::Context(std::string command, const json& config, const RunOptions& options)
    : command_(std::move(command)), config_(config) {
  validate_config(config_);
  seed_ = options.seed ? *options.seed : config_["seed"].get<std::uint64_t>();
  if (!config_["commands"].contains(command_))
    throw ParameterError("config has no section for command \"" + command_ + "\"");
  section_ = config_["commands"][command_];
  if (options.cache_dir)
    cache_dir_ = options.cache_dir;
  else if (config_.contains("cache_dir"))
    cache_dir_ = std::filesystem::path(config_["cache_dir"].get<std::string>());
}

std::mt19937_64 Context::rng(std::string_view scenario, std::string_view purpose) const {
  std::string name = command_;
  name.append("/").append(scenario).append("/").append(purpose);
  return make_stream(seed_, name);
}

std::uint64_t Context::cap(const std::string& name) const {
  const auto& defaults = default_caps();
  auto it = defaults.find(name);
  if (it == defaults.end()) throw ParameterError("unknown cap " + name);
  if (config_.contains("caps") && config_["caps"].contains(name))
    return static_cast<std::uint64_t>(config_["caps"][name].get<double>());
  return it->second;
}

PowerIterationOptions Context::iteration_limits() const {
  PowerIterationOptions opt;
  opt.max_iterations = cap("iterations");
  return opt;
}

GroupPtr Context::group(const json& descriptor) {
  auto g = GroupDescriptor::from_json(descriptor);
  fingerprints_.insert(g->fingerprint());
  return g;
}

WordMetric& Context::metric(const GroupPtr& group) {
  auto& entry = metrics_[group->fingerprint()];
  if (!entry.metric) {
    MetricOptions opt;
    opt.max_elements = cap("ball_elements");
    entry.metric = std::make_unique<WordMetric>(group, opt);
    if (cache_dir_ && entry.metric->load_cache(*cache_dir_ / (group->fingerprint() + ".balls.jsonl")))
      entry.loaded_radius = entry.metric->cached_radius();
  }
  fingerprints_.insert(group->fingerprint());
  return *entry.metric;
}

Automorphism Context::automorphism(const GroupPtr& group, const json& spec) const {
  return Automorphism::from_json(group, spec);
}

std::optional<std::vector<std::pair<std::uint64_t, std::uint64_t>>> Context::cached_growth(
    const GroupPtr& g, std::uint64_t n_max) const {
  if (!cache_dir_) return std::nullopt;
  std::ifstream in(*cache_dir_ / (g->fingerprint() + ".growth.json"));
  if (!in) return std::nullopt;
  const auto j = json::parse(in, nullptr, false);
  if (j.is_discarded() || j.value("descriptor_hash", std::string{}) != g->fingerprint()) return std::nullopt;
  const auto counts = j.at("counts").get<std::vector<std::uint64_t>>();
  if (counts.size() < n_max + 1) return std::nullopt;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (std::uint64_t n = 0; n <= n_max; ++n) out.emplace_back(n, counts[n]);
  return out;
}

void Context::store_growth(const GroupPtr& g,
                           const std::vector<std::pair<std::uint64_t, std::uint64_t>>& counts) const {
  if (!cache_dir_) return;
  if (auto have = cached_growth(g, counts.empty() ? 0 : counts.back().first); have && have->size() >= counts.size())
    return;
  std::filesystem::create_directories(*cache_dir_);
  std::vector<std::uint64_t> values;
  for (const auto& [n, b] : counts) values.push_back(b);
  std::ofstream out(*cache_dir_ / (g->fingerprint() + ".growth.json"));
  out << json{{"descriptor", g->to_json()}, {"descriptor_hash", g->fingerprint()}, {"counts", values}}.dump() << '\n';
}

void Context::flush_caches() {
  if (!cache_dir_) return;
  for (auto& [fp, entry] : metrics_)
    if (entry.metric->cached_radius() > entry.loaded_radius)
      entry.metric->save_cache(*cache_dir_ / (fp + ".balls.jsonl"));
}

json Context::fingerprints() const { return json(std::vector<std::string>(fingerprints_.begin(), fingerprints_.end())); }

Scenario::Scenario(CommandResult& out, const json& spec)
    : out_(out), spec_(spec), start_(std::chrono::steady_clock::now()) {
  name_ = spec.at("name").get<std::string>();
  anchor_ = spec.at("anchor").get<std::string>();
  if (spec.contains("criterion")) criterion_ = spec["criterion"].get<int>();
  block_ = json::object();
  block_["name"] = name_;
  block_["anchor"] = anchor_;
}

Scenario::~Scenario() {
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  out_.timings.push_back({name_, criterion_, seconds});
  out_.report["scenarios"].push_back(std::move(block_));
}

void Scenario::verdict(std::string check, bool passed, json observed, json bound, std::string detail) {
  Verdict v;
  v.scenario = name_;
  v.check = std::move(check);
  v.passed = passed;
  v.anchor = anchor_;
  v.criterion = criterion_;
  v.observed = std::move(observed);
  v.bound = std::move(bound);
  v.detail = std::move(detail);
  out_.verdicts.push_back(std::move(v));
}

void Scenario::fail(const std::string& error) {
  block_["error"] = error;
  verdict("completed", false, nullptr, nullptr, error);
}

json tagged(const json& value, std::string certificate) {
  return json{{"value", value}, {"certificate", std::move(certificate)}};
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail
}  // namespace cqms::lab
