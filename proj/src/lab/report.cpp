#include <algorithm>
#include <future>
#include <ostream>

#include "context.hpp"
#include "cqms/errors.hpp"

namespace cqms::lab {

bool CommandResult::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"growth",  "leibniz", "seminorm",       "mdim",
                                              "entropy", "hyperbolic-cert", "lipschitz"};
  return names;
}

nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j{{"scenario", v.scenario}, {"check", v.check},   {"passed", v.passed},
                   {"anchor", v.anchor},     {"observed", v.observed}, {"bound", v.bound}};
  if (v.criterion) j["criterion"] = *v.criterion;
  if (!v.detail.empty()) j["detail"] = v.detail;
  return j;
}

CommandResult run_command(const std::string& command, const nlohmann::json& config, const RunOptions& options) {
  detail::Context ctx(command, config, options);
  CommandResult out;
  out.command = command;
  out.report = nlohmann::json::object();
  out.report["scenarios"] = nlohmann::json::array();

  if (command == "growth")
    detail::run_growth(ctx, out);
  else if (command == "leibniz")
    detail::run_leibniz(ctx, out);
  else if (command == "seminorm")
    detail::run_seminorm(ctx, out);
  else if (command == "mdim")
    detail::run_mdim(ctx, out);
  else if (command == "entropy")
    detail::run_entropy(ctx, out);
  else if (command == "hyperbolic-cert")
    detail::run_hyperbolic_cert(ctx, out);
  else if (command == "lipschitz")
    detail::run_lipschitz(ctx, out);
  else
    throw ParameterError("unknown command \"" + command + "\"");
  ctx.flush_caches();

  auto& r = out.report;
  r["command"] = command;
  r["version"] = kVersion;
  r["seed"] = ctx.seed();
  r["config"] = ctx.section();
  r["caps"] = {{"cardinality", ctx.cap("cardinality")},
               {"iterations", ctx.cap("iterations")},
               {"ball_elements", ctx.cap("ball_elements")},
               {"compositions", ctx.cap("compositions")}};
  r["cache_fingerprints"] = ctx.fingerprints();
  r["verdicts"] = nlohmann::json::array();
  for (const auto& v : out.verdicts) r["verdicts"].push_back(to_json(v));
  r["passed"] = out.passed();
  return out;
}

std::vector<CommandResult> run_suite(const nlohmann::json& config, const RunOptions& options) {
  validate_config(config);
  std::vector<std::string> todo;
  for (const auto& name : command_names())
    if (config["commands"].contains(name)) todo.push_back(name);
  std::vector<CommandResult> results;
  if (!options.parallel) {
    for (const auto& name : todo) results.push_back(run_command(name, config, options));
    return results;
  }
  std::vector<std::future<CommandResult>> jobs;
  for (const auto& name : todo)
    jobs.push_back(std::async(std::launch::async, [&, name] { return run_command(name, config, options); }));
  for (auto& j : jobs) results.push_back(j.get());
  return results;
}

nlohmann::json suite_report(const std::vector<CommandResult>& results) {
  nlohmann::json j{{"version", kVersion}, {"commands", nlohmann::json::array()}};
  bool all = true;
  for (const auto& r : results) {
    j["commands"].push_back(r.report);
    all = all && r.passed();
  }
  j["passed"] = all;
  return j;
}

Table verdict_table(const std::vector<Verdict>& verdicts) {
  Table t{"verdicts", {"scenario", "check", "passed", "anchor", "criterion", "observed", "bound", "detail"}, {}};
  for (const auto& v : verdicts)
    t.rows.push_back({v.scenario, v.check, v.passed ? "pass" : "fail", v.anchor,
                      v.criterion ? std::to_string(*v.criterion) : "", v.observed.dump(), v.bound.dump(), v.detail});
  return t;
}

namespace {
void write_field(std::ostream& out, const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}
}  // namespace

void write_csv(std::ostream& out, const Table& table) {
  auto row = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out << ',';
      write_field(out, r[i]);
    }
    out << '\n';
  };
  row(table.header);
  for (const auto& r : table.rows) row(r);
}

}  // namespace cqms::lab
