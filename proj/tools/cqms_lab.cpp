#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cqms/errors.hpp"
#include "cqms/lab/lab.hpp"

namespace fs = std::filesystem;
using cqms::lab::CommandResult;

namespace {

void write_outputs(const std::vector<CommandResult>& results, const std::string& label, const std::string& emit,
                   const std::optional<fs::path>& out_dir) {
  const auto report = results.size() == 1 ? results.front().report : cqms::lab::suite_report(results);
  if (emit == "json") {
    if (out_dir) {
      fs::create_directories(*out_dir);
      std::ofstream(*out_dir / (label + ".json")) << report.dump(2) << '\n';
    } else {
      std::cout << report.dump(2) << '\n';
    }
    return;
  }
  std::vector<cqms::lab::Verdict> all;
  for (const auto& r : results) all.insert(all.end(), r.verdicts.begin(), r.verdicts.end());
  if (!out_dir) {
    cqms::lab::write_csv(std::cout, cqms::lab::verdict_table(all));
    return;
  }
  fs::create_directories(*out_dir);
  std::ofstream verdicts(*out_dir / (label + "_verdicts.csv"));
  cqms::lab::write_csv(verdicts, cqms::lab::verdict_table(all));
  for (const auto& r : results)
    for (const auto& t : r.tables) {
      std::ofstream f(*out_dir / (t.name + ".csv"));
      cqms::lab::write_csv(f, t);
    }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-metric experiment driver"};
  std::string command, config_path, emit;
  std::string out_dir, cache_dir;
  std::optional<std::uint64_t> seed;
  bool parallel = false;

  std::vector<std::string> choices = cqms::lab::command_names();
  choices.push_back("all");
  app.add_option("command", command, "Command to run")->required()->check(CLI::IsMember(choices));
  app.add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--emit", emit, "Report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", out_dir, "Output directory (stdout when absent)");
  app.add_option("--seed", seed, "RNG seed, overrides the config");
  app.add_option("--cache-dir", cache_dir, "Ball cache directory, overrides the config");
  app.add_flag("--parallel", parallel, "Run the commands of 'all' concurrently");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = cqms::lab::load_config(config_path);
    cqms::lab::RunOptions opt;
    opt.seed = seed;
    opt.parallel = parallel;
    if (!cache_dir.empty()) opt.cache_dir = cache_dir;
    const auto output = config.value("output", nlohmann::json::object());
    if (emit.empty()) emit = output.value("emit", std::string("json"));
    std::optional<fs::path> out;
    if (!out_dir.empty())
      out = out_dir;
    else if (output.contains("dir"))
      out = fs::path(output["dir"].get<std::string>());

    std::vector<CommandResult> results;
    if (command == "all")
      results = cqms::lab::run_suite(config, opt);
    else
      results.push_back(cqms::lab::run_command(command, config, opt));

    bool passed = true;
    for (const auto& r : results) {
      for (const auto& t : r.timings) std::cerr << "[time] " << r.command << '/' << t.scenario << ' ' << t.seconds << " s\n";
      for (const auto& v : r.verdicts)
        std::cerr << (v.passed ? "PASS " : "FAIL ") << r.command << '/' << v.scenario << ": " << v.check << " ["
                  << v.anchor << "] observed=" << v.observed.dump() << " bound=" << v.bound.dump() << '\n';
      passed = passed && r.passed();
    }
    write_outputs(results, command, emit, out);
    return passed ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "cqms-lab: " << e.what() << '\n';
    return 2;
  }
}
