// Runs the full experiment suite twice with the same seed and prints one
// PASS/FAIL line per acceptance criterion.
//
//   acceptance [--config path] [--cache-dir dir] [--report-dir dir] [--allow-red 4,8]
//
// Exit status is 0 when every criterion passes or every failing criterion is
// listed in --allow-red. Failing lines are printed either way.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "cqms/lab/lab.hpp"

namespace fs = std::filesystem;
using cqms::lab::CommandResult;

namespace {

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
};

const std::vector<Criterion> kCriteria{
    {1, "Leibniz expansion is exact", 60},
    {2, "point masses: lower = upper = l(g)^k", 10},
    {3, "sandwich ordering and monotone compressions", 120},
    {4, "compressions against the Fourier oracle on Z^d", 120},
    {5, "ball growth: exact counts, exponents, rates", 180},
    {6, "hyperbolic witness with 2^(n+1) distinct sums", 30},
    {7, "cat-map entropy bracket", 60},
    {8, "zero-entropy scenarios", 120},
    {9, "toral rates under the eigenvalue ceiling", 180},
    {10, "free-group product sets and Mdim signature", 60},
    {11, "metric-dimension slope brackets", 120},
    {12, "inner-automorphism seminorm inequality", 60},
};

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance runner"};
  std::string config_path = CQMS_SUITE_CONFIG;
  std::string cache_dir = "acceptance-cache";
  std::string report_dir = "acceptance-reports";
  std::string allow_red;
  app.add_option("--config", config_path)->check(CLI::ExistingFile);
  app.add_option("--cache-dir", cache_dir);
  app.add_option("--report-dir", report_dir);
  app.add_option("--allow-red", allow_red, "Comma-separated criteria whose failure does not fail the run");
  CLI11_PARSE(app, argc, argv);
  const auto tolerated = parse_list(allow_red);

  const auto config = cqms::lab::load_config(config_path);
  cqms::lab::RunOptions opt;
  opt.cache_dir = fs::path(cache_dir);

  std::vector<std::string> dumps;
  std::vector<CommandResult> first;
  for (int run = 0; run < 2; ++run) {
    const auto t0 = std::chrono::steady_clock::now();
    auto results = cqms::lab::run_suite(config, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "suite run " << run + 1 << ": " << std::fixed << std::setprecision(1) << secs << " s\n";
    dumps.push_back(cqms::lab::suite_report(results).dump(2));
    fs::create_directories(report_dir);
    std::ofstream(fs::path(report_dir) / ("suite-run" + std::to_string(run + 1) + ".json")) << dumps.back() << '\n';
    if (run == 0) first = std::move(results);
  }

  std::map<int, std::vector<std::pair<std::string, const cqms::lab::Verdict*>>> by_criterion;
  std::map<int, double> seconds;
  for (const auto& r : first) {
    for (const auto& v : r.verdicts)
      if (v.criterion) by_criterion[*v.criterion].emplace_back(r.command, &v);
    for (const auto& t : r.timings)
      if (t.criterion) seconds[*t.criterion] += t.seconds;
  }

  int passed = 0;
  std::vector<int> failed;
  auto line = [&](int id, const std::string& title, bool ok, const std::string& info) {
    std::cout << "criterion " << std::setw(2) << id << ": " << (ok ? "PASS" : "FAIL") << "  " << title << "  (" << info
              << ")\n";
    if (ok)
      ++passed;
    else
      failed.push_back(id);
  };

  for (const auto& c : kCriteria) {
    const auto& vs = by_criterion[c.id];
    std::size_t good = 0;
    for (const auto& [cmd, v] : vs) good += v->passed;
    const double t = seconds[c.id];
    const bool in_time = t < c.budget_seconds;
    std::ostringstream info;
    info << good << "/" << vs.size() << " checks, " << std::fixed << std::setprecision(1) << t << " s of "
         << c.budget_seconds << " s";
    line(c.id, c.title, !vs.empty() && good == vs.size() && in_time, info.str());
    for (const auto& [cmd, v] : vs)
      if (!v->passed)
        std::cout << "      failed: " << cmd << "/" << v->scenario << ": " << v->check
                  << " observed=" << v->observed.dump() << " bound=" << v->bound.dump() << '\n';
    if (!in_time) std::cout << "      over the runtime budget\n";
  }
  const bool identical = dumps[0] == dumps[1];
  line(13, "two seeded runs give byte-identical JSON", identical,
       std::to_string(dumps[0].size()) + " bytes per report");

  std::cout << "summary: " << passed << " of 13 criteria pass";
  bool blocking = false;
  for (int id : failed) blocking = blocking || !tolerated.count(id);
  if (!failed.empty()) {
    std::cout << "; failing:";
    for (int id : failed) std::cout << ' ' << id << (tolerated.count(id) ? " (allowed)" : "");
  }
  std::cout << '\n';
  return blocking ? 1 : 0;
}
