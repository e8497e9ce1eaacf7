#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "cqms/errors.hpp"
#include "cqms/lab/lab.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
namespace lab = cqms::lab;

namespace {

json small_config() {
  return json::parse(R"({
    "seed": 7,
    "caps": {"iterations": 2000},
    "commands": {
      "growth": {"scenarios": [
        {"name": "Z1", "anchor": "a", "criterion": 5, "group": {"kind": "free_abelian", "rank": 1}, "n_max": 12,
         "expect": {"closed_form_counts": true, "exponent": {"value": 1, "tolerance": 0.1}}}]},
      "leibniz": {"scenarios": [
        {"name": "Z1", "anchor": "b", "group": {"kind": "free_abelian", "rank": 1}, "tuples": 3,
         "n_values": [2, 3], "k_values": [1, 2], "support_radius": 2}]},
      "seminorm": {"scenarios": [
        {"name": "order", "anchor": "c", "kind": "ordering", "group": {"kind": "free_abelian", "rank": 1},
         "samples": 4, "support_radius": 2, "k_values": [0, 1], "schedule": [4, 8]}]},
      "lipschitz": {"scenarios": [
        {"name": "wrong", "anchor": "d", "group": {"kind": "free_abelian", "rank": 2},
         "automorphism": {"kind": "matrix", "matrix": [[2, 1], [1, 1]]}, "expect": {"constant": 2}}]}
    }
  })");
}

}  // namespace

TEST_CASE("named streams") {
  CHECK(lab::stream_seed(1, "a") == lab::stream_seed(1, "a"));
  CHECK(lab::stream_seed(1, "a") != lab::stream_seed(1, "b"));
  CHECK(lab::stream_seed(1, "a") != lab::stream_seed(2, "a"));
  auto r1 = lab::make_stream(9, "seminorm/x/elements");
  auto r2 = lab::make_stream(9, "seminorm/x/elements");
  CHECK(r1() == r2());
}

TEST_CASE("config validation") {
  auto c = small_config();
  CHECK_NOTHROW(lab::validate_config(c));
  auto no_seed = c;
  no_seed.erase("seed");
  CHECK_THROWS_AS(lab::validate_config(no_seed), cqms::ParameterError);
  auto bad_cap = c;
  bad_cap["caps"]["cardinality"] = 0;
  CHECK_THROWS_AS(lab::validate_config(bad_cap), cqms::ParameterError);
  auto unknown_cap = c;
  unknown_cap["caps"]["wall"] = 3;
  CHECK_THROWS_AS(lab::validate_config(unknown_cap), cqms::ParameterError);
  auto no_anchor = c;
  no_anchor["commands"]["growth"]["scenarios"][0].erase("anchor");
  CHECK_THROWS_AS(lab::validate_config(no_anchor), cqms::ParameterError);
  auto bad_command = c;
  bad_command["commands"]["plot"] = json{{"scenarios", json::array()}};
  CHECK_THROWS_AS(lab::validate_config(bad_command), cqms::ParameterError);
  CHECK_THROWS_AS(lab::run_command("entropy", c), cqms::ParameterError);
}

TEST_CASE("commands produce tagged results and verdicts") {
  const auto c = small_config();
  const auto g = lab::run_command("growth", c);
  CHECK(g.passed());
  CHECK(g.verdicts.size() == 2);
  CHECK(g.verdicts[0].criterion == 5);
  CHECK(g.verdicts[0].anchor == "a");
  const auto& sc = g.report["scenarios"][0];
  CHECK(sc["ball_sizes"]["value"][12] == 25);
  CHECK(sc["ball_sizes"]["certificate"].get<std::string>().rfind("exact", 0) == 0);
  CHECK(sc["fit"]["exponent"].contains("certificate"));
  CHECK(g.report["seed"] == 7);
  CHECK(g.report["cache_fingerprints"].size() == 1);
  CHECK_FALSE(g.report.contains("wall_clock"));
  REQUIRE(g.timings.size() == 1);

  const auto l = lab::run_command("leibniz", c);
  CHECK(l.passed());
  const auto s = lab::run_command("seminorm", c);
  CHECK(s.passed());
  CHECK(s.verdicts.size() == 3);

  // a wrong expectation is reported, not thrown
  const auto w = lab::run_command("lipschitz", c);
  CHECK_FALSE(w.passed());
  bool saw = false;
  for (const auto& v : w.verdicts)
    if (v.check == "Lipschitz constant") {
      saw = true;
      CHECK(v.observed == 3);
    }
  CHECK(saw);
}

TEST_CASE("scenario errors become failed verdicts") {
  auto c = small_config();
  c["commands"]["growth"]["scenarios"][0]["group"] = json{{"kind", "torus"}};
  const auto g = lab::run_command("growth", c);
  REQUIRE(g.verdicts.size() == 1);
  CHECK(g.verdicts[0].check == "completed");
  CHECK_FALSE(g.verdicts[0].passed);
  CHECK(g.report["scenarios"][0].contains("error"));
}

TEST_CASE("reports are deterministic and follow the seed") {
  const auto c = small_config();
  const auto a = lab::run_command("seminorm", c).report.dump();
  const auto b = lab::run_command("seminorm", c).report.dump();
  CHECK(a == b);
  lab::RunOptions other;
  other.seed = 8;
  const auto d = lab::run_command("seminorm", c, other).report;
  CHECK(d["seed"] == 8);
  CHECK(d.dump() != a);

  lab::RunOptions par;
  par.parallel = true;
  const auto s1 = lab::suite_report(lab::run_suite(c)).dump();
  const auto s2 = lab::suite_report(lab::run_suite(c, par)).dump();
  CHECK(s1 == s2);
}

TEST_CASE("ball caches are keyed by descriptor hash") {
  const fs::path dir = fs::temp_directory_path() / "cqms-test-lab-cache";
  fs::remove_all(dir);
  lab::RunOptions opt;
  opt.cache_dir = dir;
  const auto c = small_config();
  const auto first = lab::run_command("growth", c, opt);
  const std::string fp = first.report["cache_fingerprints"][0];
  CHECK(fs::exists(dir / (fp + ".growth.json")));
  const auto second = lab::run_command("growth", c, opt);
  CHECK(first.report.dump() == second.report.dump());
  lab::run_command("seminorm", c, opt);
  bool balls = false;
  for (const auto& e : fs::directory_iterator(dir)) balls = balls || e.path().string().ends_with(".balls.jsonl");
  CHECK(balls);
  fs::remove_all(dir);
}

TEST_CASE("csv output") {
  lab::Table t{"t", {"a", "b"}, {{"1", "x,y"}, {"2", "say \"hi\""}}};
  std::ostringstream out;
  lab::write_csv(out, t);
  CHECK(out.str() == "a,b\n1,\"x,y\"\n2,\"say \"\"hi\"\"\"\n");
  const auto g = lab::run_command("growth", small_config());
  const auto vt = lab::verdict_table(g.verdicts);
  CHECK(vt.rows.size() == 2);
  CHECK(vt.rows[0][2] == "pass");
}
