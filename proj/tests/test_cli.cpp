#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "metadistill/io.hpp"

using namespace metadistill;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "metadistill-cli-test";
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + METADISTILL_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string scenario_path(const char* name) {
  return std::string(METADISTILL_SCENARIO_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("run succeeds and writes csv, json, and svg") {
  const fs::path out = work_dir() / "run-out";
  fs::remove_all(out);
  CHECK(run_cli("run " + scenario_path("appendix_a_anchored.json") + " --plot --out " +
                out.string()) == 0);
  CHECK(fs::exists(out / "appendix-a-anchored.csv"));
  CHECK(fs::exists(out / "appendix-a-anchored.json"));
  CHECK(fs::exists(out / "appendix-a-anchored.svg"));

  const json trace = parse_json_text(
      read_text_file((out / "appendix-a-anchored.json").string()), "trace");
  CHECK(trace["generations"].size() == 11);
  CHECK(trace["diagnostics"]["classification"] == "geometric_decay");
}

TEST_CASE("validation problems exit with code 2") {
  const fs::path dir = work_dir();
  const std::string bad = (dir / "bad.json").string();
  write_text_file(bad, R"({
  "vocab_size": 3,
  "contexts": [{"weight": 1.0, "teacher": [0.6, 0.3, 0.0], "student0": [0.2, 0.5, 0.3]}],
  "operator": {"kind": "convex_mixture", "alpha": 0.3},
  "max_generations": 5, "stop": {"improvement_tol": 0.0}
})");
  CHECK(run_cli("run " + bad) == 2);

  const std::string unanchored = (dir / "unanchored.json").string();
  write_text_file(unanchored, R"({
  "vocab_size": 3,
  "contexts": [{"weight": 1.0, "teacher": [0.6, 0.3, 0.1], "student0": [0.2, 0.5, 0.3]}],
  "operator": {"kind": "generalized_mixture", "alpha": 0.0},
  "max_generations": 5, "stop": {"improvement_tol": 0.0}
})");
  CHECK(run_cli("run " + unanchored) == 2);

  CHECK(run_cli("sweep --alpha nope " + scenario_path("appendix_a_anchored.json")) == 2);
  CHECK(run_cli("no-such-subcommand") == 2);
}

TEST_CASE("io and calibration failures exit with code 3") {
  CHECK(run_cli("run /no/such/scenario.json") == 3);

  // Drift target beyond KL(T0 || distractor): calibration cannot reach it.
  json drift = parse_json_text(read_text_file(scenario_path("appendix_a_drift.json")), "drift");
  drift["noise"]["epsilon"] = 10.0;
  const std::string unreachable = (work_dir() / "unreachable.json").string();
  write_text_file(unreachable, drift.dump(2) + "\n");
  CHECK(run_cli("run " + unreachable) == 3);
}

TEST_CASE("bundled reproduction passes and sweep prints its table") {
  CHECK(run_cli("repro-appendix-a") == 0);
  CHECK(run_cli("sweep --alpha 0.2:0.4:0.1 " + scenario_path("appendix_a_anchored.json")) == 0);
}

TEST_CASE("check-axioms reports to a file and exits 0 even on failing axioms") {
  const fs::path dir = work_dir();
  const std::string op = (dir / "unanchored_op.json").string();
  write_text_file(op,
                  "{\"kind\": \"generalized_mixture\", \"alpha\": 0.0, \"unanchored\": true}\n");
  const std::string report_path = (dir / "report.json").string();
  CHECK(run_cli("check-axioms " + op + " --trials 50 --seed 1 --out " + report_path) == 0);
  const json report = parse_json_text(read_text_file(report_path), "report");
  CHECK(report["axioms"]["axiom3_anchoring"]["status"] == "fail");
  CHECK(report["axioms"]["axiom3_anchoring"]["counterexamples"].size() > 0);
}
