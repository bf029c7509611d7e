#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "whf/runner.hpp"

namespace {

whf::RunConfig fixture(const char* name) {
  whf::RunConfig run;
  run.config = std::string(WHF_FIXTURE_DIR) + "/" + name + ".toml";
  run.steps = 200;
  run.threads = 1;
  return run;
}

}  // namespace

TEST_CASE("factorize writes one row per point") {
  auto run = fixture("identity");
  std::ostringstream out, log;
  CHECK(whf::run_factorize(run, out, log) == whf::kExitOk);
  const std::string text = out.str();
  // header + 7 straight points + 2x2 shore points
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 7 + 4);
}

TEST_CASE("json output") {
  auto run = fixture("identity");
  run.format = "json";
  std::ostringstream out, log;
  CHECK(whf::run_factorize(run, out, log) == whf::kExitOk);
  CHECK(nlohmann::json::parse(out.str()).contains("points"));
}

TEST_CASE("validation report") {
  auto run = fixture("khrapkov");
  run.steps.reset();  // the fixture grid; 200 steps is too coarse for the oracle tolerance
  run.b_invariance = true;
  std::ostringstream out, log;
  CHECK(whf::run_validate(run, out, log) == whf::kExitOk);
  const auto doc = nlohmann::json::parse(out.str());
  CHECK(doc["passed"] == true);
  bool has_oracle = false;
  for (const auto& c : doc["checks"]) has_oracle |= c["name"] == "khrapkov_oracle";
  CHECK(has_oracle);
}

TEST_CASE("exit codes") {
  std::ostringstream out, log;
  CHECK(whf::run_factorize(fixture("noncommutative"), out, log) == whf::kExitFailed);
  CHECK(whf::run_validate(fixture("noncommutative"), out, log) == whf::kExitFailed);
  CHECK(whf::run_factorize(fixture("missing"), out, log) == whf::kExitBadInput);
  // L below the branch points is unusable input ...
  auto below = fixture("khrapkov");
  below.L = 0.3;
  CHECK(whf::run_factorize(below, out, log) == whf::kExitBadInput);
  // ... while a legal L that is too low for the initial data is a solver failure
  auto low = fixture("khrapkov");
  low.L = 3.0;
  CHECK(whf::run_factorize(low, out, log) == whf::kExitFailed);
}
