#include <doctest.h>

#include <string>

#include "whf/config.hpp"
#include "whf/error.hpp"

using whf::Complex;

namespace {

const std::string kLambda = R"(
name = demo
lambda.11 = 1
lambda.12 = k
lambda.21 = k
lambda.22 = -1
g.0 = 1
cuts = [0.5+1i]
)";
const std::string kBase = kLambda + "g.1 = 0\n";

std::string error_of(const std::string& text) {
  try {
    (void)whf::parse_config(text);
  } catch (const whf::Error& e) {
    CHECK(e.code() == whf::ErrorCode::ConfigError);
    return e.what();
  }
  FAIL("no error");
  return {};
}

}  // namespace

TEST_CASE("lists and ranges") {
  const auto l = whf::parse_complex_list("[1, -2.5, 3i, 1-1i]");
  REQUIRE(l.size() == 4);
  CHECK(l[2] == Complex{0, 3});
  CHECK(l[3] == Complex{1, -1});
  const auto r = whf::parse_complex_list("range(-1, 1, 5)");
  REQUIRE(r.size() == 5);
  CHECK(r.front() == Complex{-1, 0});
  CHECK(r.back() == Complex{1, 0});
  CHECK(std::abs(r[1] - Complex{-0.5, 0}) < 1e-15);
  CHECK(whf::parse_complex_list("[]").empty());
  CHECK_THROWS_AS((void)whf::parse_complex_list("range(0, 1)"), whf::Error);
  CHECK_THROWS_AS((void)whf::parse_complex_list("1, 2"), whf::Error);
}

TEST_CASE("defaults") {
  const auto cfg = whf::parse_config(kBase);
  CHECK(cfg.name == "demo");
  REQUIRE(cfg.problem.has_value());
  CHECK(cfg.problem->dim() == 2);
  CHECK(cfg.L == 40.0);
  CHECK(cfg.steps == 2000);
  CHECK(cfg.poles.empty());
  CHECK(cfg.far_points.size() == 3);
  CHECK(cfg.residual_tol == 1e-3);
  CHECK(cfg.shore_heights.size() == 1);
}

TEST_CASE("parameters, definitions and overrides") {
  const auto cfg = whf::parse_config(kLambda + R"(
param.a = 2          # comment
def.f = 1/(k^2 + {a}^2)
g.1 = "0.1*{f}"
poles = [1, -1]
L = 25
steps = 300
points = range(-1, 1, 3)
shore.1 = [0.5, 2]
tol.oracle = 1e-6
contour.delta = 0.02
oracle = khrapkov
)");
  CHECK(cfg.L == 25.0);
  CHECK(cfg.steps == 300);
  CHECK(cfg.points.size() == 3);
  CHECK(cfg.shore_heights[0] == std::vector<double>{0.5, 2.0});
  CHECK(cfg.oracle_tol == 1e-6);
  CHECK(cfg.delta == 0.02);
  CHECK(cfg.oracle == "khrapkov");
  const Complex k{0.3, 0.1};
  CHECK(std::abs(cfg.problem->g()[1].eval(k) - 0.1 / (k * k + 4.0)) < 1e-15);
}

TEST_CASE("errors carry line numbers") {
  CHECK(error_of(kBase + "bogus = 3\n").find("line 10") != std::string::npos);
  CHECK(error_of(kBase + "shore.2 = [1]\n").find("line 10") != std::string::npos);
  CHECK(error_of(kBase + "oracle = magic\n").find("line 10") != std::string::npos);
  CHECK(error_of(kBase + "shore.1 = [-1]\n").find("positive") != std::string::npos);
  CHECK_FALSE(error_of(kBase + "g.1 = {undefined}\n").empty());
  CHECK_FALSE(error_of("form = other\n").empty());
  CHECK_FALSE(error_of("lambda.11 = 1\n").empty());
}

TEST_CASE("fixtures load") {
  for (const char* name : {"khrapkov", "antipov", "identity", "noncommutative"}) {
    CAPTURE(name);
    const auto cfg = whf::load_config(std::string(WHF_FIXTURE_DIR) + "/" + name + ".toml");
    CHECK(cfg.name == name);
    CHECK(cfg.problem.has_value());
  }
  CHECK_THROWS_AS((void)whf::load_config("/nonexistent/problem.toml"), whf::Error);
}
