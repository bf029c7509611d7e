#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "support.hpp"
#include "whf/error.hpp"
#include "whf/validate.hpp"

using whf::Complex;
using whf::ComplexMat;
using namespace whf::test;

TEST_CASE("closed-form reference converges") {
  const whf::KhrapkovReference ref({khrapkov(), 0, 200, 200.0});
  for (Complex k : {Complex{-3, 0}, Complex{0, 0}, Complex{2.2, 0}})
    CHECK(ref.convergence(0.0, k) < 1e-8);
  CHECK_NOTHROW((void)ref.U_checked(0.0, 1.0, 1e-8));
  // a coarse reference is detected
  const whf::KhrapkovReference coarse({khrapkov(), 0, 4, 10.0});
  CHECK_THROWS_AS((void)coarse.U_checked(0.0, 1.0, 1e-8), whf::Error);
}

TEST_CASE("reference U tends to I at large k") {
  const whf::KhrapkovReference ref({khrapkov(), 0, 200, 200.0});
  CHECK((ref.U(0.0, Complex{0, 1e4}) - ComplexMat::identity(2)).max_abs() < 1e-3);
  CHECK((ref.U(0.0, Complex{-1e4, 0}) - ComplexMat::identity(2)).max_abs() < 1e-3);
}

TEST_CASE("reference shore values satisfy the jump condition") {
  const auto p = khrapkov();
  const whf::KhrapkovReference ref({p, 0, 200, 200.0});
  const std::vector<double> h{0.5, 1.0, 2.0};
  std::vector<ComplexMat> up, um;
  for (double t : h) {
    up.push_back(ref.U_shore(t, whf::Contour::gamma_plus));
    um.push_back(ref.U_shore(t, whf::Contour::gamma_minus));
  }
  for (double r : whf::jump_residual(p, 0, h, up, um)) CHECK(r < 1e-8);
}

TEST_CASE("jump residual of exact data") {
  // U+ = U- H exactly gives zero residual
  const auto p = khrapkov();
  const std::vector<double> h{1.0};
  const ComplexMat U_minus{{1.0, 0.2}, {0.1, 1.3}};
  const ComplexMat U_plus = U_minus * p.eval_H(0, kKhrapkovK1 + Complex{0, 1.0});
  CHECK(whf::jump_residual(p, 0, h, std::vector{U_plus}, std::vector{U_minus})[0] < 1e-14);
  CHECK(whf::jump_residual(p, 0, h, std::vector{U_minus}, std::vector{U_minus})[0] > 1e-3);
}

TEST_CASE("invariance under the commutant") {
  const auto p = khrapkov();
  const auto B1 = whf::build_B(p, {1.0, -1.0});
  const auto B2 = whf::build_B(p, {Complex{0, 2}, Complex{0, -2}});
  CHECK(whf::b_invariance_check(p, B1, B2, 40.0, 400) < 1e-6);
}

TEST_CASE("checks and report") {
  const auto ok = whf::make_check("a", 1e-5, 1e-4);
  const auto bad = whf::make_check("b", 1e-3, 1e-4, "note");
  CHECK(ok.passed);
  CHECK_FALSE(bad.passed);
  CHECK(whf::make_check("edge", 1e-4, 1e-4).passed);
  std::ostringstream out;
  const std::vector<whf::CheckResult> all{ok, bad};
  whf::write_report_json(out, all);
  const auto doc = nlohmann::json::parse(out.str());
  CHECK(doc["passed"] == false);
  REQUIRE(doc["checks"].size() == 2);
  CHECK(doc["checks"][1]["name"] == "b");
  CHECK(doc["checks"][1]["note"] == "note");
}
