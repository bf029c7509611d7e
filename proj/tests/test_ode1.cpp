#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "support.hpp"
#include "whf/error.hpp"
#include "whf/ode1.hpp"
#include "whf/validate.hpp"

using whf::Complex;
using whf::ComplexMat;
using namespace whf::test;

TEST_CASE("ordered exponential of a constant diagonal coefficient") {
  const ComplexMat c{{Complex{0.3, 1}, 0.0}, {0.0, Complex{-2, 0.5}}};
  const ComplexMat u = whf::ordered_exponential([&](double) { return c; }, 400,
                                                ComplexMat::identity(2));
  CHECK(std::abs(u(0, 0) - std::exp(Complex{0.3, 1})) < 1e-10);
  CHECK(std::abs(u(1, 1) - std::exp(Complex{-2, 0.5})) < 1e-10);
  CHECK(std::abs(u(0, 1)) == 0.0);
}

TEST_CASE("ordered exponential composes over intervals") {
  // C(s) = A cos(s) + D s: non-commuting in time
  const ComplexMat a{{0.0, 1.0}, {-1.0, 0.0}};
  const ComplexMat d{{0.5, 0.0}, {0.0, -0.2}};
  auto coef = [&](double s) { return a * std::cos(s) + d * s; };
  const std::size_t n = 200;
  const ComplexMat whole = whf::ordered_exponential(coef, n, ComplexMat::identity(2));

  // the same integral as nodes sampled every half step
  std::vector<ComplexMat> nodes;
  for (std::size_t i = 0; i <= 2 * n; ++i) nodes.push_back(coef(static_cast<double>(i) / (2.0 * n)));
  const ComplexMat from_nodes =
      whf::ordered_exponential_nodes(nodes, 1.0 / (2.0 * n), ComplexMat::identity(2));
  CHECK((whole - from_nodes).max_abs() < 1e-13);

  // U' = U C: splitting [0, 1] at 1/2 gives U(1) = U(1/2) * rest
  const ComplexMat first = whf::ordered_exponential_nodes(std::span(nodes).first(n + 1),
                                                          1.0 / (2.0 * n), ComplexMat::identity(2));
  const ComplexMat both = whf::ordered_exponential_nodes(std::span(nodes).subspan(n), 1.0 / (2.0 * n),
                                                         first);
  CHECK((both - whole).max_abs() < 1e-13);

  // fourth order: halving the step cuts the error by ~16
  auto err = [&](std::size_t m) {
    return (whf::ordered_exponential(coef, m, ComplexMat::identity(2)) - whole).max_abs();
  };
  CHECK(err(10) / err(20) > 12.0);
}

TEST_CASE("identity kernel gives U = I") {
  using whf::parse;
  const auto p = whf::FactorizationProblem::moiseev(
      2, {parse("1"), parse("k"), parse("k"), parse("-1")}, {parse("1"), parse("0")},
      {kKhrapkovK1});
  const auto B = whf::build_B(p, {1.0, -1.0});
  const auto tr = whf::integrate(p, B, 40.0, 100);
  const whf::Ode2System sys(p, B);
  std::vector<whf::EvalPoint> pts{whf::EvalPoint::straight(0.0), whf::EvalPoint::straight(-2.5),
                                  whf::EvalPoint::shore(p, 0, 1.0, whf::Contour::gamma_plus)};
  const auto res = whf::solve_U(sys, tr, pts);
  for (const auto& u : res.U) CHECK((u - ComplexMat::identity(2)).max_abs() < 1e-12);
}

TEST_CASE("Khrapkov factor at real points") {
  const auto p = khrapkov();
  const auto B = whf::build_B(p, {1.0, -1.0});
  const auto tr = whf::integrate(p, B, 40.0, 1000);
  const whf::Ode2System sys(p, B);
  const whf::KhrapkovReference ref({p, 0, 200, 200.0});
  std::vector<whf::EvalPoint> pts;
  for (double z : {-2.0, -0.4, 0.0, 1.3, 2.9}) pts.push_back(whf::EvalPoint::straight(z));
  whf::Ode1Options one_thread;
  one_thread.threads = 1;
  const auto res = whf::solve_U(sys, tr, pts);
  const auto serial = whf::solve_U(sys, tr, pts, one_thread);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK((res.U[i] - ref.U(0.0, pts[i].k)).max_abs() < 1e-5);
    CHECK(res.U[i] == serial.U[i]);
    CHECK(res.det_abs[i] == doctest::Approx(std::abs(whf::det(res.U[i]))));
  }
}

TEST_CASE("shore points satisfy the jump condition") {
  const auto p = antipov();
  const auto B = whf::build_B(p, kAntipovPoles);
  const auto tr = whf::integrate(p, B, 40.0, 1000);
  const whf::Ode2System sys(p, B);
  const std::vector<double> h{0.5, 2.0};
  std::vector<whf::EvalPoint> pts;
  for (double t : h) pts.push_back(whf::EvalPoint::shore(p, 0, t, whf::Contour::gamma_plus));
  for (double t : h) pts.push_back(whf::EvalPoint::shore(p, 0, t, whf::Contour::gamma_minus));
  const auto res = whf::solve_U(sys, tr, pts);
  const std::vector<ComplexMat> up(res.U.begin(), res.U.begin() + 2);
  const std::vector<ComplexMat> um(res.U.begin() + 2, res.U.end());
  for (double r : whf::jump_residual(p, 0, h, up, um)) CHECK(r < 1e-6);
  for (double c : res.detour_closure) CHECK(c < 1e-10);
}

TEST_CASE("points on the integration path are rejected") {
  const auto p = khrapkov();
  const auto B = whf::build_B(p, {1.0, -1.0});
  const auto tr = whf::integrate(p, B, 40.0, 100);
  const whf::Ode2System sys(p, B);
  const std::vector<whf::EvalPoint> on_cut{whf::EvalPoint::straight(tr.nodes[40].state.b +
                                                                    kKhrapkovK1)};
  try {
    (void)whf::solve_U(sys, tr, on_cut);
    FAIL("expected PoleCollision");
  } catch (const whf::Error& e) {
    CHECK(e.code() == whf::ErrorCode::PoleCollision);
  }
  // shore heights outside (margin, L - margin)
  const std::vector<whf::EvalPoint> low{whf::EvalPoint::shore(p, 0, 0.05, whf::Contour::gamma_plus)};
  CHECK_THROWS_AS((void)whf::solve_U(sys, tr, low), whf::Error);
}

TEST_CASE("result writers") {
  const auto p = khrapkov();
  const auto B = whf::build_B(p, {1.0, -1.0});
  const auto tr = whf::integrate(p, B, 40.0, 50);
  const whf::Ode2System sys(p, B);
  const std::vector<whf::EvalPoint> pts{whf::EvalPoint::straight(0.5),
                                        whf::EvalPoint::straight(Complex{0, -1})};
  const auto res = whf::solve_U(sys, tr, pts);

  std::ostringstream csv;
  whf::write_result_csv(csv, res);
  std::istringstream in(csv.str());
  std::string header, row;
  std::getline(in, header);
  CHECK(header ==
        "re_k,im_k,re_U11,im_U11,re_U12,im_U12,re_U21,im_U21,re_U22,im_U22,abs_det_U");
  std::getline(in, row);
  CHECK(std::count(row.begin(), row.end(), ',') == 10);

  std::ostringstream js;
  whf::write_result_json(js, res);
  const auto doc = nlohmann::json::parse(js.str());
  CHECK(doc.contains("points"));
}
