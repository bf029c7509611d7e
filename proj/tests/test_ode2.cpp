#include <doctest.h>

#include <cmath>
#include <sstream>

#include "support.hpp"
#include "whf/error.hpp"
#include "whf/ode2.hpp"
#include "whf/validate.hpp"

using whf::Complex;
using whf::ComplexMat;
using namespace whf::test;

namespace {

const ComplexMat kV{{1.0, Complex{0.3, 1}}, {Complex{-0.5, 0.2}, 2.0}};

ComplexMat sandwich(Complex a, Complex b) {
  const std::vector<Complex> d{a, b};
  return kV * ComplexMat::diagonal(d) * whf::mat_inv(kV);
}

}  // namespace

TEST_CASE("match_s follows the previous value") {
  const std::vector<Complex> x{{0.1, 0.02}, {-0.3, 0.05}};
  const ComplexMat y = sandwich(Complex{2, 0}, Complex{-1, 1});
  const ComplexMat same = sandwich(x[0], x[1]);
  const ComplexMat swapped = sandwich(x[1], x[0]);
  CHECK((whf::match_s(x, y, same) - same).max_abs() < 1e-13);
  CHECK((whf::match_s(x, y, swapped) - swapped).max_abs() < 1e-13);
  // a previous value halfway between both candidates is ambiguous
  CHECK_THROWS_AS((void)whf::match_s(x, y, 0.5 * (same + swapped)), whf::Error);
}

TEST_CASE("spectral matching pairs eigenvalues of Y with beta") {
  const std::vector<Complex> x{{0.1, 0.0}, {-0.3, 0.0}};
  const ComplexMat y = sandwich(Complex{2, 0}, Complex{-1, 1});
  double mismatch = 1.0;
  // beta[0] near 2 -> x[0] goes with the first eigenvector of the sandwich
  const std::vector<Complex> beta{{2.001, 0}, {-1, 0.999}};
  CHECK((whf::match_s_spectral(x, beta, y, &mismatch) - sandwich(x[0], x[1])).max_abs() < 1e-13);
  CHECK(mismatch == doctest::Approx(0.002).epsilon(1e-6));
  const std::vector<Complex> rev{{-1, 1}, {2, 0}};
  CHECK((whf::match_s_spectral(x, rev, y) - sandwich(x[1], x[0])).max_abs() < 1e-13);
}

TEST_CASE("initial data") {
  const auto p = khrapkov();
  const auto B = whf::build_B(p, {1.0, -1.0});
  const auto st = whf::init_state(p, B, 40.0);
  REQUIRE(st.r.size() == 2);
  REQUIRE(st.s.size() == 1);
  CHECK((st.r[0] - B.residues[0]).max_abs() == 0.0);
  CHECK((st.r[1] - B.residues[1]).max_abs() == 0.0);
  CHECK(st.b == Complex{0, 40});
  // s commutes with B at the starting point and exponentiates to H
  const Complex k = kKhrapkovK1 + Complex{0, 40};
  CHECK(whf::commutator(st.s[0], B.eval(k)).max_abs() < 1e-12);
  const auto ep = whf::eig(st.s[0]);
  const ComplexMat expo = ep.vectors *
                          ComplexMat::diagonal(std::vector<Complex>{
                              std::exp(-whf::kTwoPiI * ep.values[0]),
                              std::exp(-whf::kTwoPiI * ep.values[1])}) *
                          whf::mat_inv(ep.vectors);
  CHECK((expo - p.eval_H(0, k)).max_abs() < 1e-12);

  try {
    (void)whf::init_state(p, B, 0.3);
    FAIL("expected LTooSmall");
  } catch (const whf::Error& e) {
    CHECK(e.code() == whf::ErrorCode::LTooSmall);
  }
}

TEST_CASE("right-hand side matches the commutator sum") {
  const auto p = antipov();
  const auto B = whf::build_B(p, kAntipovPoles);
  whf::Ode2State st = whf::init_state(p, B, 40.0);
  st.b = Complex{0.0, 7.0};
  const auto f = whf::ode2_rhs(st, p, B);
  for (std::size_t l = 0; l < 5; ++l) {
    const ComplexMat expect =
        whf::commutator(st.s[0], st.r[l]) / (B.poles[l] - (p.cuts()[0] + st.b));
    CHECK((f[l] - expect).max_abs() < 1e-15);
  }
}

TEST_CASE("identity kernel leaves everything constant") {
  using whf::parse;
  const auto p = whf::FactorizationProblem::moiseev(
      2, {parse("1"), parse("k"), parse("k"), parse("-1")}, {parse("1"), parse("0")},
      {kKhrapkovK1});
  const auto B = whf::build_B(p, {1.0, -1.0});
  const auto tr = whf::integrate(p, B, 40.0, 50);
  CHECK(tr.nodes.size() == 101);
  for (const auto& n : tr.nodes) {
    CHECK(n.state.s[0].max_abs() < 1e-14);
    CHECK((n.state.r[0] - B.residues[0]).max_abs() < 1e-14);
  }
}

TEST_CASE("Khrapkov trajectory against the closed form") {
  const auto p = khrapkov();
  const auto B = whf::build_B(p, {1.0, -1.0});
  const whf::KhrapkovReference ref({p, 0, 200, 200.0});
  // Starting at iL with r = t neglects the tail above iL, so the deviation is
  // governed by L rather than by the step count.
  auto deviation = [&](double L) {
    const auto tr = whf::integrate(p, B, L, 1000);
    CHECK(tr.nodes.front().state.b == Complex{0, L});
    CHECK(std::abs(tr.nodes.back().state.b) < 1e-14);
    CHECK(tr.diagnostics.constraint_residual < 1e-8);
    CHECK(tr.diagnostics.isospectral_drift < 1e-8);
    double s_err = 0.0, r_err = 0.0;
    for (std::size_t i = 0; i + 2 < tr.nodes.size(); i += 97) {
      const auto& st = tr.nodes[i].state;
      s_err = std::max(s_err, (st.s[0] - ref.s_ref(st.b)).max_abs());
      const auto rr = ref.r_ref(st.b, B);
      for (std::size_t l = 0; l < 2; ++l) r_err = std::max(r_err, (st.r[l] - rr[l]).max_abs());
    }
    return std::pair{s_err, r_err};
  };
  const auto [s40, r40] = deviation(40.0);
  const auto [s80, r80] = deviation(80.0);
  CHECK(s40 < 1e-7);
  CHECK(r40 < 1e-6);
  CHECK(s80 < s40 / 10.0);
  CHECK(r80 < r40 / 10.0);
}

TEST_CASE("continuity matching agrees with spectral matching") {
  const auto p = antipov();
  const auto B = whf::build_B(p, kAntipovPoles);
  whf::Ode2Options cont;
  cont.matching = whf::MatchMode::continuity;
  const auto a = whf::integrate(p, B, 40.0, 400);
  const auto c = whf::integrate(p, B, 40.0, 400, cont);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.nodes.size(); ++i)
    diff = std::max(diff, (a.nodes[i].state.s[0] - c.nodes[i].state.s[0]).max_abs());
  CHECK(diff < 1e-8);
}

TEST_CASE("truncation check") {
  const auto p = khrapkov();
  const auto B = whf::build_B(p, {1.0, -1.0});
  CHECK(whf::verify_truncation(p, B, 40.0, 200) < 1e-8);
}

TEST_CASE("trajectory dump") {
  const auto p = khrapkov();
  const auto B = whf::build_B(p, {1.0, -1.0});
  const auto tr = whf::integrate(p, B, 40.0, 20);
  std::ostringstream out;
  whf::write_trajectory_csv(out, tr);
  const std::string text = out.str();
  const auto lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines == static_cast<long>(tr.nodes.size()) + 1);
}
