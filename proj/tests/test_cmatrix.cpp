#include <doctest.h>

#include <cmath>
#include <random>

#include "whf/cmatrix.hpp"
#include "whf/error.hpp"
#include "whf/polynomial.hpp"

using whf::Complex;
using whf::ComplexMat;

namespace {

ComplexMat random_matrix(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  ComplexMat m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = {d(rng), d(rng)};
  return m;
}

}  // namespace

TEST_CASE("inverse of random matrices") {
  std::mt19937_64 rng(7);
  for (std::size_t n : {1u, 2u, 3u, 5u}) {
    const ComplexMat a = random_matrix(n, rng);
    CHECK((a * whf::mat_inv(a) - ComplexMat::identity(n)).max_abs() < 1e-12);
    CHECK((whf::mat_inv(a) * a - ComplexMat::identity(n)).max_abs() < 1e-12);
  }
}

TEST_CASE("2x2 inverse and determinant by hand") {
  const ComplexMat a{{Complex{1, 2}, 3.0}, {Complex{0, -1}, 4.0}};
  const Complex d = Complex{1, 2} * 4.0 - 3.0 * Complex{0, -1};
  CHECK(std::abs(whf::det(a) - d) < 1e-14);
  const ComplexMat expect = ComplexMat{{4.0, -3.0}, {Complex{0, 1}, Complex{1, 2}}} / d;
  CHECK((whf::mat_inv(a) - expect).max_abs() < 1e-14);
}

TEST_CASE("singular matrix is rejected") {
  const ComplexMat a{{1.0, 2.0}, {2.0, 4.0}};
  CHECK_THROWS_AS((void)whf::mat_inv(a), whf::Error);
  try {
    (void)whf::mat_inv(a);
  } catch (const whf::Error& e) {
    CHECK(e.code() == whf::ErrorCode::SingularMatrix);
  }
}

TEST_CASE("eigen-decomposition reconstructs the matrix") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {2u, 3u, 4u}) {
    const ComplexMat a = random_matrix(n, rng);
    const auto ep = whf::eig(a);
    REQUIRE(ep.values.size() == n);
    const ComplexMat rebuilt = ep.vectors * ComplexMat::diagonal(ep.values) * whf::mat_inv(ep.vectors);
    CHECK((rebuilt - a).max_abs() < 1e-10);
    // each column is an eigenvector
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t r = 0; r < n; ++r) {
        Complex av{};
        for (std::size_t m = 0; m < n; ++m) av += a(r, m) * ep.vectors(m, c);
        CHECK(std::abs(av - ep.values[c] * ep.vectors(r, c)) < 1e-10);
      }
    }
  }
}

TEST_CASE("eigenvalues of a triangular matrix") {
  const ComplexMat a{{2.0, 5.0}, {0.0, Complex{0, 3}}};
  auto v = whf::eigenvalues(a);
  REQUIRE(v.size() == 2);
  const bool ordered = std::abs(v[0] - 2.0) < 1e-14;
  CHECK(std::abs(v[ordered ? 0 : 1] - 2.0) < 1e-14);
  CHECK(std::abs(v[ordered ? 1 : 0] - Complex{0, 3}) < 1e-14);
}

TEST_CASE("eigenvector with vanishing first component") {
  // [[1, 0], [0, 2]]: the eigenvector of 2 is (0, 1).
  const ComplexMat a{{1.0, 0.0}, {0.0, 2.0}};
  const auto ep = whf::eig(a);
  CHECK(ep.vectors.all_finite());
  CHECK((ep.vectors * ComplexMat::diagonal(ep.values) * whf::mat_inv(ep.vectors) - a).max_abs() <
        1e-14);
}

TEST_CASE("degenerate eigenvalues are reported") {
  const ComplexMat a{{1.0, 1.0}, {0.0, 1.0}};
  CHECK_THROWS_AS((void)whf::eig(a), whf::Error);
}

TEST_CASE("log_near picks the branch closest to the reference") {
  const Complex z{-1.0, 0.5};
  for (double ref_im : {-20.0, -3.0, 0.0, 2.0, 9.5, 31.0}) {
    const Complex ref{0.3, ref_im};
    const Complex l = whf::log_near(z, ref);
    CHECK(std::abs(std::exp(l) - z) < 1e-13);
    CHECK(std::abs(l.imag() - ref_im) <= whf::kPi + 1e-12);
    CHECK(std::abs(l.real() - std::log(std::abs(z))) < 1e-14);
  }
  const std::vector<Complex> vals{{2.0, 0.0}, {0.0, -1.0}};
  const std::vector<Complex> refs{{0.0, 6.2}, {0.0, -7.8}};
  auto logs = whf::diag_log_near(vals, refs);
  CHECK(std::abs(logs[0] - Complex{std::log(2.0), 2 * whf::kPi}) < 1e-13);
  CHECK(std::abs(logs[1] - Complex{0.0, -whf::kPi / 2 - 2 * whf::kPi}) < 1e-13);
}

TEST_CASE("log of zero is an error") {
  CHECK_THROWS_AS((void)whf::log_near(Complex{}, Complex{}), whf::Error);
}

TEST_CASE("best matching finds the permutation") {
  const std::vector<Complex> a{{1, 0}, {5, 1}, {-2, 3}};
  const std::vector<Complex> b{{-2.01, 3}, {1.02, 0}, {5, 0.99}};
  double best = 0.0, second = 0.0;
  const auto p = whf::best_matching(a, b, &best, &second);
  // a[p[i]] pairs with b[i]
  CHECK(p == std::vector<std::size_t>{2, 0, 1});
  CHECK(best < second);
}

TEST_CASE("commutator and norms") {
  const ComplexMat a{{0.0, 1.0}, {0.0, 0.0}};
  const ComplexMat b{{0.0, 0.0}, {1.0, 0.0}};
  const ComplexMat c = whf::commutator(a, b);
  CHECK((c - ComplexMat{{1.0, 0.0}, {0.0, -1.0}}).max_abs() == 0.0);
  CHECK(ComplexMat{{1.0, -2.0}, {3.0, 0.5}}.norm_inf() == doctest::Approx(3.5));
  CHECK(ComplexMat{{1.0, -2.0}, {3.0, 0.5}}.trace() == Complex{1.5, 0.0});
}

TEST_CASE("polynomial arithmetic and roots") {
  const std::vector<Complex> roots{{1, 1}, {-2, 0}, {0, 3}};
  const auto p = whf::Polynomial::from_roots(roots);
  CHECK(p.degree() == 3);
  CHECK(p.leading() == Complex{1, 0});
  for (Complex r : roots) CHECK(std::abs(p(r)) < 1e-13);
  const Complex k{0.7, -0.2};
  CHECK(std::abs(p(k) - (k - roots[0]) * (k - roots[1]) * (k - roots[2])) < 1e-13);
  const auto q = p * p - p;
  CHECK(std::abs(q(k) - (p(k) * p(k) - p(k))) < 1e-12);
  CHECK(std::abs(p.derivative()(k) - (3.0 * k * k + 2.0 * p.coeffs()[2] * k + p.coeffs()[1])) <
        1e-12);
}
