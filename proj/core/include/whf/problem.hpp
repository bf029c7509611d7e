#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "whf/cmatrix.hpp"
#include "whf/expr.hpp"
#include "whf/polynomial.hpp"

namespace whf {

enum class ProblemForm {
  /// G = sum_n g_n(k) Lambda(k)^n with a polynomial matrix Lambda.
  moiseev,
  /// G given entrywise; only useful for diagnostics (no commutant exists in
  /// general).
  general,
};

/// The matrix function G(k) to be factorized together with the cut geometry.
/// Cuts run vertically upward from the branch points k_j.
class FactorizationProblem {
 public:
  /// `lambda` is row-major N x N with polynomial entries; `g` holds
  /// g_0 .. g_{N-1}. Throws Error{InvalidArgument} on inconsistent data.
  static FactorizationProblem moiseev(std::size_t dim, std::vector<BranchExpr> lambda,
                                      std::vector<BranchExpr> g, std::vector<Complex> cuts,
                                      double epsilon = 0.25);
  static FactorizationProblem general(std::size_t dim, std::vector<BranchExpr> entries,
                                      std::vector<Complex> cuts, double epsilon = 0.25);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] ProblemForm form() const noexcept { return form_; }
  [[nodiscard]] const std::vector<Complex>& cuts() const noexcept { return cuts_; }
  [[nodiscard]] double epsilon() const noexcept { return epsilon_; }

  /// Moiseev form only.
  [[nodiscard]] ComplexMat eval_lambda(Complex k) const;
  [[nodiscard]] const Polynomial& lambda_entry(std::size_t row, std::size_t col) const;
  [[nodiscard]] std::size_t lambda_degree() const noexcept { return lambda_degree_; }
  [[nodiscard]] const std::vector<BranchExpr>& g() const noexcept { return g_; }

  /// phi with Lambda^2 = phi I, available for a traceless 2 x 2 Lambda.
  [[nodiscard]] std::optional<Polynomial> phi() const;

  [[nodiscard]] ComplexMat eval_G(Complex k, const ShoreSpec& shore = {}) const;
  [[nodiscard]] ComplexMat eval_G_on_sheet(Complex k, const Sheet& sheet) const;

  /// H_j(k) = G(k-) G(k+)^{-1}. k must lie in the half-strip
  /// |Re(k - k_j)| <= epsilon, Im(k - k_j) > 0 around cut j.
  [[nodiscard]] ComplexMat eval_H(std::size_t j, Complex k) const;

  /// Scalar coefficients (h0, h1) with H_j = h0 I + h1 Lambda, computed from
  /// the shore values of g_0, g_1 directly. Requires phi().
  [[nodiscard]] std::pair<Complex, Complex> jump_coefficients(std::size_t j, Complex k) const;

  /// Distinct radicals across all scalar expressions.
  [[nodiscard]] std::vector<RadicalInfo> radicals() const;

 private:
  FactorizationProblem() = default;
  void validate();

  std::size_t dim_ = 0;
  ProblemForm form_ = ProblemForm::moiseev;
  std::vector<BranchExpr> lambda_expr_;
  std::vector<Polynomial> lambda_;
  std::size_t lambda_degree_ = 0;
  std::vector<BranchExpr> g_;
  std::vector<BranchExpr> entries_;
  std::vector<Complex> cuts_;
  double epsilon_ = 0.25;
};

/// Largest relative commutator ||AB - BA|| / (||A|| ||B||) over all pairs.
double max_commutator(std::span<const ComplexMat> mats);

struct CommutativityReport {
  double max_commutator = 0.0;
  double tolerance = 1e-10;
  std::size_t samples = 0;
  std::size_t sheets = 0;
  std::uint64_t seed = 0;
  bool passed = true;
};

/// Samples random affixes in the strip around every cut, evaluates G on all
/// sheets of its radicals together with the jump candidates G_a G_b^{-1},
/// and reports the largest relative commutator among them.
CommutativityReport check_branch_commutativity(const FactorizationProblem& p,
                                               std::size_t samples = 64,
                                               std::uint64_t seed = 20240917);

/// B(k) = I + sum_l t_l / (k - rho_l) = I + Lambda(k) / xi(k).
struct CommutantB {
  std::vector<Complex> poles;
  std::vector<ComplexMat> residues;
  Polynomial xi;
  std::size_t dim = 0;

  [[nodiscard]] ComplexMat eval(Complex k) const;
};

struct BuildBOptions {
  /// Heights above k_j at which [B, H_j] = 0 and non-degeneracy are checked.
  std::vector<double> sample_heights = {0.01, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 40.0};
  double commutator_tolerance = 1e-10;
};

/// Throws Error{BadPoleSet} for duplicate poles, poles on a cut, too few
/// poles, or a commutant that is degenerate or fails to commute with H_j.
CommutantB build_B(const FactorizationProblem& p, std::vector<Complex> poles,
                   const BuildBOptions& opts = {});

/// deg(Lambda) + 1 poles on a circle of radius 2 max|k_j| + 1, rotated away
/// from the cuts and the real axis.
std::vector<Complex> default_poles(const FactorizationProblem& p);

}  // namespace whf
