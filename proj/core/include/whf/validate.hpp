#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "whf/cmatrix.hpp"
#include "whf/ode1.hpp"
#include "whf/ode2.hpp"
#include "whf/path.hpp"
#include "whf/problem.hpp"

namespace whf {

/// Input of the closed-form reference for problems of Khrapkov type:
/// H = h0 I + h1 Lambda with Lambda^2 = phi I (2 x 2, traceless Lambda).
struct KhrapkovSpec {
  FactorizationProblem problem;
  std::size_t cut = 0;
  /// Gauss-Legendre panels (8 nodes each) on the main part of the contour.
  std::size_t panels = 200;
  /// The Cauchy integrals run from k_1 + b up to k_1 + i * truncation.
  double truncation = 200.0;
};

/// Closed-form factor built from Cauchy integrals of the jump eigenvalue
/// logarithms, evaluated by composite Gauss-Legendre quadrature:
///   U(b, k) = Q(b)^{-1} exp(xibar) (cosh(sqrt(phi) etabar) I
///                                   + sinh(sqrt(phi) etabar) Lambda / sqrt(phi)).
class KhrapkovReference {
 public:
  explicit KhrapkovReference(KhrapkovSpec spec);

  /// U(b, k) for k off the cut (k_1 + b, k_1 + i inf).
  [[nodiscard]] ComplexMat U(Complex b, Complex k) const;
  /// Shore value at k = k_1 + i height (b = 0): the contour detours to the
  /// left of k for gamma_plus and to the right for gamma_minus.
  [[nodiscard]] ComplexMat U_shore(double height, Contour side, double delta = 0.05,
                                   double margin = 0.1) const;
  [[nodiscard]] Complex zeta(Complex b) const;
  [[nodiscard]] ComplexMat Q(Complex b) const;
  /// Residue of S(b, k) at k = k_1 + b.
  [[nodiscard]] ComplexMat s_ref(Complex b) const;
  /// Residues of R(b, k) = Q^{-1} B(k) Q.
  [[nodiscard]] std::vector<ComplexMat> r_ref(Complex b, const CommutantB& B) const;

  /// Largest entry change of U(b, k) when panels and truncation are doubled.
  [[nodiscard]] double convergence(Complex b, Complex k) const;
  /// U(b, k), throwing Error{QuadratureNotConverged} when doubling panels and
  /// truncation changes the result by more than `tolerance`.
  [[nodiscard]] ComplexMat U_checked(Complex b, Complex k, double tolerance) const;

  [[nodiscard]] const KhrapkovSpec& spec() const noexcept { return spec_; }

 private:
  struct Node {
    Complex tau;
    Complex weight;  // dtau * quadrature weight, oriented from bottom to top
    Complex xi;
    Complex eta;
  };
  struct Integrals {
    Complex xibar;
    Complex etabar;
    Complex zeta;
  };

  /// Nodes along segments listed from the top down; tracks branches of
  /// sqrt(phi) and the eigenvalue logarithms from the top.
  [[nodiscard]] std::vector<Node> nodes(std::span<const PathSegment> top_down,
                                        std::span<const std::size_t> panels,
                                        Complex* sqrt_phi_last = nullptr,
                                        Complex* lp_last = nullptr,
                                        Complex* lm_last = nullptr) const;
  [[nodiscard]] std::vector<PathSegment> straight_path(Complex b, double top) const;
  [[nodiscard]] static Integrals integrate(std::span<const Node> nodes, Complex k);
  [[nodiscard]] ComplexMat assemble(const Integrals& in, Complex k) const;
  [[nodiscard]] ComplexMat U_with(Complex b, Complex k, std::size_t panels, double top) const;

  KhrapkovSpec spec_;
  Complex k1_;
  Polynomial phi_;
  ComplexMat lambda_inf_;
  Complex sqrt_lc_;
  std::size_t half_degree_ = 0;
};

/// Per point: ||U_minus^{-1} U_plus H_j(k)^{-1} - I||, k = k_j + i height.
std::vector<double> jump_residual(const FactorizationProblem& p, std::size_t j,
                                  std::span<const double> heights,
                                  std::span<const ComplexMat> U_plus,
                                  std::span<const ComplexMat> U_minus);

/// Max over the grid of ||s_j(b; B) - s_j(b; B_alt)||.
double b_invariance_check(const FactorizationProblem& p, const CommutantB& B,
                          const CommutantB& B_alt, double L, std::size_t steps,
                          const Ode2Options& opts = {});

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

inline CheckResult make_check(std::string name, double value, double tolerance,
                              std::string note = {}) {
  return {std::move(name), value, tolerance, value <= tolerance, std::move(note)};
}

void write_report_json(std::ostream& out, std::span<const CheckResult> checks);

}  // namespace whf
