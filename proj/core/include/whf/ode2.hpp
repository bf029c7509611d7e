#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "whf/cmatrix.hpp"
#include "whf/path.hpp"
#include "whf/problem.hpp"

namespace whf {

/// How the eigenvalues of s_j are attached to the eigenvectors of R(b, k_j + b).
enum class MatchMode {
  /// Pair each eigenvector of R with the eigenvalue of B(k_j + b) it
  /// reproduces (R and B are isospectral at k = k_j + b), and through B's
  /// eigenbasis with the corresponding eigenvalue of H_j. Robust when the
  /// eigenvalues of s_j nearly coincide.
  spectral,
  /// Pick the permutation whose result is closest to the previous s_j.
  continuity,
};

struct Ode2Options {
  /// init_state requires ||H_j(k_j + iL) - I|| below this.
  double init_tol = 0.1;
  /// Relative size of off-diagonal entries allowed in P*^{-1} H_j P*.
  double diagonal_tol = 1e-8;
  /// match_s reports AmbiguousMatch when the runner-up is within this factor.
  double ambiguity_ratio = 2.0;
  MatchMode matching = MatchMode::spectral;
  EigOptions eig{};
};

/// Per-cut branch bookkeeping carried from node to node: eigenvalues of
/// B(k_j + b) in a continuity-fixed order and the logarithms of the matching
/// eigenvalues of H_j.
struct CutTrack {
  std::vector<Complex> beta;
  std::vector<Complex> logs;
};

struct Ode2State {
  Complex b{};
  std::vector<ComplexMat> r;
  std::vector<ComplexMat> s;
};

struct Ode2Node {
  Ode2State state;
  /// db/dsigma of the segment the node belongs to.
  Complex db{};
  std::vector<CutTrack> tracks;
};

struct Ode2Diagnostics {
  /// max over nodes of ||sum_l [s_j, r_l]/(rho_l - k_j - b)|| relative to
  /// ||s_j|| sum_l ||r_l|| / |rho_l - k_j - b|.
  double constraint_residual = 0.0;
  /// max |eig r_l(b) - eig t_l|.
  double isospectral_drift = 0.0;
  /// max |eig R(b, k_j + b) - eig B(k_j + b)| after matching.
  double spectrum_mismatch = 0.0;
  /// max ||s_j(next) - s_j(prev)|| / |b_next - b_prev|.
  double continuity_constant = 0.0;
  /// Nodes where continuity matching would have chosen differently (or was
  /// ambiguous) compared to the matching actually used.
  std::size_t continuity_disagreements = 0;

  void merge(const Ode2Diagnostics& other);
};

/// Samples of the ODE2 solution on the graded descent from b = iL to b = 0.
/// nodes[i] sits at sigma = i * sigma_step, i = 0 .. 2 * steps; even indices
/// are RK4 step boundaries, odd ones the half steps.
struct Ode2Trajectory {
  double L = 0.0;
  std::size_t steps = 0;
  double sigma_step = 0.0;
  PathSegment path = PathSegment::graded(Complex{}, Complex{});
  std::vector<Ode2Node> nodes;
  Ode2Diagnostics diagnostics;
};

/// Y1 diag(X permuted) Y1^{-1} closest to `prev` over all permutations.
/// Throws Error{DegenerateEigenvalues} or Error{AmbiguousMatch}.
ComplexMat match_s(std::span<const Complex> x_diag, const ComplexMat& y, const ComplexMat& prev,
                   double ambiguity_ratio = 2.0);

/// Initial correspondence: eigenvectors of Y are paired with the columns of
/// P* (eigenvectors of B(k_j + iL)), whose order is that of x_diag.
ComplexMat match_s_initial(std::span<const Complex> x_diag, const ComplexMat& y,
                           const ComplexMat& p_star);

/// Pairs eigenvalues of Y with `beta` (same order as x_diag).
/// `mismatch` receives sum |beta[p(i)] - y_i| when non-null.
ComplexMat match_s_spectral(std::span<const Complex> x_diag, std::span<const Complex> beta,
                            const ComplexMat& y, double* mismatch = nullptr);

/// The ODE2 system bound to a problem and a commutant (both must outlive it).
class Ode2System {
 public:
  Ode2System(const FactorizationProblem& p, const CommutantB& B, Ode2Options opts = {});

  [[nodiscard]] const FactorizationProblem& problem() const noexcept { return *p_; }
  [[nodiscard]] const CommutantB& commutant() const noexcept { return *B_; }
  [[nodiscard]] const Ode2Options& options() const noexcept { return opts_; }

  /// State at b = iL. Throws Error{LTooSmall} or Error{NotDiagonalized}.
  [[nodiscard]] Ode2Node initial(double L) const;

  struct SValue {
    ComplexMat s;
    CutTrack track;
    double spectrum_mismatch = 0.0;
    /// Target eigenvalues and the matrix whose eigenvectors s_j inherits.
    std::vector<Complex> x;
    ComplexMat y;
  };
  /// s_j at b from the current residues r. `prev_s` is used by continuity
  /// matching and may be null for spectral matching.
  [[nodiscard]] SValue eval_s(std::size_t j, Complex b, std::span<const ComplexMat> r,
                              const CutTrack& prev, const ComplexMat* prev_s) const;

  /// dr_l/db = sum_j [s_j, r_l] / (rho_l - k_j - b) for given r and s.
  [[nodiscard]] std::vector<ComplexMat> rhs(Complex b, std::span<const ComplexMat> r,
                                            std::span<const ComplexMat> s) const;

  /// RK4 along `segment` in `steps` full steps starting from `start` (whose b
  /// must equal segment.start()). Returns 2 * steps + 1 nodes, the first being
  /// `start` re-labelled with the segment's db. Errors carry the b location.
  [[nodiscard]] std::vector<Ode2Node> integrate(const Ode2Node& start, const PathSegment& segment,
                                                std::size_t steps,
                                                Ode2Diagnostics* diagnostics = nullptr) const;

  /// Constraint / isospectral / continuity diagnostics of a node sequence.
  void diagnose(std::span<const Ode2Node> nodes, Ode2Diagnostics& out) const;

 private:
  const FactorizationProblem* p_;
  const CommutantB* B_;
  Ode2Options opts_;
  std::vector<std::vector<Complex>> t_spectra_;
};

/// r_l = t_l and s_j from the log-diagonal sandwich of H_j(k_j + iL).
Ode2State init_state(const FactorizationProblem& p, const CommutantB& B, double L,
                     const Ode2Options& opts = {});

/// Right-hand side using the s_j carried by `state` (the integrator refreshes
/// s from r before every call).
std::vector<ComplexMat> ode2_rhs(const Ode2State& state, const FactorizationProblem& p,
                                 const CommutantB& B);

/// Full descent from iL to 0 with `steps` RK4 steps on the graded path.
Ode2Trajectory integrate(const FactorizationProblem& p, const CommutantB& B, double L,
                         std::size_t steps, const Ode2Options& opts = {});

/// Integrates from 2L down to L and returns max_j ||s_j(iL) - s_j^init(iL)||,
/// a measure of the truncation error of starting at iL.
double verify_truncation(const FactorizationProblem& p, const CommutantB& B, double L,
                         std::size_t steps, const Ode2Options& opts = {});

/// Columns: im_b, then Re/Im of every entry of every r_l (row-major), then
/// of every s_j.
void write_trajectory_csv(std::ostream& out, const Ode2Trajectory& trajectory);

}  // namespace whf
