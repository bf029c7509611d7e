#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "whf/cmatrix.hpp"
#include "whf/ode2.hpp"

namespace whf {

enum class Contour {
  /// Straight descent of b along the imaginary axis; k must be off all cuts.
  straight,
  /// Value on the right shore of a cut: the descent passes to the left of
  /// the point.
  gamma_plus,
  /// Value on the left shore: the descent passes to the right.
  gamma_minus,
};

struct EvalPoint {
  Complex k{};
  Contour contour = Contour::straight;
  /// For shore contours: cut index and height t' of k = k_j + i t'.
  std::size_t cut = 0;
  double height = 0.0;

  static EvalPoint straight(Complex k) { return {k, Contour::straight, 0, 0.0}; }
  static EvalPoint shore(const FactorizationProblem& p, std::size_t cut, double height,
                         Contour contour);
};

struct Ode1Options {
  /// Horizontal offset of the shore detour in the b-plane.
  double delta = 0.05;
  /// The detour leaves the axis at least this far above and rejoins it at
  /// least this far below the pole.
  double margin = 0.1;
  /// PoleCollision when k comes within factor * L of a pole of S(b, k).
  double collision_factor = 1e-6;
  /// |det U| below this raises NonInvertible.
  double det_floor = 1e-12;
  /// Worker threads for independent points; 0 = hardware concurrency.
  std::size_t threads = 0;
};

struct FactorizationResult {
  std::vector<EvalPoint> points;
  std::vector<ComplexMat> U;
  std::vector<double> det_abs;
  /// For shore points: mismatch between the residues carried around the
  /// detour and those on the main path where it rejoins (0 otherwise).
  std::vector<double> detour_closure;
  double L = 0.0;
  std::size_t steps = 0;
};

/// S(b, k) U with S = sum_j s_j / (k - (k_j + b)).
/// Throws Error{PoleCollision} when |k - (k_j + b)| < safety_radius.
ComplexMat ode1_rhs(Complex b, const ComplexMat& U, Complex k, std::span<const Complex> cuts,
                    std::span<const ComplexMat> s, double safety_radius);

/// Solves dX/dsigma = C(sigma) X on sigma in [0, 1] with `steps` RK4 steps.
ComplexMat ordered_exponential(const std::function<ComplexMat(double)>& coefficient,
                               std::size_t steps, const ComplexMat& start);

/// Same, with C sampled at half-step nodes: c.size() = 2 * steps + 1 and the
/// node spacing in sigma is `sigma_step`.
ComplexMat ordered_exponential_nodes(std::span<const ComplexMat> c, double sigma_step,
                                     const ComplexMat& start);

/// U(0, k) for every point. Points are independent and solved in parallel;
/// the result order matches `points`.
FactorizationResult solve_U(const Ode2System& system, const Ode2Trajectory& trajectory,
                            std::span<const EvalPoint> points, const Ode1Options& opts = {});

/// Columns: re_k, im_k, Re/Im of U11, U12, U21, U22, abs_det_U.
void write_result_csv(std::ostream& out, const FactorizationResult& result);
void write_result_json(std::ostream& out, const FactorizationResult& result,
                       std::span<const double> residuals = {});

}  // namespace whf
