#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "whf/cmatrix.hpp"
#include "whf/problem.hpp"

namespace whf {

/*
 * Problem files are flat `key = value` text, one entry per line, `#` starts
 * a comment. Values may be wrapped in double quotes.
 *
 *   name = antipov
 *   dim = 2
 *   form = moiseev                 # or general
 *   param.mu = 2                   # constants, referenced as {mu}
 *   def.psi = sqrt(k^2 - 1; up=1, down=-1; sign=+)   # reusable snippets, {psi}
 *   lambda.11 = k^4 - {mu}^4       # Moiseev form: polynomial matrix, 1-based
 *   g.0 = ...                      # Moiseev form: g_0 .. g_{N-1}
 *   G.12 = ...                     # general form: entries of G, 1-based
 *   cuts = [1]                     # upper branch points k_j
 *   epsilon = 0.25                 # strip half-width around each cut
 *   poles = [2+1i, 2-1i, -1i]      # commutant poles (default: automatic)
 *   alt_poles = [...]              # second admissible set for invariance checks
 *   L = 40
 *   steps = 2000
 *   points = range(-0.95, 0.95, 20)   # or an explicit list
 *   shore.1 = [0.5, 1, 2]          # heights above k_1 for shore pairs
 *   far_points = [1000, -1000, 1000i]
 *   oracle = khrapkov              # enables the closed-form comparison
 *   tol.residual / tol.oracle / tol.b_invariance / tol.normalization
 *   contour.delta / contour.margin # shore detour geometry
 *
 * {name} is replaced textually by "(value)" of param.name or def.name.
 */
struct ProblemConfig {
  std::string name;
  std::optional<FactorizationProblem> problem;
  std::vector<Complex> poles;
  std::vector<Complex> alt_poles;
  double L = 40.0;
  std::size_t steps = 2000;
  std::vector<Complex> points;
  /// Per cut, heights t' of shore points k_j + i t'.
  std::vector<std::vector<double>> shore_heights;
  std::vector<Complex> far_points = {Complex{1000.0, 0.0}, Complex{-1000.0, 0.0},
                                     Complex{0.0, 1000.0}};
  std::string oracle;
  double residual_tol = 1e-3;
  double oracle_tol = 1e-4;
  double b_invariance_tol = 1e-6;
  double normalization_tol = 1e-3;
  double delta = 0.05;
  double margin = 0.1;
};

/// Throws Error{ConfigError} (with line numbers) or the expression errors of
/// the offending entry.
ProblemConfig parse_config(std::string_view text);
ProblemConfig load_config(const std::filesystem::path& path);

/// "[a, b, c]" or "range(a, b, n)" (n points from a to b inclusive).
std::vector<Complex> parse_complex_list(std::string_view text);

}  // namespace whf
