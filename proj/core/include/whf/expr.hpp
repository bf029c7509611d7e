#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "whf/cmatrix.hpp"
#include "whf/polynomial.hpp"

namespace whf {

/*
 * Grammar of algebraic scalar functions of k:
 *
 *   expr    ::= term { ("+" | "-") term }
 *   term    ::= unary { ("*" | "/") unary }
 *   unary   ::= ("-" | "+") unary | power
 *   power   ::= base [ "^" ["-"] integer ]
 *   base    ::= number | "k" | "(" expr ")" | radical
 *   radical ::= "sqrt(" expr [sep "up=" list] [sep "down=" list] sep "sign=" ("+"|"-") ")"
 *   sep     ::= ";" | ","
 *   list    ::= const { "," const }        (const: an expr free of k)
 *   number  ::= decimal [exponent] ["i"]
 *
 * A radical sqrt(p; up=a..., down=c..., sign=s) is the branch of sqrt(p(k))
 * whose cuts are vertical rays: upward from every `up` point and downward
 * from every `down` point. The declared points must be exactly the roots of
 * p (with multiplicity). The branch is fixed by p(k)^(1/2) / (lc^(1/2)
 * k^(deg/2)) -> s as k -> +inf along the real axis.
 */

enum class Shore { off_cut, plus, minus };

/// Which side of a cut to evaluate on. `plus` is the right shore, `minus` the
/// left one; in both cases the radical whose upper branch point is
/// `cut_point` is continued analytically across its cut, so evaluation is
/// valid throughout a vertical strip around the cut, not only on it.
struct ShoreSpec {
  std::optional<std::size_t> cut_index;
  Complex cut_point{};
  Shore shore = Shore::off_cut;

  static ShoreSpec off() { return {}; }
  static ShoreSpec on(std::size_t index, Complex point, Shore side) {
    return {index, point, side};
  }
};

/// Description of one radical appearing in an expression.
struct RadicalInfo {
  Polynomial operand;
  std::vector<Complex> up;
  std::vector<Complex> down;
  int sign = 1;
  /// Identifies the underlying two-valued function; the asymptotic sign is
  /// not part of it, so sqrt(..., sign=+) and sqrt(..., sign=-) share a key.
  std::string key;
};

/// A choice of sheet: radicals whose keys are listed evaluate with the
/// opposite sign.
struct Sheet {
  std::vector<std::string> flipped;
};

namespace detail {
struct Node;
}

/// Immutable AST of an algebraic scalar function of k. Cheap to copy.
class BranchExpr {
 public:
  BranchExpr();

  [[nodiscard]] Complex eval(Complex k, const ShoreSpec& shore = {}) const;
  [[nodiscard]] Complex eval_on_sheet(Complex k, const Sheet& sheet) const;

  /// Canonical text; parse(print()) reproduces the same tree.
  [[nodiscard]] std::string print() const;

  /// Distinct radicals (by key) in order of first appearance.
  [[nodiscard]] std::vector<RadicalInfo> radicals() const;

  /// Coefficients when the expression is a polynomial in k (division only by
  /// nonzero constants, no radicals).
  [[nodiscard]] std::optional<Polynomial> as_polynomial() const;

  [[nodiscard]] bool depends_on_k() const;

  static BranchExpr literal(Complex value);

 private:
  friend class Parser;
  explicit BranchExpr(std::shared_ptr<const detail::Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const detail::Node> root_;
};

/// Throws Error{SyntaxError} (message carries the character offset) or
/// Error{UndeclaredBranchPoint}.
BranchExpr parse(std::string_view text);

/// Parses an expression that must not depend on k and evaluates it.
Complex parse_constant(std::string_view text);

/// Throws Error{EvalAtBranchPoint} or Error{DivisionByZero}.
inline Complex eval(const BranchExpr& expr, Complex k, const ShoreSpec& shore = {}) {
  return expr.eval(k, shore);
}

/// Logarithm with a vertical cut running up (arg in (-3pi/2, pi/2]).
Complex log_cut_up(Complex z);
/// Logarithm with a vertical cut running down (arg in (-pi/2, 3pi/2]).
Complex log_cut_down(Complex z);

}  // namespace whf
