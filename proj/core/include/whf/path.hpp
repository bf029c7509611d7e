#pragma once

#include "whf/cmatrix.hpp"

namespace whf {

/// A parameterized piece of contour in the b-plane, sigma in [0, 1].
///
/// `graded` runs from `start` to `end` with b = end + (start - end)(1 - sigma)^2,
/// which crowds nodes toward `end`. The main descent uses it with end = 0
/// because s_j(b) behaves like sqrt(b) near the branch point; in the variable
/// sigma that singularity disappears and fixed-step RK4 keeps its order.
class PathSegment {
 public:
  enum class Kind { linear, graded };

  static PathSegment linear(Complex start, Complex end) { return {Kind::linear, start, end}; }
  static PathSegment graded(Complex start, Complex end) { return {Kind::graded, start, end}; }

  [[nodiscard]] Complex at(double sigma) const {
    if (kind_ == Kind::linear) return start_ + (end_ - start_) * sigma;
    const double u = 1.0 - sigma;
    return end_ + (start_ - end_) * (u * u);
  }

  [[nodiscard]] Complex derivative(double sigma) const {
    if (kind_ == Kind::linear) return end_ - start_;
    return -2.0 * (start_ - end_) * (1.0 - sigma);
  }

  [[nodiscard]] Complex start() const noexcept { return start_; }
  [[nodiscard]] Complex end() const noexcept { return end_; }
  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] double length() const noexcept { return std::abs(end_ - start_); }

 private:
  PathSegment(Kind kind, Complex start, Complex end) : kind_(kind), start_(start), end_(end) {}

  Kind kind_;
  Complex start_;
  Complex end_;
};

}  // namespace whf
