#include "whf/problem.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "whf/error.hpp"

namespace whf {

namespace {

std::string fmt(Complex c) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.6g%+.6gi", c.real(), c.imag());
  return buf;
}

/// Distance from z to the closed ray {k + i t : t >= 0}.
double distance_to_cut(Complex z, Complex k) {
  if (z.imag() >= k.imag()) return std::abs(z.real() - k.real());
  return std::abs(z - k);
}

}  // namespace

FactorizationProblem FactorizationProblem::moiseev(std::size_t dim, std::vector<BranchExpr> lambda,
                                                   std::vector<BranchExpr> g,
                                                   std::vector<Complex> cuts, double epsilon) {
  FactorizationProblem p;
  p.dim_ = dim;
  p.form_ = ProblemForm::moiseev;
  p.lambda_expr_ = std::move(lambda);
  p.g_ = std::move(g);
  p.cuts_ = std::move(cuts);
  p.epsilon_ = epsilon;
  if (p.dim_ == 0 || p.lambda_expr_.size() != p.dim_ * p.dim_ || p.g_.size() != p.dim_) {
    throw Error(ErrorCode::InvalidArgument,
                "Moiseev form needs N*N entries of Lambda and N coefficients g_0..g_{N-1}");
  }
  for (const auto& e : p.lambda_expr_) {
    auto poly = e.as_polynomial();
    if (!poly) {
      throw Error(ErrorCode::InvalidArgument,
                  "entries of Lambda must be polynomials in k, got " + e.print());
    }
    p.lambda_degree_ = std::max(p.lambda_degree_, poly->degree());
    p.lambda_.push_back(std::move(*poly));
  }
  p.validate();
  return p;
}

FactorizationProblem FactorizationProblem::general(std::size_t dim, std::vector<BranchExpr> entries,
                                                   std::vector<Complex> cuts, double epsilon) {
  FactorizationProblem p;
  p.dim_ = dim;
  p.form_ = ProblemForm::general;
  p.entries_ = std::move(entries);
  p.cuts_ = std::move(cuts);
  p.epsilon_ = epsilon;
  if (p.dim_ == 0 || p.entries_.size() != p.dim_ * p.dim_) {
    throw Error(ErrorCode::InvalidArgument, "general form needs N*N entries of G");
  }
  p.validate();
  return p;
}

void FactorizationProblem::validate() {
  if (!(epsilon_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "strip half-width must be > 0");
  for (Complex c : cuts_) {
    if (c.imag() < 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "cut branch point " + fmt(c) + " lies in the lower half-plane");
    }
  }
  for (const auto& rad : radicals()) {
    for (Complex a : rad.up) {
      const bool declared = std::any_of(cuts_.begin(), cuts_.end(), [&](Complex c) {
        return std::abs(c - a) <= 1e-12 * (1.0 + std::abs(a));
      });
      if (!declared) {
        throw Error(ErrorCode::InvalidArgument,
                    "upper branch point " + fmt(a) + " has no declared cut");
      }
    }
  }
  // G must tend to I; probe far out along the real axis.
  const ComplexMat far = eval_G(Complex{1e6, 0.0}) - ComplexMat::identity(dim_);
  if (!(far.norm_inf() <= 1e-3)) {
    throw Error(ErrorCode::InvalidArgument,
                "G(k) does not tend to I: ||G(1e6) - I|| = " + std::to_string(far.norm_inf()));
  }
}

ComplexMat FactorizationProblem::eval_lambda(Complex k) const {
  if (form_ != ProblemForm::moiseev) {
    throw Error(ErrorCode::InvalidArgument, "Lambda is only defined for the Moiseev form");
  }
  ComplexMat m(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) m(i, j) = lambda_[i * dim_ + j](k);
  return m;
}

const Polynomial& FactorizationProblem::lambda_entry(std::size_t row, std::size_t col) const {
  if (form_ != ProblemForm::moiseev) {
    throw Error(ErrorCode::InvalidArgument, "Lambda is only defined for the Moiseev form");
  }
  return lambda_.at(row * dim_ + col);
}

std::optional<Polynomial> FactorizationProblem::phi() const {
  if (form_ != ProblemForm::moiseev || dim_ != 2) return std::nullopt;
  const Polynomial trace = lambda_[0] + lambda_[3];
  for (Complex c : trace.coeffs())
    if (std::abs(c) > 1e-14) return std::nullopt;
  return lambda_[1] * lambda_[2] - lambda_[0] * lambda_[3];
}

ComplexMat FactorizationProblem::eval_G(Complex k, const ShoreSpec& shore) const {
  if (form_ == ProblemForm::general) {
    ComplexMat m(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) m(i, j) = entries_[i * dim_ + j].eval(k, shore);
    return m;
  }
  const ComplexMat lam = eval_lambda(k);
  ComplexMat acc = g_[0].eval(k, shore) * ComplexMat::identity(dim_);
  ComplexMat power = ComplexMat::identity(dim_);
  for (std::size_t n = 1; n < dim_; ++n) {
    power = power * lam;
    acc += g_[n].eval(k, shore) * power;
  }
  return acc;
}

ComplexMat FactorizationProblem::eval_G_on_sheet(Complex k, const Sheet& sheet) const {
  if (form_ == ProblemForm::general) {
    ComplexMat m(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j)
        m(i, j) = entries_[i * dim_ + j].eval_on_sheet(k, sheet);
    return m;
  }
  const ComplexMat lam = eval_lambda(k);
  ComplexMat acc = g_[0].eval_on_sheet(k, sheet) * ComplexMat::identity(dim_);
  ComplexMat power = ComplexMat::identity(dim_);
  for (std::size_t n = 1; n < dim_; ++n) {
    power = power * lam;
    acc += g_[n].eval_on_sheet(k, sheet) * power;
  }
  return acc;
}

ComplexMat FactorizationProblem::eval_H(std::size_t j, Complex k) const {
  if (j >= cuts_.size()) throw Error(ErrorCode::InvalidArgument, "cut index out of range");
  const Complex rel = k - cuts_[j];
  if (!(rel.imag() > 0.0) || std::abs(rel.real()) > epsilon_) {
    throw Error(ErrorCode::InvalidArgument,
                "H_" + std::to_string(j + 1) + " evaluated outside its strip at k = " + fmt(k));
  }
  const ComplexMat minus = eval_G(k, ShoreSpec::on(j, cuts_[j], Shore::minus));
  const ComplexMat plus = eval_G(k, ShoreSpec::on(j, cuts_[j], Shore::plus));
  return minus * mat_inv(plus);
}

std::pair<Complex, Complex> FactorizationProblem::jump_coefficients(std::size_t j,
                                                                    Complex k) const {
  const auto ph = phi();
  if (!ph) {
    throw Error(ErrorCode::InvalidArgument, "jump coefficients need a traceless 2x2 Lambda");
  }
  if (j >= cuts_.size()) throw Error(ErrorCode::InvalidArgument, "cut index out of range");
  const ShoreSpec plus = ShoreSpec::on(j, cuts_[j], Shore::plus);
  const ShoreSpec minus = ShoreSpec::on(j, cuts_[j], Shore::minus);
  const Complex a0 = g_[0].eval(k, plus), a1 = g_[1].eval(k, plus);
  const Complex m0 = g_[0].eval(k, minus), m1 = g_[1].eval(k, minus);
  const Complex f = (*ph)(k);
  const Complex den = a0 * a0 - a1 * a1 * f;
  if (den == Complex{}) throw Error(ErrorCode::SingularMatrix, "det G(k+) = 0 at " + fmt(k));
  return {(m0 * a0 - f * m1 * a1) / den, (m1 * a0 - a1 * m0) / den};
}

std::vector<RadicalInfo> FactorizationProblem::radicals() const {
  std::vector<RadicalInfo> out;
  auto add = [&](const BranchExpr& e) {
    for (auto& r : e.radicals()) {
      const bool seen = std::any_of(out.begin(), out.end(),
                                    [&](const RadicalInfo& o) { return o.key == r.key; });
      if (!seen) out.push_back(std::move(r));
    }
  };
  for (const auto& e : g_) add(e);
  for (const auto& e : entries_) add(e);
  return out;
}

double max_commutator(std::span<const ComplexMat> mats) {
  double worst = 0.0;
  for (std::size_t a = 0; a < mats.size(); ++a) {
    for (std::size_t b = a + 1; b < mats.size(); ++b) {
      const double scale = mats[a].norm_inf() * mats[b].norm_inf();
      if (scale == 0.0) continue;
      worst = std::max(worst, commutator(mats[a], mats[b]).norm_inf() / scale);
    }
  }
  return worst;
}

CommutativityReport check_branch_commutativity(const FactorizationProblem& p,
                                               std::size_t samples, std::uint64_t seed) {
  CommutativityReport report;
  report.seed = seed;

  std::vector<std::string> keys;
  for (const auto& r : p.radicals()) keys.push_back(r.key);
  if (keys.size() > 12) {
    throw Error(ErrorCode::InvalidArgument, "too many distinct radicals for sheet enumeration");
  }
  const std::size_t sheet_count = std::size_t{1} << keys.size();
  report.sheets = sheet_count;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Complex> anchors = p.cuts();
  if (anchors.empty()) anchors.push_back(Complex{});

  for (std::size_t s = 0; s < samples; ++s) {
    const Complex anchor = anchors[s % anchors.size()];
    const double x = (2.0 * unit(rng) - 1.0) * p.epsilon();
    const double t = 0.05 + 9.95 * unit(rng);
    const Complex k = anchor + Complex{x, t};

    std::vector<ComplexMat> values;
    try {
      for (std::size_t mask = 0; mask < sheet_count; ++mask) {
        Sheet sheet;
        for (std::size_t r = 0; r < keys.size(); ++r)
          if (mask & (std::size_t{1} << r)) sheet.flipped.push_back(keys[r]);
        values.push_back(p.eval_G_on_sheet(k, sheet));
      }
      const std::size_t n = values.size();
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          if (a != b) values.push_back(values[a] * mat_inv(values[b]));
    } catch (const Error&) {
      continue;  // singular affix; draw another
    }
    ++report.samples;
    report.max_commutator = std::max(report.max_commutator, max_commutator(values));
  }
  report.passed = report.max_commutator <= report.tolerance;
  return report;
}

ComplexMat CommutantB::eval(Complex k) const {
  ComplexMat m = ComplexMat::identity(dim);
  for (std::size_t l = 0; l < poles.size(); ++l) {
    const Complex d = k - poles[l];
    if (d == Complex{}) throw Error(ErrorCode::DivisionByZero, "B evaluated at its pole");
    m += residues[l] / d;
  }
  return m;
}

CommutantB build_B(const FactorizationProblem& p, std::vector<Complex> poles,
                   const BuildBOptions& opts) {
  if (p.form() != ProblemForm::moiseev) {
    throw Error(ErrorCode::InvalidArgument, "a commutant can only be built for the Moiseev form");
  }
  const std::size_t d = poles.size();
  if (d < p.lambda_degree() + 1) {
    throw Error(ErrorCode::BadPoleSet, "need at least deg(Lambda) + 1 = " +
                                           std::to_string(p.lambda_degree() + 1) + " poles, got " +
                                           std::to_string(d));
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      if (std::abs(poles[a] - poles[b]) <= 1e-9 * (1.0 + std::abs(poles[a]))) {
        throw Error(ErrorCode::BadPoleSet, "duplicate pole " + fmt(poles[a]));
      }
    }
    for (Complex c : p.cuts()) {
      if (distance_to_cut(poles[a], c) <= 1e-9 * (1.0 + std::abs(c))) {
        throw Error(ErrorCode::BadPoleSet, "pole " + fmt(poles[a]) + " lies on the cut from " +
                                               fmt(c));
      }
    }
  }

  CommutantB B;
  B.dim = p.dim();
  B.poles = poles;
  B.xi = Polynomial::from_roots(poles);
  for (std::size_t l = 0; l < d; ++l) {
    Complex dxi = 1.0;
    for (std::size_t m = 0; m < d; ++m)
      if (m != l) dxi *= poles[l] - poles[m];
    const ComplexMat lam = p.eval_lambda(poles[l]);
    try {
      (void)eig(lam);
    } catch (const Error&) {
      throw Error(ErrorCode::BadPoleSet,
                  "Lambda has degenerate eigenvalues at pole " + fmt(poles[l]));
    }
    B.residues.push_back(lam / dxi);
  }

  for (std::size_t j = 0; j < p.cuts().size(); ++j) {
    for (double t : opts.sample_heights) {
      const Complex k = p.cuts()[j] + Complex{0.0, t};
      const ComplexMat b = B.eval(k);
      try {
        (void)eig(b);
      } catch (const Error&) {
        throw Error(ErrorCode::BadPoleSet, "B is degenerate at k = " + fmt(k));
      }
      const ComplexMat h = p.eval_H(j, k);
      const double c = commutator(b, h).norm_inf() / (b.norm_inf() * h.norm_inf());
      if (!(c <= opts.commutator_tolerance)) {
        throw Error(ErrorCode::BadPoleSet,
                    "B does not commute with H_" + std::to_string(j + 1) + " at k = " + fmt(k) +
                        " (relative commutator " + std::to_string(c) + ")");
      }
    }
  }
  return B;
}

std::vector<Complex> default_poles(const FactorizationProblem& p) {
  const std::size_t d = p.lambda_degree() + 1;
  double radius = 0.0;
  for (Complex c : p.cuts()) radius = std::max(radius, std::abs(c));
  radius = 2.0 * radius + 1.0;

  auto place = [&](double theta0) {
    std::vector<Complex> out;
    for (std::size_t m = 0; m < d; ++m)
      out.push_back(std::polar(radius, theta0 + 2.0 * kPi * static_cast<double>(m) /
                                                    static_cast<double>(d)));
    return out;
  };
  double best_theta = 0.0, best_score = -1.0;
  const int trials = 720;
  for (int i = 0; i < trials; ++i) {
    const double theta0 = 2.0 * kPi * i / (trials * static_cast<double>(d));
    double score = 1e300;
    for (Complex rho : place(theta0)) {
      score = std::min(score, std::abs(rho.imag()));
      for (Complex c : p.cuts()) score = std::min(score, distance_to_cut(rho, c));
    }
    if (score > best_score + 1e-12) {
      best_score = score;
      best_theta = theta0;
    }
  }
  return place(best_theta);
}

}  // namespace whf
