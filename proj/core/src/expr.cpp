#include "whf/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "whf/error.hpp"

namespace whf {

namespace detail {

struct RadicalData {
  std::shared_ptr<const Node> operand_expr;
  RadicalInfo info;
  std::vector<Complex> roots;  // up points first, then down points
  std::size_t up_count = 0;
};

struct Node {
  enum class Kind { literal, variable, add, sub, mul, div, neg, pow, radical };
  Kind kind = Kind::literal;
  Complex value{};
  int exponent = 0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
  std::shared_ptr<const RadicalData> radical;
};

}  // namespace detail

using detail::Node;
using NodePtr = std::shared_ptr<const Node>;

Complex log_cut_up(Complex z) {
  double arg = std::arg(z);
  if (arg > kPi / 2) arg -= 2.0 * kPi;
  return {std::log(std::abs(z)), arg};
}

Complex log_cut_down(Complex z) {
  double arg = std::arg(z);
  if (arg < -kPi / 2) arg += 2.0 * kPi;
  return {std::log(std::abs(z)), arg};
}

namespace {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_complex(Complex c) {
  if (c.imag() == 0.0) {
    return c.real() < 0.0 || std::signbit(c.real()) ? "(" + format_real(c.real()) + ")"
                                                     : format_real(c.real());
  }
  if (c.real() == 0.0) return "(" + format_real(c.imag()) + "i)";
  std::string im = format_real(c.imag());
  if (im.front() != '-') im = "+" + im;
  return "(" + format_real(c.real()) + im + "i)";
}

std::string radical_key(const Polynomial& p, std::span<const Complex> up,
                        std::span<const Complex> down) {
  auto fmt = [](Complex c) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.12g%+.12gi", c.real(), c.imag());
    return std::string(buf);
  };
  std::string key = "p[";
  for (Complex c : p.coeffs()) key += fmt(c) + ",";
  key += "]u[";
  for (Complex c : up) key += fmt(c) + ",";
  key += "]d[";
  for (Complex c : down) key += fmt(c) + ",";
  return key + "]";
}

struct EvalContext {
  const ShoreSpec* shore = nullptr;
  const Sheet* sheet = nullptr;
};

bool same_point(Complex a, Complex b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); }

Complex eval_radical(const detail::RadicalData& rad, Complex k, const EvalContext& ctx) {
  Complex sum{};
  for (std::size_t i = 0; i < rad.roots.size(); ++i) {
    const Complex a = rad.roots[i];
    const Complex z = k - a;
    if (std::abs(z) <= 1e-14 * (1.0 + std::abs(a))) {
      throw Error(ErrorCode::EvalAtBranchPoint,
                  "radical evaluated at branch point " + format_complex(a));
    }
    const bool is_up = i < rad.up_count;
    if (is_up && ctx.shore && ctx.shore->shore != Shore::off_cut &&
        same_point(a, ctx.shore->cut_point)) {
      // Continuation of the right-shore (plus) or left-shore (minus) values
      // across the upward cut from a.
      Complex l = log_cut_down(z);
      if (ctx.shore->shore == Shore::minus) l -= kTwoPiI;
      sum += l;
    } else {
      sum += is_up ? log_cut_up(z) : log_cut_down(z);
    }
  }
  Complex value = static_cast<double>(rad.info.sign) * std::sqrt(rad.info.operand.leading()) *
                  std::exp(0.5 * sum);
  if (ctx.sheet) {
    const auto& f = ctx.sheet->flipped;
    if (std::find(f.begin(), f.end(), rad.info.key) != f.end()) value = -value;
  }
  return value;
}

Complex eval_node(const Node& n, Complex k, const EvalContext& ctx) {
  using K = Node::Kind;
  switch (n.kind) {
    case K::literal: return n.value;
    case K::variable: return k;
    case K::add: return eval_node(*n.lhs, k, ctx) + eval_node(*n.rhs, k, ctx);
    case K::sub: return eval_node(*n.lhs, k, ctx) - eval_node(*n.rhs, k, ctx);
    case K::mul: return eval_node(*n.lhs, k, ctx) * eval_node(*n.rhs, k, ctx);
    case K::neg: return -eval_node(*n.lhs, k, ctx);
    case K::div: {
      const Complex num = eval_node(*n.lhs, k, ctx);
      const Complex den = eval_node(*n.rhs, k, ctx);
      if (den == Complex{}) throw Error(ErrorCode::DivisionByZero, "division by zero");
      const Complex q = num / den;
      if (!std::isfinite(q.real()) || !std::isfinite(q.imag())) {
        throw Error(ErrorCode::DivisionByZero, "non-finite quotient");
      }
      return q;
    }
    case K::pow: {
      const Complex base = eval_node(*n.lhs, k, ctx);
      Complex acc = 1.0;
      for (int i = 0; i < std::abs(n.exponent); ++i) acc *= base;
      if (n.exponent < 0) {
        if (acc == Complex{}) throw Error(ErrorCode::DivisionByZero, "negative power of zero");
        acc = 1.0 / acc;
      }
      return acc;
    }
    case K::radical: return eval_radical(*n.radical, k, ctx);
  }
  return {};
}

std::string print_node(const Node& n) {
  using K = Node::Kind;
  switch (n.kind) {
    case K::literal: return format_complex(n.value);
    case K::variable: return "k";
    case K::add: return "(" + print_node(*n.lhs) + " + " + print_node(*n.rhs) + ")";
    case K::sub: return "(" + print_node(*n.lhs) + " - " + print_node(*n.rhs) + ")";
    case K::mul: return "(" + print_node(*n.lhs) + " * " + print_node(*n.rhs) + ")";
    case K::div: return "(" + print_node(*n.lhs) + " / " + print_node(*n.rhs) + ")";
    case K::neg: return "(-" + print_node(*n.lhs) + ")";
    case K::pow: return print_node(*n.lhs) + "^" + std::to_string(n.exponent);
    case K::radical: {
      const auto& r = *n.radical;
      std::string s = "sqrt(" + print_node(*r.operand_expr);
      auto list = [](std::span<const Complex> pts) {
        std::string out;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (i) out += ", ";
          out += format_complex(pts[i]);
        }
        return out;
      };
      if (!r.info.up.empty()) s += "; up=" + list(r.info.up);
      if (!r.info.down.empty()) s += "; down=" + list(r.info.down);
      s += r.info.sign > 0 ? "; sign=+)" : "; sign=-)";
      return s;
    }
  }
  return {};
}

std::optional<Polynomial> node_polynomial(const Node& n) {
  using K = Node::Kind;
  switch (n.kind) {
    case K::literal: return Polynomial::constant(n.value);
    case K::variable: return Polynomial::monomial(1);
    case K::add:
    case K::sub:
    case K::mul: {
      auto a = node_polynomial(*n.lhs);
      auto b = node_polynomial(*n.rhs);
      if (!a || !b) return std::nullopt;
      if (n.kind == K::add) return *a + *b;
      if (n.kind == K::sub) return *a - *b;
      return *a * *b;
    }
    case K::neg: {
      auto a = node_polynomial(*n.lhs);
      if (!a) return std::nullopt;
      return Complex{-1.0} * *a;
    }
    case K::div: {
      auto a = node_polynomial(*n.lhs);
      auto b = node_polynomial(*n.rhs);
      if (!a || !b || b->degree() != 0 || b->is_zero()) return std::nullopt;
      return (1.0 / b->coeffs()[0]) * *a;
    }
    case K::pow: {
      if (n.exponent < 0) return std::nullopt;
      auto a = node_polynomial(*n.lhs);
      if (!a) return std::nullopt;
      Polynomial acc = Polynomial::constant(1.0);
      for (int i = 0; i < n.exponent; ++i) acc = acc * *a;
      return acc;
    }
    case K::radical: return std::nullopt;
  }
  return std::nullopt;
}

bool node_has(const Node& n, const std::function<bool(const Node&)>& pred) {
  if (pred(n)) return true;
  if (n.lhs && node_has(*n.lhs, pred)) return true;
  if (n.rhs && node_has(*n.rhs, pred)) return true;
  if (n.radical && node_has(*n.radical->operand_expr, pred)) return true;
  return false;
}

void collect_radicals(const Node& n, std::vector<RadicalInfo>& out) {
  if (n.kind == Node::Kind::radical) {
    const auto& info = n.radical->info;
    const bool seen = std::any_of(out.begin(), out.end(),
                                  [&](const RadicalInfo& r) { return r.key == info.key; });
    if (!seen) out.push_back(info);
    return;
  }
  if (n.lhs) collect_radicals(*n.lhs, out);
  if (n.rhs) collect_radicals(*n.rhs, out);
}

NodePtr make_literal(Complex v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::literal;
  n->value = v;
  return n;
}

NodePtr make_binary(Node::Kind kind, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

}  // namespace

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  BranchExpr parse_all() {
    NodePtr root = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return BranchExpr(std::move(root));
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::SyntaxError, msg + " at position " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool accept_word(std::string_view word) {
    skip_ws();
    if (text_.substr(pos_, word.size()) != word) return false;
    const std::size_t end = pos_ + word.size();
    if (end < text_.size() &&
        (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
      return false;
    }
    pos_ = end;
    return true;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(Node::Kind::add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = make_binary(Node::Kind::sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(Node::Kind::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = make_binary(Node::Kind::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('+')) return parse_unary();
    if (accept('-')) {
      NodePtr operand = parse_unary();
      if (operand->kind == Node::Kind::literal) return make_literal(-operand->value);
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::neg;
      n->lhs = std::move(operand);
      return n;
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_base();
    if (!accept('^')) return base;
    const bool negative = accept('-');
    if (!negative) accept('+');
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer exponent");
    const int e = std::atoi(std::string(text_.substr(start, pos_ - start)).c_str());
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::pow;
    n->lhs = std::move(base);
    n->exponent = negative ? -e : e;
    return n;
  }

  NodePtr parse_base() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (accept_word("sqrt")) return parse_radical();
    if (accept_word("k")) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::variable;
      return n;
    }
    if (c == '\0') fail("unexpected end of input");
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr parse_number() {
    skip_ws();
    const char* begin = text_.data() + pos_;
    // strtod would accept "inf"/"nan"/hex; restrict to plain decimals first.
    std::size_t end = pos_;
    while (end < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.')) {
      ++end;
    }
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
      if (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) {
        while (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) ++e;
        end = e;
      }
    }
    const std::string token(begin, text_.data() + end);
    char* stop = nullptr;
    const double v = std::strtod(token.c_str(), &stop);
    if (token.empty() || stop != token.c_str() + token.size()) fail("malformed number");
    pos_ = end;
    if (pos_ < text_.size() && text_[pos_] == 'i' &&
        !(pos_ + 1 < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])))) {
      ++pos_;
      return make_literal({0.0, v});
    }
    return make_literal(v);
  }

  bool at_clause_keyword() {
    const std::size_t save = pos_;
    const bool hit = accept_word("up") || accept_word("down") || accept_word("sign");
    pos_ = save;
    return hit;
  }

  std::vector<Complex> parse_point_list() {
    std::vector<Complex> pts;
    for (;;) {
      NodePtr item = parse_expr();
      if (node_has(*item, [](const Node& n) {
            return n.kind == Node::Kind::variable || n.kind == Node::Kind::radical;
          })) {
        fail("branch points must be constants");
      }
      pts.push_back(eval_node(*item, 0.0, {}));
      const std::size_t save = pos_;
      if (accept(',') && !at_clause_keyword()) continue;
      pos_ = save;
      return pts;
    }
  }

  NodePtr parse_radical() {
    expect('(');
    NodePtr operand = parse_expr();
    if (node_has(*operand, [](const Node& n) { return n.kind == Node::Kind::radical; })) {
      fail("nested radicals are not supported");
    }
    auto poly = node_polynomial(*operand);
    if (!poly) fail("radical operand must be a polynomial in k");

    std::vector<Complex> up, down;
    std::optional<int> sign;
    while (accept(';') || accept(',')) {
      if (accept_word("up")) {
        expect('=');
        up = parse_point_list();
      } else if (accept_word("down")) {
        expect('=');
        down = parse_point_list();
      } else if (accept_word("sign")) {
        expect('=');
        if (accept('+')) {
          sign = 1;
        } else if (accept('-')) {
          sign = -1;
        } else {
          fail("sign must be '+' or '-'");
        }
      } else {
        fail("expected 'up=', 'down=' or 'sign='");
      }
    }
    expect(')');
    if (!sign) fail("radical requires 'sign=+' or 'sign=-'");
    if (poly->is_zero()) fail("radical of the zero polynomial");

    // The declared points must be exactly the roots of the operand.
    std::vector<Complex> roots = up;
    roots.insert(roots.end(), down.begin(), down.end());
    const Polynomial rebuilt = poly->leading() * Polynomial::from_roots(roots);
    double scale = 0.0;
    for (Complex c : poly->coeffs()) scale = std::max(scale, std::abs(c));
    double mismatch = rebuilt.coeffs().size() == poly->coeffs().size() ? 0.0 : 1.0;
    if (mismatch == 0.0) {
      for (std::size_t i = 0; i < rebuilt.coeffs().size(); ++i)
        mismatch = std::max(mismatch, std::abs(rebuilt.coeffs()[i] - poly->coeffs()[i]));
      mismatch /= scale;
    }
    if (mismatch > 1e-9) {
      throw Error(ErrorCode::UndeclaredBranchPoint,
                  "declared branch points of radical do not match the roots of its operand "
                  "(relative coefficient mismatch " + std::to_string(mismatch) + ")");
    }

    auto data = std::make_shared<detail::RadicalData>();
    data->operand_expr = std::move(operand);
    data->info = RadicalInfo{*poly, up, down, *sign, radical_key(*poly, up, down)};
    data->roots = std::move(roots);
    data->up_count = up.size();
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::radical;
    n->radical = std::move(data);
    return n;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

BranchExpr::BranchExpr() : root_(make_literal(0.0)) {}

BranchExpr BranchExpr::literal(Complex value) { return BranchExpr(make_literal(value)); }

Complex BranchExpr::eval(Complex k, const ShoreSpec& shore) const {
  return eval_node(*root_, k, EvalContext{&shore, nullptr});
}

Complex BranchExpr::eval_on_sheet(Complex k, const Sheet& sheet) const {
  return eval_node(*root_, k, EvalContext{nullptr, &sheet});
}

std::string BranchExpr::print() const { return print_node(*root_); }

std::vector<RadicalInfo> BranchExpr::radicals() const {
  std::vector<RadicalInfo> out;
  collect_radicals(*root_, out);
  return out;
}

std::optional<Polynomial> BranchExpr::as_polynomial() const { return node_polynomial(*root_); }

bool BranchExpr::depends_on_k() const {
  return node_has(*root_, [](const Node& n) {
    return n.kind == Node::Kind::variable || n.kind == Node::Kind::radical;
  });
}

BranchExpr parse(std::string_view text) { return Parser(text).parse_all(); }

Complex parse_constant(std::string_view text) {
  const BranchExpr e = parse(text);
  if (e.depends_on_k()) {
    throw Error(ErrorCode::SyntaxError, "expected a constant, got '" + std::string(text) + "'");
  }
  return e.eval(0.0);
}

}  // namespace whf
