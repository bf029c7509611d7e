#include "whf/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "whf/error.hpp"
#include "whf/expr.hpp"

namespace whf {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

/// Splits at commas that are not nested inside (), [] or {}.
std::vector<std::string> split_top_level(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  const std::string last = trim(s.substr(start));
  if (!last.empty() || !out.empty()) out.push_back(last);
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

class Entries {
 public:
  explicit Entries(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      std::string content = raw;
      bool quoted = false;
      for (std::size_t i = 0; i < content.size(); ++i) {
        if (content[i] == '"') quoted = !quoted;
        if (content[i] == '#' && !quoted) {
          content.erase(i);
          break;
        }
      }
      content = trim(content);
      if (content.empty()) continue;
      const auto eq = content.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ": expected key = value");
      }
      std::string key = trim(std::string_view(content).substr(0, eq));
      std::string value = trim(std::string_view(content).substr(eq + 1));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
        value = value.substr(1, value.size() - 2);
      if (key.empty()) throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ": empty key");
      if (map_.count(key)) {
        throw Error(ErrorCode::ConfigError,
                    "line " + std::to_string(line) + ": duplicate key '" + key + "'");
      }
      map_[key] = Entry{value, line, false};
    }
  }

  const Entry* find(const std::string& key) {
    auto it = map_.find(key);
    if (it == map_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  std::vector<std::pair<std::string, Entry*>> with_prefix(const std::string& prefix) {
    std::vector<std::pair<std::string, Entry*>> out;
    for (auto& [k, e] : map_) {
      if (k.rfind(prefix, 0) == 0) {
        e.used = true;
        out.emplace_back(k.substr(prefix.size()), &e);
      }
    }
    return out;
  }

  void reject_unused() const {
    for (const auto& [k, e] : map_) {
      if (!e.used) {
        throw Error(ErrorCode::ConfigError,
                    "line " + std::to_string(e.line) + ": unknown key '" + k + "'");
      }
    }
  }

 private:
  std::map<std::string, Entry> map_;
};

class Substituter {
 public:
  void define(const std::string& name, std::string value, int line) {
    if (values_.count(name)) {
      throw Error(ErrorCode::ConfigError,
                  "line " + std::to_string(line) + ": '" + name + "' defined twice");
    }
    values_[name] = std::move(value);
  }

  std::string apply(const std::string& text, int line, int depth = 0) const {
    if (depth > 16) {
      throw Error(ErrorCode::ConfigError,
                  "line " + std::to_string(line) + ": substitution nested too deeply");
    }
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] != '{') {
        out += text[i];
        continue;
      }
      const auto close = text.find('}', i);
      if (close == std::string::npos) {
        throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ": unclosed '{'");
      }
      const std::string name = trim(std::string_view(text).substr(i + 1, close - i - 1));
      auto it = values_.find(name);
      if (it == values_.end()) {
        throw Error(ErrorCode::ConfigError,
                    "line " + std::to_string(line) + ": unknown name {" + name + "}");
      }
      out += "(" + apply(it->second, line, depth + 1) + ")";
      i = close;
    }
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

template <class F>
auto with_line(int line, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
    throw Error(e.code(), "line " + std::to_string(line) + ": " + msg);
  }
}

double parse_real(const std::string& text) {
  const Complex c = parse_constant(text);
  if (c.imag() != 0.0) throw Error(ErrorCode::ConfigError, "expected a real number: " + text);
  return c.real();
}

std::size_t parse_index(const std::string& text, int line) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || text.empty()) {
    throw Error(ErrorCode::ConfigError,
                "line " + std::to_string(line) + ": expected a non-negative integer, got '" +
                    text + "'");
  }
  return v;
}

}  // namespace

std::vector<Complex> parse_complex_list(std::string_view text) {
  const std::string s = trim(text);
  if (s.rfind("range(", 0) == 0 && s.back() == ')') {
    const auto args = split_top_level(std::string_view(s).substr(6, s.size() - 7));
    if (args.size() != 3) throw Error(ErrorCode::ConfigError, "range(a, b, n) takes 3 arguments");
    const Complex a = parse_constant(args[0]);
    const Complex b = parse_constant(args[1]);
    const double n = parse_real(args[2]);
    if (n < 1 || n != std::floor(n)) {
      throw Error(ErrorCode::ConfigError, "range count must be a positive integer");
    }
    const auto count = static_cast<std::size_t>(n);
    std::vector<Complex> out;
    for (std::size_t i = 0; i < count; ++i)
      out.push_back(count == 1 ? a : a + (b - a) * (static_cast<double>(i) / (n - 1.0)));
    return out;
  }
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
    throw Error(ErrorCode::ConfigError, "expected a list [a, b, ...] or range(a, b, n): " + s);
  }
  std::vector<Complex> out;
  for (const auto& item : split_top_level(std::string_view(s).substr(1, s.size() - 2))) {
    if (item.empty()) throw Error(ErrorCode::ConfigError, "empty list item in " + s);
    out.push_back(parse_constant(item));
  }
  return out;
}

ProblemConfig parse_config(std::string_view text) {
  Entries entries(text);
  ProblemConfig cfg;

  Substituter subst;
  for (const char* prefix : {"param.", "def."}) {
    for (auto& [name, e] : entries.with_prefix(prefix)) subst.define(name, e->value, e->line);
  }
  auto value = [&](const Entry& e) { return subst.apply(e.value, e.line); };

  if (const auto* e = entries.find("name")) cfg.name = e->value;
  std::size_t dim = 2;
  if (const auto* e = entries.find("dim")) dim = parse_index(e->value, e->line);
  if (dim == 0) throw Error(ErrorCode::ConfigError, "dim must be positive");
  std::string form = "moiseev";
  if (const auto* e = entries.find("form")) form = e->value;

  std::vector<Complex> cuts;
  if (const auto* e = entries.find("cuts"))
    cuts = with_line(e->line, [&] { return parse_complex_list(value(*e)); });
  double epsilon = 0.25;
  if (const auto* e = entries.find("epsilon"))
    epsilon = with_line(e->line, [&] { return parse_real(value(*e)); });

  auto matrix = [&](const std::string& prefix, bool required) {
    std::vector<BranchExpr> m(dim * dim, BranchExpr::literal(0.0));
    std::vector<bool> seen(dim * dim, false);
    for (auto& [idx, e] : entries.with_prefix(prefix)) {
      if (idx.size() != 2 || !std::isdigit(static_cast<unsigned char>(idx[0])) ||
          !std::isdigit(static_cast<unsigned char>(idx[1]))) {
        throw Error(ErrorCode::ConfigError,
                    "line " + std::to_string(e->line) + ": expected " + prefix + "IJ");
      }
      const std::size_t r = static_cast<std::size_t>(idx[0] - '1');
      const std::size_t c = static_cast<std::size_t>(idx[1] - '1');
      if (r >= dim || c >= dim) {
        throw Error(ErrorCode::ConfigError,
                    "line " + std::to_string(e->line) + ": index out of range");
      }
      m[r * dim + c] = with_line(e->line, [&] { return parse(value(*e)); });
      seen[r * dim + c] = true;
    }
    if (required && std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw Error(ErrorCode::ConfigError, "every entry " + prefix + "IJ must be given");
    }
    return m;
  };

  if (form == "moiseev") {
    std::vector<BranchExpr> lambda = matrix("lambda.", true);
    std::vector<BranchExpr> g(dim, BranchExpr::literal(0.0));
    for (auto& [idx, e] : entries.with_prefix("g.")) {
      const std::size_t n = parse_index(idx, e->line);
      if (n >= dim) {
        throw Error(ErrorCode::ConfigError, "line " + std::to_string(e->line) + ": g." + idx +
                                                " exceeds dim - 1");
      }
      g[n] = with_line(e->line, [&] { return parse(value(*e)); });
    }
    cfg.problem = FactorizationProblem::moiseev(dim, std::move(lambda), std::move(g), cuts, epsilon);
  } else if (form == "general") {
    cfg.problem = FactorizationProblem::general(dim, matrix("G.", true), cuts, epsilon);
  } else {
    throw Error(ErrorCode::ConfigError, "form must be 'moiseev' or 'general', got '" + form + "'");
  }

  auto list = [&](const char* key, std::vector<Complex>& out) {
    if (const auto* e = entries.find(key))
      out = with_line(e->line, [&] { return parse_complex_list(value(*e)); });
  };
  auto real = [&](const char* key, double& out) {
    if (const auto* e = entries.find(key))
      out = with_line(e->line, [&] { return parse_real(value(*e)); });
  };
  list("poles", cfg.poles);
  list("alt_poles", cfg.alt_poles);
  list("points", cfg.points);
  list("far_points", cfg.far_points);
  real("L", cfg.L);
  if (const auto* e = entries.find("steps")) cfg.steps = parse_index(e->value, e->line);
  real("tol.residual", cfg.residual_tol);
  real("tol.oracle", cfg.oracle_tol);
  real("tol.b_invariance", cfg.b_invariance_tol);
  real("tol.normalization", cfg.normalization_tol);
  real("contour.delta", cfg.delta);
  real("contour.margin", cfg.margin);
  if (const auto* e = entries.find("oracle")) {
    cfg.oracle = e->value;
    if (cfg.oracle != "khrapkov" && cfg.oracle != "none") {
      throw Error(ErrorCode::ConfigError,
                  "line " + std::to_string(e->line) + ": unknown oracle '" + cfg.oracle + "'");
    }
    if (cfg.oracle == "none") cfg.oracle.clear();
  }

  cfg.shore_heights.assign(cuts.size(), {});
  for (auto& [idx, e] : entries.with_prefix("shore.")) {
    const std::size_t j = parse_index(idx, e->line);
    if (j == 0 || j > cuts.size()) {
      throw Error(ErrorCode::ConfigError,
                  "line " + std::to_string(e->line) + ": shore." + idx + " names no cut");
    }
    for (Complex h : with_line(e->line, [&] { return parse_complex_list(value(*e)); })) {
      if (h.imag() != 0.0 || !(h.real() > 0.0)) {
        throw Error(ErrorCode::ConfigError,
                    "line " + std::to_string(e->line) + ": shore heights must be positive reals");
      }
      cfg.shore_heights[j - 1].push_back(h.real());
    }
  }

  entries.reject_unused();
  return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const Error& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
    throw Error(e.code(), path.filename().string() + ": " + msg);
  }
}

}  // namespace whf
