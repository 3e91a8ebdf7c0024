// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Sparse multivariate polynomials over controller signals.
//
// Variables are tagged by role:
//   u[i]     controller output i steps in the past (u[0] is the current input
//            of a plant model)
//   y[j][k]  component k (1-based) of the controller input j steps in the
//            past; y[j] abbreviates y[j][1], bare `y` abbreviates y[0][1]
//   z[i]     state i of a canonical-form controller
//   x[i]     state i of a plant model
//
// Textual form: one or more monomials per line joined by + or -, each a
// product of numeric and variable factors, e.g.
//   0.3 * u[1]^2 - 0.2 * u[2]
//   1.0 * y[2]

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "encctl/bigint.hpp"
#include "encctl/error.hpp"

namespace encctl {

enum class VarKind : std::uint8_t { u = 0, y = 1, z = 2, x = 3 };

struct Variable {
  VarKind kind = VarKind::u;
  int index = 0;
  int component = 0;

  friend auto operator<=>(const Variable&, const Variable&) = default;

  static constexpr Variable u(int lag) { return {VarKind::u, lag, 0}; }
  static constexpr Variable y(int lag, int comp = 1) { return {VarKind::y, lag, comp}; }
  static constexpr Variable z(int i) { return {VarKind::z, i, 0}; }
  static constexpr Variable x(int i) { return {VarKind::x, i, 0}; }
};

inline std::string to_string(const Variable& v) {
  switch (v.kind) {
    case VarKind::u: return "u[" + std::to_string(v.index) + "]";
    case VarKind::y:
      if (v.component == 1) return "y[" + std::to_string(v.index) + "]";
      return "y[" + std::to_string(v.index) + "][" + std::to_string(v.component) + "]";
    case VarKind::z: return "z[" + std::to_string(v.index) + "]";
    case VarKind::x: return "x[" + std::to_string(v.index) + "]";
  }
  return "?";
}

/// Sorted by variable; every exponent positive.
using Exponents = std::vector<std::pair<Variable, int>>;

inline int total_degree(const Exponents& e) {
  int d = 0;
  for (const auto& [v, k] : e) d += k;
  return d;
}

inline Exponents multiply(const Exponents& a, const Exponents& b) {
  Exponents out;
  out.reserve(a.size() + b.size());
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() || j != b.end()) {
    if (j == b.end() || (i != a.end() && i->first < j->first)) {
      out.push_back(*i++);
    } else if (i == a.end() || j->first < i->first) {
      out.push_back(*j++);
    } else {
      out.emplace_back(i->first, i->second + j->second);
      ++i;
      ++j;
    }
  }
  return out;
}

template <class Coeff>
struct Monomial {
  Coeff coeff{};
  Exponents powers;

  int degree() const { return total_degree(powers); }
  friend bool operator==(const Monomial&, const Monomial&) = default;
};

template <class Coeff>
struct CoeffTraits;

template <>
struct CoeffTraits<double> {
  static bool is_zero(double c) { return c == 0.0; }
  static std::string format(double c) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), c);
    return std::string(buf, res.ptr);
  }
};

template <>
struct CoeffTraits<BigInt> {
  static bool is_zero(const BigInt& c) { return c == 0; }
  static std::string format(const BigInt& c) { return c.str(); }
};

/// Terms are kept in insertion order; evaluation order follows it.
template <class Coeff>
struct Polynomial {
  std::vector<Monomial<Coeff>> terms;

  Polynomial() = default;
  Polynomial(std::initializer_list<Monomial<Coeff>> init) : terms(init) {}
  explicit Polynomial(std::vector<Monomial<Coeff>> t) : terms(std::move(t)) {}

  static Polynomial constant(Coeff c) { return Polynomial{Monomial<Coeff>{std::move(c), {}}}; }
  static Polynomial variable(Variable v, Coeff c = Coeff(1)) {
    return Polynomial{Monomial<Coeff>{std::move(c), {{v, 1}}}};
  }

  bool empty() const { return terms.empty(); }
  std::size_t size() const { return terms.size(); }

  int max_degree() const {
    int d = 0;
    for (const auto& t : terms) d = std::max(d, t.degree());
    return d;
  }

  std::set<Variable> variables() const {
    std::set<Variable> out;
    for (const auto& t : terms)
      for (const auto& [v, k] : t.powers) out.insert(v);
    return out;
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;
};

/// Combines like monomials, drops exact zeros, and sorts by descending total
/// degree, then by variable order.
template <class Coeff>
Polynomial<Coeff> normalized(const Polynomial<Coeff>& p) {
  std::map<Exponents, Coeff> acc;
  for (const auto& t : p.terms) {
    auto [it, inserted] = acc.try_emplace(t.powers, t.coeff);
    if (!inserted) it->second += t.coeff;
  }
  Polynomial<Coeff> out;
  for (auto& [e, c] : acc) {
    if (!CoeffTraits<Coeff>::is_zero(c)) out.terms.push_back({c, e});
  }
  std::stable_sort(out.terms.begin(), out.terms.end(),
                   [](const auto& a, const auto& b) { return a.degree() > b.degree(); });
  return out;
}

inline constexpr std::size_t kDefaultMonomialBudget = 100000;

template <class Coeff>
Polynomial<Coeff> operator+(const Polynomial<Coeff>& a, const Polynomial<Coeff>& b) {
  Polynomial<Coeff> out = a;
  out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
  return normalized(out);
}

template <class Coeff>
Polynomial<Coeff> multiply(const Polynomial<Coeff>& a, const Polynomial<Coeff>& b,
                           std::size_t budget = kDefaultMonomialBudget) {
  if (a.size() * b.size() > budget * 4 + 16)
    fail(ErrorCode::ExpansionBudgetExceeded,
         "product of " + std::to_string(a.size()) + " and " + std::to_string(b.size()) +
             " monomials exceeds the budget of " + std::to_string(budget));
  Polynomial<Coeff> out;
  out.terms.reserve(a.size() * b.size());
  for (const auto& s : a.terms)
    for (const auto& t : b.terms) out.terms.push_back({s.coeff * t.coeff, multiply(s.powers, t.powers)});
  out = normalized(out);
  if (out.size() > budget)
    fail(ErrorCode::ExpansionBudgetExceeded,
         std::to_string(out.size()) + " monomials exceed the budget of " + std::to_string(budget));
  return out;
}

template <class Coeff>
Polynomial<Coeff> power(const Polynomial<Coeff>& p, int e, std::size_t budget = kDefaultMonomialBudget) {
  Polynomial<Coeff> out = Polynomial<Coeff>::constant(Coeff(1));
  for (int i = 0; i < e; ++i) out = multiply(out, p, budget);
  return out;
}

/// Replaces variables by polynomials. `image(v)` returns the replacement, or
/// nullptr to keep v as is.
template <class Coeff, class Image>
Polynomial<Coeff> substitute(const Polynomial<Coeff>& p, Image&& image,
                             std::size_t budget = kDefaultMonomialBudget) {
  Polynomial<Coeff> out;
  for (const auto& t : p.terms) {
    Polynomial<Coeff> term = Polynomial<Coeff>::constant(t.coeff);
    for (const auto& [v, k] : t.powers) {
      const Polynomial<Coeff>* repl = image(v);
      if (repl == nullptr) {
        term = multiply(term, Polynomial<Coeff>{Monomial<Coeff>{Coeff(1), {{v, k}}}}, budget);
      } else {
        term = multiply(term, power(*repl, k, budget), budget);
      }
    }
    out.terms.insert(out.terms.end(), term.terms.begin(), term.terms.end());
    if (out.size() > budget * 4 + 16) out = normalized(out);
  }
  out = normalized(out);
  if (out.size() > budget)
    fail(ErrorCode::ExpansionBudgetExceeded,
         std::to_string(out.size()) + " monomials exceed the budget of " + std::to_string(budget));
  return out;
}

/// Renames variables; like monomials are combined afterwards.
template <class Coeff, class Rename>
Polynomial<Coeff> rename_variables(const Polynomial<Coeff>& p, Rename&& rename) {
  Polynomial<Coeff> out;
  for (const auto& t : p.terms) {
    Exponents e;
    for (const auto& [v, k] : t.powers) e = multiply(e, Exponents{{rename(v), k}});
    out.terms.push_back({t.coeff, std::move(e)});
  }
  return normalized(out);
}

/// Adds `k` to the lag of every u and y variable.
template <class Coeff>
Polynomial<Coeff> shift_lags(const Polynomial<Coeff>& p, int k) {
  return rename_variables(p, [k](Variable v) {
    if (v.kind == VarKind::u || v.kind == VarKind::y) v.index += k;
    return v;
  });
}

/// Evaluates in the stored term order. `value(v)` supplies variable values;
/// the accumulator type is that of `coeff * value(v)`.
namespace detail {
template <class Coeff, class X>
struct EvalResult {
  using type = std::common_type_t<Coeff, X>;
};
template <class X>
struct EvalResult<BigInt, X> {
  using type = BigInt;
};
}  // namespace detail

template <class Coeff, class Value>
auto evaluate(const Polynomial<Coeff>& p, Value&& value) {
  using X = std::decay_t<decltype(value(std::declval<Variable>()))>;
  using V = typename detail::EvalResult<Coeff, X>::type;
  V acc = V(0);
  for (const auto& t : p.terms) {
    V term = V(t.coeff);
    for (const auto& [v, k] : t.powers) {
      const V x = V(value(v));
      for (int i = 0; i < k; ++i) term *= x;
    }
    acc += term;
  }
  return acc;
}

template <class Coeff>
std::string format_monomial(const Monomial<Coeff>& m) {
  std::string s = CoeffTraits<Coeff>::format(m.coeff);
  for (const auto& [v, k] : m.powers) {
    s += " * " + to_string(v);
    if (k != 1) s += "^" + std::to_string(k);
  }
  return s;
}

/// One monomial per line.
template <class Coeff>
std::string to_text(const Polynomial<Coeff>& p) {
  std::string s;
  for (const auto& t : p.terms) s += format_monomial(t) + "\n";
  return s;
}

/// Single-line form, e.g. "0.3 * u[1]^2 - 0.2 * u[2] + 1 * y[2]".
template <class Coeff>
std::string to_inline_string(const Polynomial<Coeff>& p) {
  if (p.empty()) return "0";
  std::string s;
  bool first = true;
  for (const auto& t : p.terms) {
    std::string m = format_monomial(t);
    if (first) {
      s = m;
    } else if (!m.empty() && m.front() == '-') {
      s += " - " + m.substr(1);
    } else {
      s += " + " + m;
    }
    first = false;
  }
  return s;
}

namespace detail {

template <class Coeff>
class PolyParser {
 public:
  PolyParser(std::string_view line, int line_no) : s_(line), line_no_(line_no) {}

  void parse_into(Polynomial<Coeff>& out) {
    skip_ws();
    if (done()) return;
    bool negative = false;
    if (peek() == '+' || peek() == '-') {
      negative = peek() == '-';
      ++pos_;
    }
    while (true) {
      Monomial<Coeff> m = parse_term();
      if (negative) m.coeff = -m.coeff;
      out.terms.push_back(std::move(m));
      skip_ws();
      if (done()) break;
      if (peek() != '+' && peek() != '-') error("expected '+' or '-'");
      negative = peek() == '-';
      ++pos_;
    }
  }

 private:
  Monomial<Coeff> parse_term() {
    Monomial<Coeff> m{Coeff(1), {}};
    bool any = false;
    while (true) {
      skip_ws();
      if (done()) error("expected a factor");
      const char c = peek();
      if (c == 'u' || c == 'y' || c == 'z' || c == 'x') {
        auto [v, k] = parse_variable();
        m.powers = multiply(m.powers, Exponents{{v, k}});
      } else if (c == '-' && !any) {
        ++pos_;
        m.coeff = -m.coeff;
        continue;
      } else {
        m.coeff *= parse_number();
      }
      any = true;
      skip_ws();
      if (!done() && peek() == '*') {
        ++pos_;
        continue;
      }
      // Juxtaposition: "0.3u[1]" or "2 y".
      if (!done() && (peek() == 'u' || peek() == 'y' || peek() == 'z' || peek() == 'x')) continue;
      break;
    }
    return m;
  }

  Coeff parse_number() {
    const char* begin = s_.data() + pos_;
    const char* end = s_.data() + s_.size();
    if constexpr (std::is_same_v<Coeff, double>) {
      double v = 0.0;
      auto res = std::from_chars(begin, end, v);
      if (res.ec != std::errc()) error("malformed number");
      pos_ += static_cast<std::size_t>(res.ptr - begin);
      return v;
    } else {
      std::size_t n = 0;
      while (begin + n != end && begin[n] >= '0' && begin[n] <= '9') ++n;
      if (n == 0) error("malformed integer");
      pos_ += n;
      return Coeff(std::string(begin, n));
    }
  }

  int parse_int() {
    skip_ws();
    const char* begin = s_.data() + pos_;
    int v = 0;
    auto res = std::from_chars(begin, s_.data() + s_.size(), v);
    if (res.ec != std::errc()) error("malformed index");
    pos_ += static_cast<std::size_t>(res.ptr - begin);
    return v;
  }

  std::pair<Variable, int> parse_variable() {
    const char name = s_[pos_++];
    std::vector<int> idx;
    while (!done() && peek() == '[') {
      ++pos_;
      idx.push_back(parse_int());
      skip_ws();
      if (done() || peek() != ']') error("expected ']'");
      ++pos_;
    }
    Variable v;
    switch (name) {
      case 'u':
        if (idx.size() > 1) error("u takes at most one index");
        v = Variable::u(idx.empty() ? 0 : idx[0]);
        break;
      case 'y':
        if (idx.size() > 2) error("y takes at most two indices");
        v = Variable::y(idx.empty() ? 0 : idx[0], idx.size() == 2 ? idx[1] : 1);
        if (v.component < 1) error("y component indices start at 1");
        break;
      case 'z':
      case 'x':
        if (idx.size() != 1) error(std::string(1, name) + " needs exactly one index");
        v = name == 'z' ? Variable::z(idx[0]) : Variable::x(idx[0]);
        if (v.index < 1) error("state indices start at 1");
        break;
      default: error("unknown variable");
    }
    if (v.index < 0) error("negative index");
    int k = 1;
    skip_ws();
    if (!done() && peek() == '^') {
      ++pos_;
      k = parse_int();
      if (k < 1) error("exponents must be positive");
    }
    return {v, k};
  }

  void skip_ws() {
    while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }
  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::ParseError, "line " + std::to_string(line_no_) + ", column " +
                                    std::to_string(pos_ + 1) + ": " + what + " in '" +
                                    std::string(s_) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_no_;
};

}  // namespace detail

/// Parses the textual form. Blank lines and `#` comments are ignored. Terms
/// keep their textual order; like monomials are not combined.
template <class Coeff>
Polynomial<Coeff> parse_polynomial(std::string_view text) {
  Polynomial<Coeff> out;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    ++line_no;
    detail::PolyParser<Coeff>(line, line_no).parse_into(out);
    start = end + 1;
  }
  return out;
}

}  // namespace encctl
