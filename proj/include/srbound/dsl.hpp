#pragma once

// A small language for writing sum/product computations (.srd files).
//
//   program := { stmt }
//   stmt    := "let" ident "=" rhs ";" | "output" ident ";"
//   rhs     := expr | vector | call
//   vector  := "[" expr { "," expr } "]"
//   call    := ("sum" | "pairwise" | "horner" | "karatsuba") "(" args ")"
//   expr    := term { ("+" | "-") term }
//   term    := factor { "*" factor }
//   factor  := number | ident | ident "[" int "]" | "(" expr ")"
//
// Numbers are exact decimal rationals and may carry a sign. `#` starts a
// comment. `/` is tokenized so that lowering can reject it by name.

#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "srbound/algorithms.hpp"
#include "srbound/dag.hpp"
#include "srbound/errors.hpp"
#include "srbound/rational.hpp"

namespace srb::dsl {

struct SourceSpan {
  std::uint32_t line = 1;
  std::uint32_t column = 1;
  std::uint32_t length = 0;
};

inline std::string to_string(const SourceSpan& s) {
  return std::to_string(s.line) + ":" + std::to_string(s.column);
}

// Mixin carried by every error that points into the source text.
class Located {
 public:
  explicit Located(SourceSpan span) : span_(span) {}
  virtual ~Located() = default;
  const SourceSpan& span() const noexcept { return span_; }

 private:
  SourceSpan span_;
};

class DslError : public Error, public Located {
 public:
  DslError(SourceSpan span, const std::string& what) : Error(to_string(span) + ": " + what), Located(span) {}
};

class ParseError : public DslError {
 public:
  ParseError(SourceSpan span, std::vector<std::string> expected, const std::string& found)
      : DslError(span, message(expected, found)), expected_(std::move(expected)) {}
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  static std::string message(const std::vector<std::string>& expected, const std::string& found) {
    std::string m = "expected ";
    if (expected.size() > 1) m += "one of ";
    for (std::size_t i = 0; i < expected.size(); ++i) m += (i ? ", " : "") + expected[i];
    return m + ", found " + found;
  }
  std::vector<std::string> expected_;
};

class UndefinedIdentifier : public DslError {
 public:
  UndefinedIdentifier(SourceSpan span, const std::string& name)
      : DslError(span, "undefined identifier '" + name + "'") {}
};

class Redefinition : public DslError {
 public:
  Redefinition(SourceSpan span, const std::string& name)
      : DslError(span, "'" + name + "' is already defined") {}
};

class TypeMismatch : public DslError {
 public:
  using DslError::DslError;
};

class ArityError : public DslError {
 public:
  using DslError::DslError;
};

class DivisionUnsupported : public DslError {
 public:
  explicit DivisionUnsupported(SourceSpan span)
      : DslError(span, "division is not supported: the error analysis covers +, - and * only") {}
};

class BiasedMultiplicationAt : public BiasedMultiplication, public Located {
 public:
  BiasedMultiplicationAt(const BiasedMultiplication& e, SourceSpan span)
      : BiasedMultiplication(e.left(), e.right(), e.witness(), to_string(span)), Located(span) {}
};

// ---- tokens ---------------------------------------------------------------

enum class Tok {
  ident, number, kw_let, kw_output,
  lbracket, rbracket, lparen, rparen, comma, semicolon, equals,
  plus, minus, star, slash, end
};

inline std::string describe(Tok t) {
  switch (t) {
    case Tok::ident: return "identifier";
    case Tok::number: return "number";
    case Tok::kw_let: return "'let'";
    case Tok::kw_output: return "'output'";
    case Tok::lbracket: return "'['";
    case Tok::rbracket: return "']'";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::comma: return "','";
    case Tok::semicolon: return "';'";
    case Tok::equals: return "'='";
    case Tok::plus: return "'+'";
    case Tok::minus: return "'-'";
    case Tok::star: return "'*'";
    case Tok::slash: return "'/'";
    case Tok::end: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::uint32_t line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto digit = [&](std::size_t k) { return k < src.size() && std::isdigit(static_cast<unsigned char>(src[k])); };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const SourceSpan start{line, col, 0};
    std::size_t j = i;
    Tok kind;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      const auto word = src.substr(i, j - i);
      kind = word == "let" ? Tok::kw_let : word == "output" ? Tok::kw_output : Tok::ident;
    } else if (digit(i) || (c == '.' && digit(i + 1))) {
      while (digit(j)) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (digit(j)) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (digit(k)) {
          j = k;
          while (digit(j)) ++j;
        }
      }
      kind = Tok::number;
    } else {
      ++j;
      switch (c) {
        case '[': kind = Tok::lbracket; break;
        case ']': kind = Tok::rbracket; break;
        case '(': kind = Tok::lparen; break;
        case ')': kind = Tok::rparen; break;
        case ',': kind = Tok::comma; break;
        case ';': kind = Tok::semicolon; break;
        case '=': kind = Tok::equals; break;
        case '+': kind = Tok::plus; break;
        case '-': kind = Tok::minus; break;
        case '*': kind = Tok::star; break;
        case '/': kind = Tok::slash; break;
        default:
          throw ParseError({line, col, 1}, {"a token"}, "unexpected character '" + std::string(1, c) + "'");
      }
    }
    Token t{kind, std::string(src.substr(i, j - i)), start};
    t.span.length = static_cast<std::uint32_t>(j - i);
    advance(j - i);
    out.push_back(std::move(t));
  }
  out.push_back({Tok::end, "", {line, col, 0}});
  return out;
}

// ---- AST ------------------------------------------------------------------

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Number {
  Rational value;
  std::string text;
};

struct Ident {
  std::string name;
};

struct Index {
  std::string name;
  std::uint32_t index;
};

struct Binary {
  char op;  // '+', '-', '*' or '/'
  SourceSpan op_span;
  ExprPtr lhs, rhs;
};

struct Expr {
  std::variant<Number, Ident, Index, Binary> node;
  SourceSpan span;
};

struct VectorLit {
  std::vector<Expr> items;
  SourceSpan span;
};

using Arg = std::variant<Expr, VectorLit>;

struct Call {
  std::string name;
  std::vector<Arg> args;
  SourceSpan span;
};

using Rhs = std::variant<Expr, VectorLit, Call>;

struct Let {
  std::string name;
  SourceSpan name_span;
  Rhs rhs;
};

struct Output {
  std::string name;
  SourceSpan name_span;
};

using Stmt = std::variant<Let, Output>;

struct Program {
  std::vector<Stmt> statements;
};

// Structural equality, ignoring source positions and literal spelling.
inline bool same(const Expr& a, const Expr& b);

inline bool same(const VectorLit& a, const VectorLit& b) {
  if (a.items.size() != b.items.size()) return false;
  for (std::size_t i = 0; i < a.items.size(); ++i)
    if (!same(a.items[i], b.items[i])) return false;
  return true;
}

inline bool same(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Number>) return x.value == y.value;
        if constexpr (std::is_same_v<T, Ident>) return x.name == y.name;
        if constexpr (std::is_same_v<T, Index>) return x.name == y.name && x.index == y.index;
        if constexpr (std::is_same_v<T, Binary>) return x.op == y.op && same(*x.lhs, *y.lhs) && same(*x.rhs, *y.rhs);
        return false;
      },
      a.node);
}

inline bool same(const Arg& a, const Arg& b) {
  if (a.index() != b.index()) return false;
  if (a.index() == 0) return same(std::get<Expr>(a), std::get<Expr>(b));
  return same(std::get<VectorLit>(a), std::get<VectorLit>(b));
}

inline bool same(const Program& a, const Program& b) {
  if (a.statements.size() != b.statements.size()) return false;
  for (std::size_t i = 0; i < a.statements.size(); ++i) {
    const Stmt& s = a.statements[i];
    const Stmt& t = b.statements[i];
    if (s.index() != t.index()) return false;
    if (const auto* o = std::get_if<Output>(&s)) {
      if (o->name != std::get<Output>(t).name) return false;
      continue;
    }
    const Let& l = std::get<Let>(s);
    const Let& m = std::get<Let>(t);
    if (l.name != m.name || l.rhs.index() != m.rhs.index()) return false;
    bool eq = std::visit(
        [&](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          const auto& y = std::get<T>(m.rhs);
          if constexpr (std::is_same_v<T, Call>) {
            if (x.name != y.name || x.args.size() != y.args.size()) return false;
            for (std::size_t k = 0; k < x.args.size(); ++k)
              if (!same(x.args[k], y.args[k])) return false;
            return true;
          } else {
            return same(x, y);
          }
        },
        l.rhs);
    if (!eq) return false;
  }
  return true;
}

// ---- parser ---------------------------------------------------------------

inline bool is_builtin(std::string_view name) {
  return name == "sum" || name == "pairwise" || name == "horner" || name == "karatsuba";
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  Program parse_program() {
    Program p;
    bool has_output = false;
    while (peek().kind != Tok::end) {
      if (accept(Tok::kw_let)) {
        const Token& name = expect(Tok::ident);
        expect(Tok::equals);
        Rhs rhs = parse_rhs();
        expect(Tok::semicolon);
        p.statements.emplace_back(Let{name.text, name.span, std::move(rhs)});
      } else if (accept(Tok::kw_output)) {
        const Token& name = expect(Tok::ident);
        expect(Tok::semicolon);
        p.statements.emplace_back(Output{name.text, name.span});
        has_output = true;
      } else {
        fail({"'let'", "'output'"});
      }
    }
    if (!has_output) fail({"'output'"});
    return p;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }

  bool accept(Tok t) {
    if (peek().kind != t) return false;
    ++pos_;
    return true;
  }

  const Token& expect(Tok t) {
    if (peek().kind != t) fail({describe(t)});
    return toks_[pos_++];
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    const std::string found = t.kind == Tok::end ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.span, std::move(expected), found);
  }

  static SourceSpan cover(SourceSpan a, const SourceSpan& b) {
    if (b.line == a.line) a.length = b.column + b.length - a.column;
    return a;
  }

  Rhs parse_rhs() {
    if (peek().kind == Tok::lbracket) return parse_vector();
    if (peek().kind == Tok::ident && peek(1).kind == Tok::lparen) {
      const Token& name = toks_[pos_];
      if (!is_builtin(name.text)) {
        ++pos_;
        fail({"'sum'", "'pairwise'", "'horner'", "'karatsuba'"});
      }
      pos_ += 2;
      Call call{name.text, {}, name.span};
      if (peek().kind != Tok::rparen) {
        do {
          if (peek().kind == Tok::lbracket)
            call.args.emplace_back(parse_vector());
          else
            call.args.emplace_back(parse_expr());
        } while (accept(Tok::comma));
      }
      call.span = cover(call.span, expect(Tok::rparen).span);
      return call;
    }
    return parse_expr();
  }

  VectorLit parse_vector() {
    VectorLit v;
    v.span = expect(Tok::lbracket).span;
    do v.items.push_back(parse_expr());
    while (accept(Tok::comma));
    v.span = cover(v.span, expect(Tok::rbracket).span);
    return v;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      const Token& op = toks_[pos_++];
      Expr rhs = parse_term();
      lhs = binary(op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    while (peek().kind == Tok::star || peek().kind == Tok::slash) {
      const Token& op = toks_[pos_++];
      Expr rhs = parse_factor();
      lhs = binary(op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  static Expr binary(const Token& op, Expr lhs, Expr rhs) {
    const SourceSpan span = cover(lhs.span, rhs.span);
    return Expr{Binary{op.text[0], op.span, std::make_unique<Expr>(std::move(lhs)),
                       std::make_unique<Expr>(std::move(rhs))},
                span};
  }

  Expr parse_factor() {
    const Token& t = peek();
    if (t.kind == Tok::plus || t.kind == Tok::minus) {
      if (peek(1).kind != Tok::number) {
        ++pos_;
        fail({"number"});
      }
      const Token& num = toks_[pos_ + 1];
      pos_ += 2;
      return number(t.text + num.text, cover(t.span, num.span));
    }
    if (t.kind == Tok::number) {
      ++pos_;
      return number(t.text, t.span);
    }
    if (t.kind == Tok::ident) {
      ++pos_;
      if (accept(Tok::lbracket)) {
        const Token& idx = expect(Tok::number);
        if (idx.text.find_first_not_of("0123456789") != std::string::npos || idx.text.size() > 9)
          throw ParseError(idx.span, {"non-negative integer index"}, "'" + idx.text + "'");
        const Token& close = expect(Tok::rbracket);
        return Expr{Index{t.text, static_cast<std::uint32_t>(std::stoul(idx.text))}, cover(t.span, close.span)};
      }
      return Expr{Ident{t.text}, t.span};
    }
    if (t.kind == Tok::lparen) {
      ++pos_;
      Expr e = parse_expr();
      const Token& close = expect(Tok::rparen);
      e.span = cover(t.span, close.span);
      return e;
    }
    fail({"number", "identifier", "'('"});
  }

  static Expr number(const std::string& text, SourceSpan span) {
    auto v = parse_decimal(text);
    if (!v) throw ParseError(span, {"number"}, "'" + text + "'");
    return Expr{Number{*v, text}, span};
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline Program parse(std::string_view src) { return Parser(src).parse_program(); }

// ---- pretty printer -------------------------------------------------------

namespace detail {

inline int precedence(const Expr& e) {
  if (const auto* b = std::get_if<Binary>(&e.node)) return b->op == '+' || b->op == '-' ? 1 : 2;
  return 3;
}

inline void print(std::ostream& os, const Expr& e) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Number>) {
          os << x.text;
        } else if constexpr (std::is_same_v<T, Ident>) {
          os << x.name;
        } else if constexpr (std::is_same_v<T, Index>) {
          os << x.name << '[' << x.index << ']';
        } else {
          const int p = precedence(e);
          const bool lp = precedence(*x.lhs) < p;
          const bool rp = precedence(*x.rhs) <= p;
          if (lp) os << '(';
          print(os, *x.lhs);
          if (lp) os << ')';
          os << ' ' << x.op << ' ';
          if (rp) os << '(';
          print(os, *x.rhs);
          if (rp) os << ')';
        }
      },
      e.node);
}

inline void print(std::ostream& os, const VectorLit& v) {
  os << '[';
  for (std::size_t i = 0; i < v.items.size(); ++i) {
    if (i) os << ", ";
    print(os, v.items[i]);
  }
  os << ']';
}

}  // namespace detail

inline std::string pretty(const Program& p) {
  std::ostringstream os;
  for (const Stmt& s : p.statements) {
    if (const auto* o = std::get_if<Output>(&s)) {
      os << "output " << o->name << ";\n";
      continue;
    }
    const Let& l = std::get<Let>(s);
    os << "let " << l.name << " = ";
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Call>) {
            os << x.name << '(';
            for (std::size_t k = 0; k < x.args.size(); ++k) {
              if (k) os << ", ";
              std::visit([&](const auto& a) { detail::print(os, a); }, x.args[k]);
            }
            os << ')';
          } else {
            detail::print(os, x);
          }
        },
        l.rhs);
    os << ";\n";
  }
  return os.str();
}

// ---- lowering -------------------------------------------------------------

class Lowering {
 public:
  Dag run(const Program& p) && {
    for (const Stmt& s : p.statements) {
      if (const auto* l = std::get_if<Let>(&s))
        let(*l);
      else
        output(std::get<Output>(s));
    }
    Dag dag = std::move(b_).build();
    const auto violations = validate_martingale_inducing(dag);
    if (!violations.empty()) {
      const Violation& v = violations.front();
      const Node& n = dag.node(v.mul);
      throw BiasedMultiplicationAt(BiasedMultiplication(n.left, n.right, v.shared), span_of(v.mul));
    }
    return dag;
  }

 private:
  using Value = std::variant<NodeId, std::vector<NodeId>>;

  struct CallRange {
    NodeId first, last;  // [first, last)
    SourceSpan span;
  };

  SourceSpan span_of(NodeId mul) const {
    if (auto it = mul_spans_.find(mul); it != mul_spans_.end()) return it->second;
    for (const auto& r : calls_)
      if (mul >= r.first && mul < r.last) return r.span;
    return {};
  }

  void let(const Let& l) {
    if (symbols_.contains(l.name)) throw Redefinition(l.name_span, l.name);
    Value v = std::visit(
        [&](const auto& x) -> Value {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Expr>) return scalar(x);
          if constexpr (std::is_same_v<T, VectorLit>) return vector(x);
          if constexpr (std::is_same_v<T, Call>) return call(x);
        },
        l.rhs);
    symbols_.emplace(l.name, std::move(v));
  }

  void output(const Output& o) {
    auto it = symbols_.find(o.name);
    if (it == symbols_.end()) throw UndefinedIdentifier(o.name_span, o.name);
    if (const auto* id = std::get_if<NodeId>(&it->second)) {
      b_.output(o.name, *id);
      return;
    }
    const auto& ids = std::get<std::vector<NodeId>>(it->second);
    for (std::size_t i = 0; i < ids.size(); ++i) b_.output(o.name + "[" + std::to_string(i) + "]", ids[i]);
  }

  const Value& lookup(const std::string& name, const SourceSpan& span) const {
    auto it = symbols_.find(name);
    if (it == symbols_.end()) throw UndefinedIdentifier(span, name);
    return it->second;
  }

  NodeId scalar(const Expr& e) {
    return std::visit(
        [&](const auto& x) -> NodeId {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Number>) {
            return b_.input(x.value);
          } else if constexpr (std::is_same_v<T, Ident>) {
            const Value& v = lookup(x.name, e.span);
            if (const auto* id = std::get_if<NodeId>(&v)) return *id;
            throw TypeMismatch(e.span, "'" + x.name + "' is a vector; index it or pass it to a builtin");
          } else if constexpr (std::is_same_v<T, Index>) {
            const Value& v = lookup(x.name, e.span);
            const auto* ids = std::get_if<std::vector<NodeId>>(&v);
            if (!ids) throw TypeMismatch(e.span, "'" + x.name + "' is a scalar and cannot be indexed");
            if (x.index >= ids->size())
              throw TypeMismatch(e.span, "index " + std::to_string(x.index) + " out of range for '" + x.name +
                                             "' of length " + std::to_string(ids->size()));
            return (*ids)[x.index];
          } else {
            if (x.op == '/') throw DivisionUnsupported(x.op_span);
            const NodeId l = scalar(*x.lhs);
            const NodeId r = scalar(*x.rhs);
            if (x.op == '+') return b_.add(l, r);
            if (x.op == '-') return b_.sub(l, r);
            const NodeId id = b_.mul(l, r);
            mul_spans_.emplace(id, x.op_span);
            return id;
          }
        },
        e.node);
  }

  std::vector<NodeId> vector(const VectorLit& v) {
    std::vector<NodeId> ids;
    ids.reserve(v.items.size());
    for (const Expr& e : v.items) ids.push_back(scalar(e));
    return ids;
  }

  std::vector<NodeId> vector_arg(const Arg& a, const Call& c) {
    if (const auto* v = std::get_if<VectorLit>(&a)) return vector(*v);
    const Expr& e = std::get<Expr>(a);
    if (const auto* id = std::get_if<Ident>(&e.node)) {
      const Value& v = lookup(id->name, e.span);
      if (const auto* ids = std::get_if<std::vector<NodeId>>(&v)) return *ids;
    }
    throw TypeMismatch(e.span, c.name + " expects a vector argument here");
  }

  NodeId scalar_arg(const Arg& a, const Call& c) {
    if (const auto* v = std::get_if<VectorLit>(&a)) throw TypeMismatch(v->span, c.name + " expects a scalar argument here");
    return scalar(std::get<Expr>(a));
  }

  Value call(const Call& c) {
    const std::size_t want = c.name == "horner" || c.name == "karatsuba" ? 2 : 1;
    if (c.args.size() != want)
      throw ArityError(c.span, c.name + " takes " + std::to_string(want) + " argument" + (want > 1 ? "s" : "") +
                                   ", got " + std::to_string(c.args.size()));
    // Operands are lowered before the builtin expands.
    std::vector<NodeId> first = vector_arg(c.args[0], c);
    std::optional<NodeId> x;
    std::vector<NodeId> second;
    if (c.name == "horner") x = scalar_arg(c.args[1], c);
    if (c.name == "karatsuba") second = vector_arg(c.args[1], c);

    const NodeId begin = static_cast<NodeId>(b_.size());
    Value result;
    try {
      if (c.name == "sum")
        result = recursive_sum(b_, first);
      else if (c.name == "pairwise")
        result = tree_sum(b_, first);
      else if (c.name == "horner")
        result = horner(b_, first, *x);
      else
        result = karatsuba(b_, Polynomial{first}, Polynomial{second}).coeffs;
    } catch (const BiasedMultiplication& e) {
      throw BiasedMultiplicationAt(e, c.span);
    } catch (const ShapeMismatch& e) {
      throw ArityError(c.span, e.what());
    }
    calls_.push_back({begin, static_cast<NodeId>(b_.size()), c.span});
    return result;
  }

  DagBuilder b_{MulCheck::deferred};
  std::map<std::string, Value, std::less<>> symbols_;
  std::map<NodeId, SourceSpan> mul_spans_;
  std::vector<CallRange> calls_;
};

// Lower a parsed program to a DAG whose outputs are the program's outputs
// (vector outputs expand to name[0], name[1], ...).
inline Dag lower(const Program& p) { return Lowering{}.run(p); }

inline Dag compile(std::string_view src) { return lower(parse(src)); }

}  // namespace srb::dsl
