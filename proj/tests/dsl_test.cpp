#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "srbound/algorithms.hpp"
#include "srbound/dsl.hpp"

using namespace srb;
using namespace srb::dsl;

namespace {

// Span must point inside the source at the given text.
void expect_span_at(const std::string& src, const SourceSpan& s, const std::string& text) {
  std::size_t line = 1, pos = 0;
  while (line < s.line) {
    pos = src.find('\n', pos);
    ASSERT_NE(pos, std::string::npos);
    ++pos;
    ++line;
  }
  ASSERT_GE(s.column, 1u);
  const std::size_t at = pos + s.column - 1;
  ASSERT_LE(at + text.size(), src.size());
  EXPECT_EQ(src.substr(at, text.size()), text) << to_string(s);
}

std::vector<std::uint32_t> output_lengths(const Dag& dag) {
  std::vector<std::uint32_t> r;
  for (const auto& o : dag.outputs()) r.push_back(dag.node(o.node).length);
  return r;
}

bool same_structure(const Dag& a, const Dag& b) {
  if (a.size() != b.size()) return false;
  for (NodeId i = 0; i < a.size(); ++i) {
    const Node& x = a.node(i);
    const Node& y = b.node(i);
    if (x.kind != y.kind || x.exact != y.exact) return false;
    if (x.is_op() && (x.left != y.left || x.right != y.right)) return false;
  }
  return true;
}

const std::vector<std::string> corpus = {
    "let x = 1; output x;",
    "let x = -1.5; output x;",
    "let x = 1e-3; output x;",
    "let x = 2.5E+2; output x;",
    "let a = 1; let b = 2; let c = a + b; output c;",
    "let a = 1; let b = 2; let c = a - b - a; output c;",
    "let a = 1; let b = 2; let c = a - (b - 3); output c;",
    "let a = 1; let b = 2; let c = (a + b) * 3; output c;",
    "let a = 1; let b = 2; let c = a + b * 3; output c;",
    "let a = 1; let c = a * 2 * 3; output c;",
    "let a = 1; let c = a * (2 * 3); output c;",
    "let a = 1; let c = a + (2 + 3); output c;",
    "let v = [1, 2, 3]; let s = sum(v); output s;",
    "let v = [1, 2, 3, 4]; let s = pairwise(v); output s;",
    "let s = sum([1, -2, 3]); output s;",
    "let p = horner([1, 2, 3], 0.5); output p;",
    "let c = [1, 2, 3]; let x = 0.25; let p = horner(c, x); output p;",
    "let r = karatsuba([1, 2], [3, 4]); output r;",
    "let a = [1, 2, 3, 4]; let b = [5, 6, 7, 8]; let r = karatsuba(a, b); output r;",
    "let v = [1, 2]; let x = v[0] + v[1]; output x;",
    "let v = [1, 2]; let x = v[1] * 3; output x; output v;",
    "# comment\nlet x = 1; # trailing\noutput x;",
    "let x = 1;\n\n\nlet y = x + x;\noutput y;\noutput x;",
    "let a = 0.1; let b = 0.2; let c = 0.3; let s = (a + b) + c; output s;",
    "let a = 0.1; let b = 0.2; let c = 0.3; let s = a + (b + c); output s;",
    "let a = 1; let b = 2; let c = 3; let d = 4; let e = (a - b) * (c - d); output e;",
    "let a = 1; let b = 2; let c = (a - b) - (a + b); output c;",
    "let v = [0.5, 0.25]; let w = [1, 1]; let r = karatsuba(v, w); let s = sum(r); output s;",
    "let v = [1, 2, 3]; let s = pairwise(v); let t = s * 2; output t;",
    "let x = 1 - -2; output x;",
};

}  // namespace

TEST(Parse, SimpleProgram) {
  const Program p = parse("let x = 1 + 2;\noutput x;\n");
  ASSERT_EQ(p.statements.size(), 2u);
  const auto& let = std::get<Let>(p.statements[0]);
  EXPECT_EQ(let.name, "x");
  const auto& e = std::get<Expr>(let.rhs);
  const auto& bin = std::get<Binary>(e.node);
  EXPECT_EQ(bin.op, '+');
  EXPECT_EQ(bin.op_span.line, 1u);
  EXPECT_EQ(bin.op_span.column, 11u);
  EXPECT_EQ(std::get<Output>(p.statements[1]).name, "x");
}

TEST(Parse, Precedence) {
  const Program p = parse("let x = 1 + 2 * 3; output x;");
  const auto& e = std::get<Expr>(std::get<Let>(p.statements[0]).rhs);
  const auto& bin = std::get<Binary>(e.node);
  EXPECT_EQ(bin.op, '+');
  EXPECT_EQ(std::get<Binary>(bin.rhs->node).op, '*');
}

TEST(Parse, ExactDecimals) {
  const Dag d = compile("let x = 0.1; output x;");
  EXPECT_EQ(d.node(0).exact, Rational(1, 10));
  const Dag e = compile("let x = -2.5e-3; output x;");
  EXPECT_EQ(e.node(0).exact, Rational(-1, 400));
}

TEST(Parse, Errors) {
  const std::string src = "let x = ;\noutput x;";
  try {
    parse(src);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.span().line, 1u);
    EXPECT_EQ(e.span().column, 9u);
    EXPECT_FALSE(e.expected().empty());
  }
  EXPECT_THROW(parse("let x = 1"), ParseError);
  EXPECT_THROW(parse("let x = 1;"), ParseError);  // no output
  EXPECT_THROW(parse("let x = foo(1); output x;"), ParseError);
  EXPECT_THROW(parse("let x = [1, ]; output x;"), ParseError);
  EXPECT_THROW(parse("let x = 1 $ 2; output x;"), ParseError);
  try {
    parse("let x = 1;\nlet y = x +;\noutput y;");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.span().line, 2u);
    EXPECT_EQ(e.span().column, 12u);
  }
}

TEST(Parse, RoundTripFixedPoint) {
  ASSERT_EQ(corpus.size(), 30u);
  for (const auto& src : corpus) {
    const Program p = parse(src);
    const std::string once = pretty(p);
    const Program q = parse(once);
    EXPECT_TRUE(same(p, q)) << src << "\n--\n" << once;
    EXPECT_EQ(pretty(q), once) << src;
  }
}

TEST(Parse, PrettyKeepsNeededParentheses) {
  const std::string once = pretty(parse("let a = 1; let c = a - (2 - 3) * (a + 1); output c;"));
  EXPECT_NE(once.find("a - (2 - 3) * (a + 1)"), std::string::npos) << once;
  const std::string flat = pretty(parse("let a = 1; let c = ((a + 1)) + 2; output c;"));
  EXPECT_NE(flat.find("a + 1 + 2"), std::string::npos) << flat;
}

TEST(Parse, CorpusCompiles) {
  for (const auto& src : corpus) EXPECT_NO_THROW(compile(src)) << src;
}

TEST(Lower, SelfProductIsFine) {
  const Dag d = compile("let a = 3; let s = a * a; output s;");
  EXPECT_EQ(output_lengths(d), (std::vector<std::uint32_t>{1}));
}

TEST(Lower, KaratsubaBuiltinLengths) {
  const Dag d = compile("let r = karatsuba([1, 2], [3, 4]); output r;");
  EXPECT_EQ(output_lengths(d), (std::vector<std::uint32_t>{1, 4, 1}));
  ASSERT_EQ(d.outputs().size(), 3u);
  EXPECT_EQ(d.outputs()[1].name, "r[1]");
  EXPECT_EQ(d.node(d.outputs()[1].node).exact, 10);
}

TEST(Lower, BuiltinsMatchGenerators) {
  const std::vector<Rational> v{Rational(1), Rational(2), Rational(3), Rational(4), Rational(5)};
  EXPECT_TRUE(same_structure(compile("let s = sum([1, 2, 3, 4, 5]); output s;"), recursive_sum_dag(v).dag));
  EXPECT_TRUE(same_structure(compile("let s = pairwise([1, 2, 3, 4, 5]); output s;"), tree_sum_dag(v).dag));
  EXPECT_TRUE(same_structure(compile("let p = horner([1, 2, 3, 4, 5], 0.5); output p;"),
                             horner_dag(v, Rational(1, 2)).dag));
  const std::vector<Rational> a{Rational(1), Rational(2), Rational(3), Rational(4)};
  const std::vector<Rational> b{Rational(5), Rational(6), Rational(7), Rational(8)};
  EXPECT_TRUE(same_structure(compile("let r = karatsuba([1, 2, 3, 4], [5, 6, 7, 8]); output r;"),
                             karatsuba_dag(a, b).dag));
}

TEST(Lower, BiasedMultiplicationPointsAtOperator) {
  const std::string src = "let a = 1;\nlet b = 2;\nlet t = a + b;\nlet s = t * t;\noutput s;";
  try {
    compile(src);
    FAIL();
  } catch (const BiasedMultiplicationAt& e) {
    EXPECT_EQ(e.span().line, 4u);
    expect_span_at(src, e.span(), "*");
  }
  const std::string deep = "let a = 1;\nlet t = a + 2;\nlet u = t + 1;\nlet w = t - 3;\nlet s = u * w;\noutput s;";
  try {
    compile(deep);
    FAIL();
  } catch (const BiasedMultiplicationAt& e) {
    EXPECT_EQ(e.span().line, 5u);
    expect_span_at(deep, e.span(), "*");
  }
}

TEST(Lower, BiasedKaratsubaPointsAtCall) {
  const std::string src = "let t = 1 + 2;\nlet r = karatsuba([t, 1], [t, 2]);\noutput r;";
  try {
    compile(src);
    FAIL();
  } catch (const BiasedMultiplicationAt& e) {
    expect_span_at(src, e.span(), "karatsuba");
  }
}

TEST(Lower, Errors) {
  {
    const std::string src = "let x = 1;\noutput y;";
    try {
      compile(src);
      FAIL();
    } catch (const UndefinedIdentifier& e) {
      expect_span_at(src, e.span(), "y");
    }
  }
  {
    const std::string src = "let x = 1 + z; output x;";
    try {
      compile(src);
      FAIL();
    } catch (const UndefinedIdentifier& e) {
      expect_span_at(src, e.span(), "z");
    }
  }
  {
    const std::string src = "let r = karatsuba([1, 2]); output r;";
    try {
      compile(src);
      FAIL();
    } catch (const ArityError& e) {
      expect_span_at(src, e.span(), "karatsuba");
    }
  }
  {
    const std::string src = "let r = karatsuba([1, 2], [1, 2, 3]); output r;";
    EXPECT_THROW(compile(src), ArityError);
  }
  {
    const std::string src = "let x = 1 / 3; output x;";
    try {
      compile(src);
      FAIL();
    } catch (const DivisionUnsupported& e) {
      expect_span_at(src, e.span(), "/");
    }
  }
  {
    const std::string src = "let x = 1;\nlet x = 2;\noutput x;";
    try {
      compile(src);
      FAIL();
    } catch (const Redefinition& e) {
      expect_span_at(src, e.span(), "x");
      EXPECT_EQ(e.span().line, 2u);
    }
  }
  EXPECT_THROW(compile("let v = [1, 2]; let x = v + 1; output x;"), TypeMismatch);
  EXPECT_THROW(compile("let v = 1; let x = v[0]; output x;"), TypeMismatch);
  EXPECT_THROW(compile("let v = [1, 2]; let x = v[2]; output x;"), TypeMismatch);
  EXPECT_THROW(compile("let x = sum(1); output x;"), TypeMismatch);
}

TEST(Lower, ErrorsAreErrors) {
  EXPECT_THROW(compile("let x = 1 / 3; output x;"), Error);
  EXPECT_THROW(compile("let t = 1 + 2; let s = t * t; output s;"), BiasedMultiplication);
}
