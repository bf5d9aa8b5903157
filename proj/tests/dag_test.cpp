#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <set>
#include <vector>

#include "srbound/bounds.hpp"
#include "srbound/dag.hpp"
#include "srbound/random.hpp"

namespace srb {
namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

TEST(DagInput, BaseCase) {
  DagBuilder b;
  const NodeId a = b.input(q(3, 2));
  const NodeId z = b.input(q(0));
  const NodeId c = b.input(q(-7, 5));
  EXPECT_EQ(b.node(a).length, 0u);
  EXPECT_EQ(*b.node(a).condition, 1);
  EXPECT_EQ(b.node(z).exact, 0);
  EXPECT_EQ(*b.node(z).condition, 1);
  EXPECT_EQ(b.node(c).exact, q(-7, 5));
  const Dag dag = std::move(b).build();
  EXPECT_TRUE(dag.error_set(a).empty());
}

TEST(DagAdd, ConditionAndLength) {
  DagBuilder b;
  const NodeId s = b.add(b.input(q(3)), b.input(q(1)));
  EXPECT_EQ(b.node(s).length, 1u);
  EXPECT_EQ(*b.node(s).condition, 1);

  // (|1| + |-3/4|) / |1/4| = 7
  const NodeId c = b.add(b.input(q(1)), b.input(q(-3, 4)));
  EXPECT_EQ(b.node(c).exact, q(1, 4));
  EXPECT_EQ(*b.node(c).condition, 7);

  // Doubling a node keeps its condition bound.
  const NodeId d = b.add(c, c);
  EXPECT_EQ(b.node(d).length, 2u);
  EXPECT_EQ(*b.node(d).condition, 7);
}

TEST(DagSub, MirrorsAddWithNegatedOperand) {
  DagBuilder b;
  const NodeId c = b.sub(b.input(q(1)), b.input(q(3, 4)));
  EXPECT_EQ(b.node(c).kind, NodeKind::sub);
  EXPECT_EQ(b.node(c).exact, q(1, 4));
  EXPECT_EQ(*b.node(c).condition, 7);
  EXPECT_EQ(b.node(c).length, 1u);
}

TEST(DagAdd, ZeroResultLeavesConditionUndefined) {
  DagBuilder b;
  const NodeId one = b.input(q(1));
  const NodeId z = b.add(one, b.input(q(-1)));
  EXPECT_FALSE(b.node(z).condition.has_value());
  const NodeId w = b.add(z, b.input(q(5)));
  EXPECT_FALSE(b.node(w).condition.has_value());
  EXPECT_EQ(b.node(w).length, 2u);
  const NodeId m = b.mul(w, b.input(q(2)));
  EXPECT_FALSE(b.node(m).condition.has_value());
  EXPECT_EQ(b.node(m).length, 3u);
  const Dag dag = std::move(b).build();
  EXPECT_THROW(analyze(dag, w, FpFormat(24)), ConditionUndefined);
  EXPECT_NO_THROW(analyze(dag, one, FpFormat(24)));
}

TEST(DagMul, LengthAddsAndConditionMultiplies) {
  DagBuilder b;
  const NodeId a0 = b.input(q(2));
  const NodeId x = b.input(q(1, 3));
  const NodeId p = b.mul(a0, x);
  EXPECT_EQ(b.node(p).length, 1u);
  EXPECT_EQ(*b.node(p).condition, 1);

  const NodeId s = b.add(p, b.input(q(-1, 2)));  // K = (2/3 + 1/2) / (1/6) = 7
  EXPECT_EQ(*b.node(s).condition, 7);
  const NodeId t = b.mul(s, x);  // multiplying by an input keeps K
  EXPECT_EQ(*b.node(t).condition, 7);
  EXPECT_EQ(b.node(t).length, 3u);

  const NodeId u = b.mul(s, b.add(b.input(q(1)), b.input(q(-3, 4))));
  EXPECT_EQ(*b.node(u).condition, 49);
  EXPECT_EQ(b.node(u).length, 4u);
}

TEST(DagMul, SharedErrorIsRejected) {
  DagBuilder b;
  const NodeId t = b.add(b.input(q(1)), b.input(q(2)));
  try {
    b.mul(t, t);
    FAIL() << "expected BiasedMultiplication";
  } catch (const BiasedMultiplication& e) {
    EXPECT_EQ(e.witness(), t);
  }
  // Inputs carry no error, so squaring one is fine.
  const NodeId a = b.input(q(3));
  EXPECT_NO_THROW(b.mul(a, a));
}

TEST(DagMul, DeepSharedAncestorIsFound) {
  DagBuilder b(MulCheck::deferred);
  const NodeId x = b.input(q(1)), y = b.input(q(2)), z = b.input(q(3));
  const NodeId shared = b.add(x, y);
  const NodeId l = b.add(b.add(shared, z), z);
  const NodeId r = b.mul(b.add(shared, x), y);
  EXPECT_EQ(b.shared_error(l, r), shared);
  const NodeId m = b.mul(l, r);
  const Dag dag = std::move(b).build();
  const auto v = validate_martingale_inducing(dag);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], (Violation{m, shared}));
}

TEST(Validate, Examples) {
  {
    DagBuilder b(MulCheck::deferred);
    const NodeId t = b.add(b.input(q(1)), b.input(q(2)));
    const NodeId m = b.mul(t, t);
    const auto v = validate_martingale_inducing(std::move(b).build());
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].mul, m);
    EXPECT_EQ(v[0].shared, t);
  }
  {
    DagBuilder b(MulCheck::deferred);
    const NodeId x = b.input(q(5));
    b.mul(x, x);
    EXPECT_TRUE(validate_martingale_inducing(std::move(b).build()).empty());
  }
}

TEST(DagBuilder, RejectsUnknownIds) {
  DagBuilder b;
  EXPECT_THROW(b.add(0, 1), std::out_of_range);
  b.input(q(1));
  EXPECT_THROW(b.mul(0, 3), std::out_of_range);
  EXPECT_THROW(b.output("x", 9), std::out_of_range);
}

// ---- random DAG properties ------------------------------------------------

Dag random_dag(std::uint64_t seed, std::size_t size, bool positive_sum_product_only = false) {
  SplitMix64 g(seed);
  DagBuilder b(MulCheck::deferred);
  const std::size_t inputs = 2 + g() % 8;
  for (std::size_t i = 0; i < inputs && i < size; ++i) {
    long num = static_cast<long>(g() % 2000) + 1;
    if (!positive_sum_product_only && (g() & 1)) num = -num;
    b.input(q(num, 1L << (g() % 12)));
  }
  while (b.size() < size) {
    const NodeId x = static_cast<NodeId>(g() % b.size());
    const NodeId y = static_cast<NodeId>(g() % b.size());
    const unsigned k = static_cast<unsigned>(g() % (positive_sum_product_only ? 2 : 3));
    const NodeKind kind = k == 0 ? NodeKind::add : k == 1 ? NodeKind::mul : NodeKind::sub;
    // Keep exact values bounded in size: avoid multiplying two deep nodes.
    if (kind == NodeKind::mul && b.node(x).length + b.node(y).length > 12) continue;
    b.apply(kind, x, y);
  }
  return std::move(b).build();
}

// Reference recursion written against the node structure only.
struct Reference {
  const Dag& dag;
  std::map<NodeId, std::uint32_t> len;
  std::map<NodeId, std::optional<Rational>> cond;
  std::map<NodeId, Rational> val;

  std::uint32_t length(NodeId id) {
    if (auto it = len.find(id); it != len.end()) return it->second;
    const Node& n = dag.node(id);
    std::uint32_t r = 0;
    if (n.kind == NodeKind::add || n.kind == NodeKind::sub)
      r = 1 + std::max(length(n.left), length(n.right));
    else if (n.kind == NodeKind::mul)
      r = 1 + length(n.left) + length(n.right);
    return len[id] = r;
  }

  Rational value(NodeId id) {
    if (auto it = val.find(id); it != val.end()) return it->second;
    const Node& n = dag.node(id);
    Rational r = n.exact;
    if (n.kind == NodeKind::add) r = value(n.left) + value(n.right);
    if (n.kind == NodeKind::sub) r = value(n.left) - value(n.right);
    if (n.kind == NodeKind::mul) r = value(n.left) * value(n.right);
    return val[id] = r;
  }

  std::optional<Rational> condition(NodeId id) {
    if (auto it = cond.find(id); it != cond.end()) return it->second;
    const Node& n = dag.node(id);
    std::optional<Rational> r;
    if (n.kind == NodeKind::input) {
      r = Rational(1);
    } else {
      auto kl = condition(n.left), kr = condition(n.right);
      if (kl && kr) {
        if (n.kind == NodeKind::mul) {
          r = *kl * *kr;
        } else {
          const Rational z = value(id);
          if (z != 0) r = (abs(value(n.left)) * *kl + abs(value(n.right)) * *kr) / abs(z);
        }
      }
    }
    return cond[id] = r;
  }
};

// err_set by transitive closure over a boolean reachability matrix.
std::vector<std::set<NodeId>> brute_force_error_sets(const Dag& dag) {
  const std::size_t n = dag.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (NodeId i = 0; i < n; ++i) {
    reach[i][i] = true;
    const Node& nd = dag.node(i);
    if (nd.is_op()) reach[i][nd.left] = reach[i][nd.right] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = true;
  std::vector<std::set<NodeId>> out(n);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j)
      if (reach[i][j] && dag.node(j).is_op()) out[i].insert(j);
  return out;
}

TEST(DagProperties, LengthAndConditionMatchReference) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Dag dag = random_dag(seed, 20 + seed * 6);
    Reference ref{dag, {}, {}, {}};
    for (NodeId id = 0; id < dag.size(); ++id) {
      ASSERT_EQ(dag.node(id).length, ref.length(id)) << "seed " << seed << " node " << id;
      ASSERT_EQ(dag.node(id).exact, ref.value(id));
      ASSERT_EQ(dag.node(id).condition, ref.condition(id));
      if (dag.node(id).condition) {
        ASSERT_GE(*dag.node(id).condition, 1);
      }
    }
  }
}

TEST(DagProperties, ErrorSetsMatchBruteForce) {
  for (std::uint64_t seed = 100; seed < 115; ++seed) {
    const Dag dag = random_dag(seed, 200);
    const auto brute = brute_force_error_sets(dag);
    for (NodeId id = 0; id < dag.size(); ++id) {
      const auto got = dag.error_set(id);
      ASSERT_EQ(std::set<NodeId>(got.begin(), got.end()), brute[id]) << "seed " << seed << " node " << id;
    }
    // Validation flags exactly the products with overlapping error sets.
    std::set<NodeId> flagged;
    for (const auto& v : validate_martingale_inducing(dag)) {
      flagged.insert(v.mul);
      const Node& m = dag.node(v.mul);
      ASSERT_TRUE(brute[m.left].contains(v.shared) && brute[m.right].contains(v.shared));
    }
    for (NodeId id = 0; id < dag.size(); ++id) {
      const Node& n = dag.node(id);
      if (n.kind != NodeKind::mul) continue;
      bool overlap = false;
      for (NodeId e : brute[n.left]) overlap |= brute[n.right].contains(e);
      ASSERT_EQ(overlap, flagged.contains(id)) << "seed " << seed << " node " << id;
    }
  }
}

TEST(DagProperties, PositiveSumsAndProductsHaveUnitCondition) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dag dag = random_dag(seed + 500, 150, true);
    for (const Node& n : dag.nodes()) ASSERT_EQ(*n.condition, 1);
  }
}

TEST(DagProperties, RebuildIsIdempotent) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dag a = random_dag(seed + 900, 120);
    const Dag b = random_dag(seed + 900, 120);
    const Dag c = from_text(to_text(a));
    ASSERT_EQ(a.size(), c.size());
    for (NodeId id = 0; id < a.size(); ++id) {
      ASSERT_EQ(a.node(id).length, b.node(id).length);
      ASSERT_EQ(a.node(id).condition, b.node(id).condition);
      ASSERT_EQ(a.node(id).length, c.node(id).length);
      ASSERT_EQ(a.node(id).condition, c.node(id).condition);
    }
    EXPECT_EQ(to_text(a), to_text(c));
  }
}

TEST(DagText, Golden) {
  DagBuilder b;
  const NodeId a = b.input(q(3, 2));
  const NodeId c = b.input(q(-1, 4));
  const NodeId s = b.sub(a, c);
  const NodeId m = b.mul(s, b.input(q(2)));
  b.output("y", m);
  const Dag dag = std::move(b).build();
  EXPECT_EQ(to_text(dag),
            "0 input - - 3/2\n"
            "1 input - - -1/4\n"
            "2 sub 0 1 7/4\n"
            "3 input - - 2/1\n"
            "4 mul 2 3 7/2\n"
            "output y 4\n");
}

TEST(DagText, RejectsMalformedInput) {
  EXPECT_THROW(from_text("0 input - - x/2\n"), Error);
  EXPECT_THROW(from_text("1 input - - 1/2\n"), Error);
  EXPECT_THROW(from_text("0 input - - 1/2\n1 add 0 5 1/1\n"), Error);
  EXPECT_THROW(from_text("0 input - - 1/2\n1 add 0 0 3/1\n"), Error);
  EXPECT_THROW(from_text("0 input - - 1/2\n1 div 0 0 1/1\n"), Error);
  EXPECT_THROW(from_text("0 input - - 1/2\noutput y 3\n"), Error);
}

}  // namespace
}  // namespace srb
