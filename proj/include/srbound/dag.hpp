#pragma once

// Sum/sub/product computation DAGs.
//
// Every node carries its exact rational value, its martingale length L and
// its condition bound K, all computed when the node is created:
//
//   input:      L = 0,                  K = 1
//   x +/- y:    L = max(L_x, L_y) + 1,  K = (|x| K_x + |y| K_y) / |x +/- y|
//   x * y:      L = L_x + L_y + 1,      K = K_x K_y
//
// K is undefined at a sum whose exact value is zero and everywhere downstream
// of it. A product is only admissible when its operands share no rounding
// error, i.e. no operation node is an ancestor of both.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "srbound/errors.hpp"
#include "srbound/rational.hpp"

namespace srb {

using NodeId = std::uint32_t;

enum class NodeKind : std::uint8_t { input, add, sub, mul };

inline std::string_view kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::input: return "input";
    case NodeKind::add: return "add";
    case NodeKind::sub: return "sub";
    case NodeKind::mul: return "mul";
  }
  return "?";
}

struct Node {
  NodeKind kind = NodeKind::input;
  NodeId left = 0;
  NodeId right = 0;
  Rational exact;
  std::uint32_t length = 0;
  std::optional<Rational> condition;  // nullopt when undefined

  bool is_op() const noexcept { return kind != NodeKind::input; }
};

struct NamedOutput {
  std::string name;
  NodeId node;
};

// A product whose operands share the rounding error of `shared`.
struct Violation {
  NodeId mul;
  NodeId shared;
  friend bool operator==(const Violation&, const Violation&) = default;
};

namespace detail {

// Operation nodes whose rounding errors reach `id` (its error set).
inline std::unordered_set<NodeId> op_ancestors(std::span<const Node> nodes, NodeId id) {
  std::unordered_set<NodeId> seen;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    const Node& n = nodes[v];
    if (!n.is_op() || !seen.insert(v).second) continue;
    stack.push_back(n.left);
    stack.push_back(n.right);
  }
  return seen;
}

// Largest operation id in err_set(a) ∩ err_set(b), if any.
inline std::optional<NodeId> shared_error(std::span<const Node> nodes, NodeId a, NodeId b) {
  if (!nodes[a].is_op() || !nodes[b].is_op()) return std::nullopt;
  const auto left = op_ancestors(nodes, a);
  std::optional<NodeId> best;
  std::unordered_set<NodeId> seen;
  std::vector<NodeId> stack{b};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    const Node& n = nodes[v];
    if (!n.is_op() || !seen.insert(v).second) continue;
    if (left.contains(v)) {
      if (!best || v > *best) best = v;
      continue;  // everything beneath v is shared too, and has smaller ids
    }
    stack.push_back(n.left);
    stack.push_back(n.right);
  }
  return best;
}

}  // namespace detail

class Dag {
 public:
  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::span<const Node> nodes() const noexcept { return nodes_; }
  const std::vector<NamedOutput>& outputs() const noexcept { return outputs_; }

  std::optional<NodeId> find_output(std::string_view name) const {
    for (const auto& o : outputs_)
      if (o.name == name) return o.node;
    return std::nullopt;
  }

  // Sorted ids of the operation nodes whose errors influence `id`.
  std::vector<NodeId> error_set(NodeId id) const {
    auto s = detail::op_ancestors(nodes_, id);
    std::vector<NodeId> v(s.begin(), s.end());
    std::sort(v.begin(), v.end());
    return v;
  }

  std::optional<NodeId> shared_error(NodeId a, NodeId b) const {
    return detail::shared_error(nodes_, a, b);
  }

 private:
  friend class DagBuilder;
  std::vector<Node> nodes_;
  std::vector<NamedOutput> outputs_;
};

// Whether `mul` rejects operands that share a rounding error on the spot, or
// accepts them and leaves detection to validate_martingale_inducing.
enum class MulCheck { strict, deferred };

class DagBuilder {
 public:
  explicit DagBuilder(MulCheck check = MulCheck::strict) : check_(check) {}

  NodeId input(Rational value) {
    Node n;
    n.exact = std::move(value);
    n.exact.canonicalize();  // gmp arithmetic assumes lowest terms
    n.condition = Rational(1);
    return push(std::move(n));
  }

  NodeId add(NodeId x, NodeId y) { return sum(NodeKind::add, x, y); }
  NodeId sub(NodeId x, NodeId y) { return sum(NodeKind::sub, x, y); }

  NodeId mul(NodeId x, NodeId y) {
    const Node& a = at(x);
    const Node& b = at(y);
    if (check_ == MulCheck::strict) {
      if (auto w = detail::shared_error(dag_.nodes_, x, y))
        throw BiasedMultiplication(x, y, *w);
    }
    Node n;
    n.kind = NodeKind::mul;
    n.left = x;
    n.right = y;
    n.exact = a.exact * b.exact;
    n.length = a.length + b.length + 1;
    if (a.condition && b.condition) n.condition = *a.condition * *b.condition;
    return push(std::move(n));
  }

  NodeId apply(NodeKind kind, NodeId x, NodeId y) {
    switch (kind) {
      case NodeKind::add: return add(x, y);
      case NodeKind::sub: return sub(x, y);
      case NodeKind::mul: return mul(x, y);
      case NodeKind::input: break;
    }
    throw std::invalid_argument("apply() needs an operation kind");
  }

  void output(std::string name, NodeId id) {
    at(id);
    dag_.outputs_.push_back({std::move(name), id});
  }

  const Node& node(NodeId id) const { return at(id); }
  std::size_t size() const noexcept { return dag_.nodes_.size(); }
  std::span<const Node> nodes() const noexcept { return dag_.nodes_; }
  MulCheck mul_check() const noexcept { return check_; }

  std::optional<NodeId> shared_error(NodeId a, NodeId b) const {
    at(a);
    at(b);
    return detail::shared_error(dag_.nodes_, a, b);
  }

  Dag build() && { return std::move(dag_); }

 private:
  const Node& at(NodeId id) const {
    if (id >= dag_.nodes_.size())
      throw std::out_of_range("unknown node id " + std::to_string(id));
    return dag_.nodes_[id];
  }

  NodeId sum(NodeKind kind, NodeId x, NodeId y) {
    const Node& a = at(x);
    const Node& b = at(y);
    Node n;
    n.kind = kind;
    n.left = x;
    n.right = y;
    n.exact = kind == NodeKind::add ? Rational(a.exact + b.exact) : Rational(a.exact - b.exact);
    n.length = std::max(a.length, b.length) + 1;
    if (a.condition && b.condition && n.exact != 0)
      n.condition = (abs(a.exact) * *a.condition + abs(b.exact) * *b.condition) / abs(n.exact);
    return push(std::move(n));
  }

  NodeId push(Node n) {
    dag_.nodes_.push_back(std::move(n));
    return static_cast<NodeId>(dag_.nodes_.size() - 1);
  }

  Dag dag_;
  MulCheck check_;
};

// Every product whose operands share a rounding error; empty iff the DAG is
// martingale-inducing.
inline std::vector<Violation> validate_martingale_inducing(const Dag& dag) {
  std::vector<Violation> out;
  const auto nodes = dag.nodes();
  for (NodeId id = 0; id < nodes.size(); ++id) {
    const Node& n = nodes[id];
    if (n.kind != NodeKind::mul) continue;
    if (auto w = detail::shared_error(nodes, n.left, n.right)) out.push_back({id, *w});
  }
  return out;
}

// Line-based text form, one node per line:
//   <id> <kind> <left|-> <right|-> <num>/<den>
// followed by `output <name> <id>` lines.
inline std::string to_text(const Dag& dag) {
  std::ostringstream os;
  const auto nodes = dag.nodes();
  for (NodeId id = 0; id < nodes.size(); ++id) {
    const Node& n = nodes[id];
    os << id << ' ' << kind_name(n.kind) << ' ';
    if (n.is_op())
      os << n.left << ' ' << n.right;
    else
      os << "- -";
    os << ' ' << n.exact.get_num().get_str() << '/' << n.exact.get_den().get_str() << '\n';
  }
  for (const auto& o : dag.outputs()) os << "output " << o.name << ' ' << o.node << '\n';
  return os.str();
}

// Inverse of to_text; lengths and condition bounds are recomputed. Op-node
// values are recomputed too and must match the recorded ones.
inline Dag from_text(std::string_view text) {
  DagBuilder b(MulCheck::deferred);
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw Error("dag text line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "output") {
      std::string name;
      NodeId id{};
      if (!(ls >> name >> id) || id >= b.size()) fail("bad output line");
      b.output(name, id);
      continue;
    }
    std::string kind, l, r, value;
    if (!(ls >> kind >> l >> r >> value)) fail("expected 5 fields");
    if (first != std::to_string(b.size())) fail("ids must be dense and ascending");
    Rational q;
    if (q.set_str(value, 10) != 0) fail("bad rational '" + value + "'");
    q.canonicalize();
    if (kind == "input") {
      b.input(q);
      continue;
    }
    NodeKind k;
    if (kind == "add")
      k = NodeKind::add;
    else if (kind == "sub")
      k = NodeKind::sub;
    else if (kind == "mul")
      k = NodeKind::mul;
    else
      fail("unknown kind '" + kind + "'");
    NodeId li = 0, ri = 0;
    try {
      li = static_cast<NodeId>(std::stoul(l));
      ri = static_cast<NodeId>(std::stoul(r));
    } catch (const std::exception&) {
      fail("bad child id");
    }
    if (li >= b.size() || ri >= b.size()) fail("child id must precede its parent");
    NodeId id = b.apply(k, li, ri);
    if (b.node(id).exact != q) fail("recorded value disagrees with recomputed value");
  }
  return std::move(b).build();
}

}  // namespace srb
