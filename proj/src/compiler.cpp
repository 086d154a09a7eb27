#include "psl/compiler.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

namespace psl {

VarOrder VarOrder::lexicographic(std::size_t var_count) {
  VarOrder o;
  o.order.resize(var_count);
  for (std::size_t v = 0; v < var_count; ++v) o.order[v] = VarId{static_cast<std::uint32_t>(v)};
  o.strategy = OrderStrategy::lexicographic;
  return o;
}

namespace {

void count_occurrences(const Expr& e, std::vector<std::size_t>& counts,
                       std::unordered_map<const ExprNode*, bool>& seen) {
  if (!seen.emplace(e.get(), true).second) return;
  if (e.kind() == ExprKind::literal) ++counts[e.lit().var.index];
  for (const auto& c : e.children()) count_occurrences(c, counts, seen);
}

}  // namespace

VarOrder VarOrder::most_frequent_first(const Formula& f) {
  std::vector<std::size_t> counts(f.var_count(), 0);
  std::unordered_map<const ExprNode*, bool> seen;
  count_occurrences(f.root(), counts, seen);
  VarOrder o = lexicographic(f.var_count());
  std::stable_sort(o.order.begin(), o.order.end(),
                   [&](VarId a, VarId b) { return counts[a.index] > counts[b.index]; });
  o.strategy = OrderStrategy::most_frequent_first;
  return o;
}

VarOrder VarOrder::explicit_order(std::vector<VarId> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (auto v : perm) {
    if (v.index >= perm.size() || seen[v.index]) throw FormulaError("variable order is not a permutation");
    seen[v.index] = true;
  }
  return VarOrder{std::move(perm), OrderStrategy::explicit_order};
}

namespace {

using RId = std::uint32_t;
constexpr RId kFalse = 0;
constexpr RId kTrue = 1;
constexpr std::uint32_t kNoPos = std::numeric_limits<std::uint32_t>::max();

enum class RKind : std::uint8_t { f, t, lit, conj, disj };

// Hash-consed negation normal form. Node identity is the cache key for the
// residual formula, so children are kept sorted and deduplicated.
struct RNode {
  RKind kind;
  Literal lit;
  std::vector<RId> ch;
  std::uint32_t minpos;  // smallest / largest order position of any mentioned variable
  std::uint32_t maxpos;
};

struct RKey {
  RKind kind;
  std::int64_t lit;
  std::vector<RId> ch;
  bool operator==(const RKey&) const = default;
};

struct RKeyHash {
  std::size_t operator()(const RKey& k) const {
    std::size_t h = static_cast<std::size_t>(k.kind) ^ (static_cast<std::size_t>(k.lit) * 0x9e3779b97f4a7c15ULL);
    for (auto c : k.ch) h ^= c + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

class ResidualManager {
 public:
  explicit ResidualManager(std::vector<std::uint32_t> pos_of_var) : pos_(std::move(pos_of_var)) {
    nodes_.push_back({RKind::f, {}, {}, kNoPos, 0});
    nodes_.push_back({RKind::t, {}, {}, kNoPos, 0});
  }

  const RNode& node(RId id) const { return nodes_[id]; }

  RId literal(Literal l) {
    RKey key{RKind::lit, l.dimacs(), {}};
    if (auto it = table_.find(key); it != table_.end()) return it->second;
    auto p = pos_[l.var.index];
    return intern(std::move(key), RNode{RKind::lit, l, {}, p, p});
  }

  RId gate(RKind kind, std::vector<RId> in) {
    const RId absorbing = kind == RKind::conj ? kFalse : kTrue;
    const RId neutral = kind == RKind::conj ? kTrue : kFalse;
    std::vector<RId> ch;
    ch.reserve(in.size());
    for (RId c : in) {
      if (c == absorbing) return absorbing;
      if (c == neutral) continue;
      const RNode& n = nodes_[c];
      if (n.kind == kind) {
        ch.insert(ch.end(), n.ch.begin(), n.ch.end());
      } else {
        ch.push_back(c);
      }
    }
    std::sort(ch.begin(), ch.end(), [&](RId a, RId b) {
      const auto pa = nodes_[a].minpos, pb = nodes_[b].minpos;
      return pa != pb ? pa < pb : a < b;
    });
    ch.erase(std::unique(ch.begin(), ch.end()), ch.end());
    // x and NOT x side by side after sorting (same minpos); literals sort before gates with that minpos
    // only by id, so scan all literal pairs with equal position.
    for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
      const RNode& a = nodes_[ch[i]];
      if (a.kind != RKind::lit) continue;
      for (std::size_t j = i + 1; j < ch.size() && nodes_[ch[j]].minpos == a.minpos; ++j) {
        const RNode& b = nodes_[ch[j]];
        if (b.kind == RKind::lit && b.lit.var == a.lit.var && b.lit.positive != a.lit.positive) return absorbing;
      }
    }
    if (ch.empty()) return neutral;
    if (ch.size() == 1) return ch[0];
    RKey key{kind, 0, ch};
    if (auto it = table_.find(key); it != table_.end()) return it->second;
    std::uint32_t lo = kNoPos, hi = 0;
    for (RId c : ch) {
      lo = std::min(lo, nodes_[c].minpos);
      hi = std::max(hi, nodes_[c].maxpos);
    }
    return intern(std::move(key), RNode{kind, {}, std::move(ch), lo, hi});
  }

  RId from_expr(const Expr& e, bool negated) {
    auto key = std::make_pair(e.get(), negated);
    if (auto it = nnf_memo_.find(key); it != nnf_memo_.end()) return it->second;
    RId out = kFalse;
    switch (e.kind()) {
      case ExprKind::constant_true:
        out = negated ? kFalse : kTrue;
        break;
      case ExprKind::constant_false:
        out = negated ? kTrue : kFalse;
        break;
      case ExprKind::literal:
        out = literal(negated ? e.lit().negated() : e.lit());
        break;
      case ExprKind::negation:
        out = from_expr(e.children()[0], !negated);
        break;
      case ExprKind::conjunction:
      case ExprKind::disjunction: {
        std::vector<RId> ch;
        ch.reserve(e.children().size());
        for (const auto& c : e.children()) ch.push_back(from_expr(c, negated));
        const bool is_and = (e.kind() == ExprKind::conjunction) != negated;
        out = gate(is_and ? RKind::conj : RKind::disj, std::move(ch));
        break;
      }
    }
    nnf_memo_.emplace(key, out);
    return out;
  }

  /// Substitutes the literals in `units` (positions sorted ascending) into id.
  RId condition(RId id, const std::vector<std::int8_t>& value_at_pos, const std::vector<std::uint32_t>& sorted_pos,
                std::unordered_map<RId, RId>& memo) {
    const RNode& n = nodes_[id];
    if (n.kind == RKind::f || n.kind == RKind::t) return id;
    auto it_pos = std::lower_bound(sorted_pos.begin(), sorted_pos.end(), n.minpos);
    if (it_pos == sorted_pos.end() || *it_pos > n.maxpos) return id;
    if (n.kind == RKind::lit) {
      auto v = value_at_pos[n.minpos];
      if (v < 0) return id;
      return (v == 1) == n.lit.positive ? kTrue : kFalse;
    }
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    const RKind kind = n.kind;
    std::vector<RId> ch = n.ch;  // copy: nodes_ may reallocate below
    for (auto& c : ch) c = condition(c, value_at_pos, sorted_pos, memo);
    RId out = gate(kind, std::move(ch));
    memo.emplace(id, out);
    return out;
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  RId intern(RKey key, RNode node) {
    auto id = static_cast<RId>(nodes_.size());
    nodes_.push_back(std::move(node));
    table_.emplace(std::move(key), id);
    return id;
  }

  std::vector<std::uint32_t> pos_;
  std::vector<RNode> nodes_;
  std::unordered_map<RKey, RId, RKeyHash> table_;
  std::map<std::pair<const ExprNode*, bool>, RId> nnf_memo_;
};

class ShannonCompiler {
 public:
  ShannonCompiler(const Formula& f, const VarOrder& order, const CompileOptions& opts)
      : order_(order), opts_(opts), rm_(positions(order, f.var_count())), builder_(f.var_count()),
        value_at_pos_(f.var_count(), -1) {}

  NodeId run(const Formula& f) { return compile(rm_.from_expr(f.root(), false)); }

  CircuitBuilder take_builder() { return std::move(builder_); }

  bool is_false(NodeId id) const { return builder_.node(id).kind == NodeKind::constant_false; }
  bool is_true(NodeId id) const { return builder_.node(id).kind == NodeKind::constant_true; }

 private:
  static std::vector<std::uint32_t> positions(const VarOrder& order, std::size_t var_count) {
    if (order.order.size() != var_count) throw FormulaError("variable order does not cover the formula's variables");
    std::vector<std::uint32_t> pos(var_count);
    for (std::size_t i = 0; i < order.order.size(); ++i) pos[order.order[i].index] = static_cast<std::uint32_t>(i);
    return pos;
  }

  RId condition_on(RId id, const std::vector<Literal>& lits) {
    std::vector<std::uint32_t> sorted;
    sorted.reserve(lits.size());
    for (const auto& l : lits) {
      auto p = rm_.node(rm_.literal(l)).minpos;
      value_at_pos_[p] = l.positive ? 1 : 0;
      sorted.push_back(p);
    }
    std::sort(sorted.begin(), sorted.end());
    std::unordered_map<RId, RId> memo;
    RId out = rm_.condition(id, value_at_pos_, sorted, memo);
    for (auto p : sorted) value_at_pos_[p] = -1;
    return out;
  }

  void check_budget() const {
    if (builder_.size() > opts_.node_budget)
      throw CompileError("node budget of " + std::to_string(opts_.node_budget) + " exceeded", builder_.size());
  }

  NodeId conjoin(std::vector<NodeId> parts) {
    std::vector<NodeId> flat;
    for (NodeId p : parts) {
      const Node& n = builder_.node(p);
      if (n.kind == NodeKind::constant_true) continue;
      if (n.kind == NodeKind::constant_false) return builder_.constant(false);
      if (n.kind == NodeKind::conjunction) {
        flat.insert(flat.end(), n.children.begin(), n.children.end());
      } else {
        flat.push_back(p);
      }
    }
    return builder_.conjunction(std::move(flat));
  }

  NodeId compile(RId id) {
    if (id == kFalse) return builder_.constant(false);
    if (id == kTrue) return builder_.constant(true);
    if (auto it = cache_.find(id); it != cache_.end()) return it->second;

    const RNode& n = rm_.node(id);
    NodeId out;
    if (n.kind == RKind::lit) {
      out = builder_.leaf(n.lit);
    } else if (auto units = unit_literals(id); !units.empty()) {
      // Forced literals are conjoined directly; the residual no longer mentions them.
      std::vector<NodeId> parts;
      for (const auto& l : units) parts.push_back(builder_.leaf(l));
      RId rest = condition_on(id, units);
      if (rest == kFalse) {
        out = builder_.constant(false);
      } else {
        parts.push_back(compile(rest));
        out = conjoin(std::move(parts));
      }
    } else {
      const VarId v = order_.order[n.minpos];
      std::vector<NodeId> branches;
      for (bool value : {true, false}) {
        const Literal l{v, value};
        RId sub = condition_on(id, {l});
        if (sub == kFalse) continue;
        NodeId sub_node = compile(sub);
        if (is_false(sub_node)) continue;
        branches.push_back(conjoin({builder_.leaf(l), sub_node}));
      }
      if (branches.empty()) {
        out = builder_.constant(false);
      } else if (branches.size() == 1) {
        out = branches[0];
      } else {
        out = builder_.disjunction(std::move(branches), v);
      }
    }
    check_budget();
    cache_.emplace(id, out);
    return out;
  }

  std::vector<Literal> unit_literals(RId id) const {
    std::vector<Literal> units;
    const RNode& n = rm_.node(id);
    if (n.kind != RKind::conj) return units;
    for (RId c : n.ch)
      if (rm_.node(c).kind == RKind::lit) units.push_back(rm_.node(c).lit);
    return units;
  }

  const VarOrder& order_;
  const CompileOptions& opts_;
  ResidualManager rm_;
  CircuitBuilder builder_;
  std::vector<std::int8_t> value_at_pos_;
  std::unordered_map<RId, NodeId> cache_;
};

class Smoother {
 public:
  explicit Smoother(const Circuit& c) : c_(c), builder_(c.var_count(), false), map_(c.size(), 0) {}

  Circuit run(bool extend_root) {
    for (std::size_t id = 0; id < c_.size(); ++id) map_[id] = rebuild(static_cast<NodeId>(id));
    NodeId root = map_[c_.root()];
    if (extend_root) {
      const Node& r = builder_.node(root);
      if (r.kind != NodeKind::constant_false) {
        VarSet all(c_.var_count());
        for (std::uint32_t v = 0; v < c_.var_count(); ++v) all.insert(v);
        root = pad(root, c_.scope(c_.root()), all);
      }
    }
    const bool identity = !changed_ && root == map_[c_.root()] && c_.root() + std::size_t{1} == c_.size();
    return std::move(builder_).finish(root, !identity);
  }

 private:
  NodeId rebuild(NodeId id) {
    const Node& n = c_.node(id);
    switch (n.kind) {
      case NodeKind::leaf: {
        NodeId out = builder_.add(n);
        leaves_.emplace(n.lit.dimacs(), out);
        return out;
      }
      case NodeKind::constant_true:
      case NodeKind::constant_false:
        return builder_.add(n);
      case NodeKind::conjunction: {
        Node copy = n;
        copy.children.clear();
        for (NodeId ch : n.children) {
          const NodeId m = map_[ch];
          const auto kind = builder_.node(m).kind;
          if (kind == NodeKind::constant_false) {
            changed_ = true;
            return false_node();
          }
          if (kind == NodeKind::constant_true) {
            changed_ = true;
            continue;
          }
          copy.children.push_back(m);
        }
        if (copy.children.empty()) return builder_.constant(true);
        if (copy.children.size() == 1) return copy.children[0];
        return builder_.add(std::move(copy));
      }
      case NodeKind::disjunction: {
        Node copy = n;
        copy.children.clear();
        const VarSet& full = c_.scope(id);
        for (NodeId ch : n.children) {
          const NodeId m = map_[ch];
          if (builder_.node(m).kind == NodeKind::constant_false) {
            changed_ = true;
            continue;
          }
          copy.children.push_back(pad(m, c_.scope(ch), full));
        }
        if (copy.children.empty()) return false_node();
        return builder_.add(std::move(copy));
      }
    }
    return 0;
  }

  NodeId false_node() { return builder_.constant(false); }

  NodeId leaf(Literal l) {
    auto key = l.dimacs();
    if (auto it = leaves_.find(key); it != leaves_.end()) return it->second;
    NodeId id = builder_.leaf(l);
    leaves_.emplace(key, id);
    return id;
  }

  NodeId gadget(std::uint32_t v) {
    if (auto it = gadgets_.find(v); it != gadgets_.end()) return it->second;
    const VarId var{v};
    NodeId id = builder_.disjunction({leaf({var, true}), leaf({var, false})}, var);
    gadgets_.emplace(v, id);
    return id;
  }

  // Conjoins gadgets for every variable of `full` missing from `have`.
  NodeId pad(NodeId node, const VarSet& have, const VarSet& full) {
    std::vector<NodeId> parts;
    if (builder_.node(node).kind != NodeKind::constant_true) parts.push_back(node);
    bool missing = false;
    for (auto v : full.elements()) {
      if (have.contains(v)) continue;
      parts.push_back(gadget(v));
      missing = true;
    }
    if (!missing) return node;
    changed_ = true;
    if (parts.size() == 1) return parts[0];
    return builder_.conjunction(std::move(parts));
  }

  const Circuit& c_;
  CircuitBuilder builder_;
  std::vector<NodeId> map_;
  std::unordered_map<std::int64_t, NodeId> leaves_;
  std::unordered_map<std::uint32_t, NodeId> gadgets_;
  bool changed_ = false;
};

}  // namespace

Circuit smooth(const Circuit& c) { return Smoother(c).run(false); }

Circuit extend_to_all_variables(const Circuit& c) { return Smoother(c).run(true); }

Circuit compile(const Formula& f, const VarOrder& order, const CompileOptions& opts) {
  ShannonCompiler sc(f, order, opts);
  NodeId root = sc.run(f);
  if (sc.is_false(root)) return Circuit::constant(false, f.var_count());
  Circuit raw = sc.take_builder().finish(root);
  return Smoother(raw).run(true);
}

Circuit compile(const Formula& f) { return compile(f, VarOrder::lexicographic(f.var_count())); }

}  // namespace psl
