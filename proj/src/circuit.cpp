#include "psl/circuit.hpp"

#include <algorithm>
#include <bit>
#include <map>

namespace psl {

void VarSet::unite(const VarSet& other) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
}

bool VarSet::intersects(const VarSet& other) const {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & other.words_[i]) return true;
  return false;
}

std::size_t VarSet::size() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<std::uint32_t> VarSet::elements() const {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    auto w = words_[i];
    while (w) {
      out.push_back(static_cast<std::uint32_t>(i * 64 + static_cast<std::size_t>(std::countr_zero(w))));
      w &= w - 1;
    }
  }
  return out;
}

Circuit::Circuit(std::vector<Node> nodes, NodeId root, std::size_t var_count)
    : nodes_(std::move(nodes)), root_(root), var_count_(var_count) {
  if (nodes_.empty()) throw CircuitError("circuit has no nodes");
  if (root_ >= nodes_.size()) throw CircuitError("root id out of range");
  scopes_.reserve(nodes_.size());
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    VarSet scope(var_count_);
    switch (n.kind) {
      case NodeKind::leaf:
        if (n.lit.var.index >= var_count_)
          throw CircuitError("node " + std::to_string(id) + ": variable out of range");
        scope.insert(n.lit.var.index);
        break;
      case NodeKind::constant_true:
      case NodeKind::constant_false:
        break;
      case NodeKind::conjunction:
      case NodeKind::disjunction:
        if (n.children.empty()) throw CircuitError("node " + std::to_string(id) + ": gate without children");
        for (NodeId ch : n.children) {
          if (ch >= id) throw CircuitError("node " + std::to_string(id) + ": child does not precede its parent");
          scope.unite(scopes_[ch]);
        }
        if (n.decision && n.decision->index >= var_count_)
          throw CircuitError("node " + std::to_string(id) + ": decision variable out of range");
        break;
    }
    scopes_.push_back(std::move(scope));
  }
}

Circuit Circuit::constant(bool value, std::size_t var_count) {
  Node n;
  n.kind = value ? NodeKind::constant_true : NodeKind::constant_false;
  return Circuit({n}, 0, var_count);
}

std::size_t Circuit::edge_count() const {
  std::size_t e = 0;
  for (const auto& n : nodes_) e += n.children.size();
  return e;
}

bool Circuit::evaluate(const std::vector<bool>& values) const {
  if (values.size() < var_count_) throw CircuitError("assignment does not cover every circuit variable");
  std::vector<char> val(nodes_.size());
  for (std::size_t id = 0; id <= root_; ++id) {
    const Node& n = nodes_[id];
    switch (n.kind) {
      case NodeKind::leaf:
        val[id] = values[n.lit.var.index] == n.lit.positive;
        break;
      case NodeKind::constant_true:
        val[id] = 1;
        break;
      case NodeKind::constant_false:
        val[id] = 0;
        break;
      case NodeKind::conjunction:
        val[id] = std::all_of(n.children.begin(), n.children.end(), [&](NodeId c) { return val[c] != 0; });
        break;
      case NodeKind::disjunction:
        val[id] = std::any_of(n.children.begin(), n.children.end(), [&](NodeId c) { return val[c] != 0; });
        break;
    }
  }
  return val[root_] != 0;
}

std::vector<std::uint64_t> Circuit::evaluate_lanes(std::span<const std::uint64_t> var_lanes) const {
  std::vector<std::uint64_t> val(nodes_.size());
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    switch (n.kind) {
      case NodeKind::leaf: {
        auto x = var_lanes[n.lit.var.index];
        val[id] = n.lit.positive ? x : ~x;
        break;
      }
      case NodeKind::constant_true:
        val[id] = ~std::uint64_t{0};
        break;
      case NodeKind::constant_false:
        val[id] = 0;
        break;
      case NodeKind::conjunction: {
        std::uint64_t m = ~std::uint64_t{0};
        for (NodeId c : n.children) m &= val[c];
        val[id] = m;
        break;
      }
      case NodeKind::disjunction: {
        std::uint64_t m = 0;
        for (NodeId c : n.children) m |= val[c];
        val[id] = m;
        break;
      }
    }
  }
  return val;
}

std::size_t CircuitBuilder::NodeHash::operator()(const Node& n) const {
  std::size_t h = static_cast<std::size_t>(n.kind) * 0x9e3779b97f4a7c15ULL;
  auto mix = [&](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  mix(n.lit.var.index * 2 + (n.lit.positive ? 1 : 0));
  mix(n.decision ? n.decision->index + 1 : 0);
  for (auto c : n.children) mix(c);
  return h;
}

NodeId CircuitBuilder::add(Node n) {
  if (hash_cons_) {
    if (auto it = unique_.find(n); it != unique_.end()) return it->second;
  }
  auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(n);
  if (hash_cons_) unique_.emplace(std::move(n), id);
  return id;
}

NodeId CircuitBuilder::leaf(Literal l) {
  Node n;
  n.kind = NodeKind::leaf;
  n.lit = l;
  return add(std::move(n));
}

NodeId CircuitBuilder::constant(bool value) {
  Node n;
  n.kind = value ? NodeKind::constant_true : NodeKind::constant_false;
  return add(std::move(n));
}

NodeId CircuitBuilder::conjunction(std::vector<NodeId> children) {
  if (children.size() == 1) return children[0];
  if (children.empty()) return constant(true);
  Node n;
  n.kind = NodeKind::conjunction;
  n.children = std::move(children);
  return add(std::move(n));
}

NodeId CircuitBuilder::disjunction(std::vector<NodeId> children, std::optional<VarId> decision) {
  if (children.empty()) return constant(false);
  Node n;
  n.kind = NodeKind::disjunction;
  n.children = std::move(children);
  n.decision = decision;
  return add(std::move(n));
}

Circuit CircuitBuilder::finish(NodeId root, bool compact) && {
  if (!compact) return Circuit(std::move(nodes_), root, var_count_);
  std::vector<char> live(nodes_.size(), 0);
  live[root] = 1;
  for (std::size_t id = root + 1; id-- > 0;) {
    if (!live[id]) continue;
    for (NodeId c : nodes_[id].children) live[c] = 1;
  }
  std::vector<NodeId> remap(nodes_.size(), 0);
  std::vector<Node> out;
  for (std::size_t id = 0; id <= root; ++id) {
    if (!live[id]) continue;
    Node n = std::move(nodes_[id]);
    for (auto& c : n.children) c = remap[c];
    remap[id] = static_cast<NodeId>(out.size());
    out.push_back(std::move(n));
  }
  auto new_root = remap[root];
  return Circuit(std::move(out), new_root, var_count_);
}

namespace {

// Value the node forces on var in every model, if any.
std::optional<bool> forced_value(const Circuit& c, NodeId id, VarId var,
                                 std::map<std::pair<NodeId, std::uint32_t>, std::optional<bool>>& memo) {
  auto key = std::make_pair(id, var.index);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  const Node& n = c.node(id);
  std::optional<bool> out;
  switch (n.kind) {
    case NodeKind::leaf:
      if (n.lit.var == var) out = n.lit.positive;
      break;
    case NodeKind::conjunction:
      for (NodeId ch : n.children) {
        if (!c.scope(ch).contains(var.index)) continue;
        out = forced_value(c, ch, var, memo);
        if (out) break;
      }
      break;
    case NodeKind::disjunction: {
      bool first = true;
      for (NodeId ch : n.children) {
        auto v = forced_value(c, ch, var, memo);
        if (!v || (!first && v != out)) {
          out.reset();
          break;
        }
        out = v;
        first = false;
      }
      break;
    }
    default:
      break;
  }
  memo.emplace(key, out);
  return out;
}

bool deterministic_by_witness(const Circuit& c) {
  std::map<std::pair<NodeId, std::uint32_t>, std::optional<bool>> memo;
  for (std::size_t id = 0; id < c.size(); ++id) {
    const Node& n = c.node(static_cast<NodeId>(id));
    if (n.kind != NodeKind::disjunction || n.children.size() < 2) continue;
    if (!n.decision || n.children.size() > 2) return false;
    auto a = forced_value(c, n.children[0], *n.decision, memo);
    auto b = forced_value(c, n.children[1], *n.decision, memo);
    if (!a || !b || *a == *b) return false;
  }
  return true;
}

// Fills lanes for assignments [base, base + 64) with the enumeration order
// "bit v of the assignment index is variable v".
void fill_lanes(std::uint64_t base, std::vector<std::uint64_t>& lanes) {
  static constexpr std::uint64_t low[6] = {0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
                                           0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};
  for (std::size_t v = 0; v < lanes.size(); ++v)
    lanes[v] = v < 6 ? low[v] : (((base >> v) & 1U) ? ~std::uint64_t{0} : 0);
}

template <typename Visit>
void for_each_lane_batch(std::size_t var_count, Visit&& visit) {
  std::vector<std::uint64_t> lanes(var_count);
  const std::uint64_t worlds = std::uint64_t{1} << var_count;
  const std::uint64_t valid = worlds >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << worlds) - 1);
  for (std::uint64_t base = 0; base < worlds; base += 64) {
    fill_lanes(base, lanes);
    visit(lanes, valid);
  }
}

bool deterministic_exhaustive(const Circuit& c) {
  bool ok = true;
  for_each_lane_batch(c.var_count(), [&](const std::vector<std::uint64_t>& lanes, std::uint64_t valid) {
    if (!ok) return;
    auto val = c.evaluate_lanes(lanes);
    for (std::size_t id = 0; id < c.size() && ok; ++id) {
      const Node& n = c.node(static_cast<NodeId>(id));
      if (n.kind != NodeKind::disjunction) continue;
      std::uint64_t seen = 0;
      for (NodeId ch : n.children) {
        if (seen & val[ch] & valid) {
          ok = false;
          break;
        }
        seen |= val[ch];
      }
    }
  });
  return ok;
}

}  // namespace

PropertyReport check_properties(const Circuit& c) {
  PropertyReport r;
  r.decomposable = true;
  r.smooth = true;
  for (std::size_t id = 0; id < c.size(); ++id) {
    const Node& n = c.node(static_cast<NodeId>(id));
    if (n.kind == NodeKind::conjunction) {
      VarSet acc(c.var_count());
      for (NodeId ch : n.children) {
        if (acc.intersects(c.scope(ch))) r.decomposable = false;
        acc.unite(c.scope(ch));
      }
    } else if (n.kind == NodeKind::disjunction) {
      for (NodeId ch : n.children)
        if (!(c.scope(ch) == c.scope(static_cast<NodeId>(id)))) r.smooth = false;
    }
  }
  if (c.var_count() <= kExhaustiveDeterminismVars) {
    r.deterministic = deterministic_exhaustive(c) ? Determinism::yes : Determinism::no;
  } else if (deterministic_by_witness(c)) {
    r.deterministic = Determinism::yes;
  } else {
    r.deterministic = Determinism::unverifiable;
    r.note = "determinism unverifiable: more than " + std::to_string(kExhaustiveDeterminismVars) +
             " variables and some OR node lacks a decision-variable witness";
  }
  return r;
}

void require_tractable(const PropertyReport& r) {
  if (!r.decomposable) throw CircuitError("circuit is not decomposable");
  if (!r.smooth) throw CircuitError("circuit is not smooth");
  if (r.deterministic == Determinism::no) throw CircuitError("circuit is not deterministic");
  if (r.deterministic == Determinism::unverifiable) throw CircuitError(r.note);
}

void require_tractable(const Circuit& c) { require_tractable(c.properties()); }

const PropertyReport& Circuit::properties() const {
  std::call_once(properties_->once, [this] { properties_->report = check_properties(*this); });
  return properties_->report;
}

BigCount model_count(const Circuit& c) {
  require_tractable(c);
  std::vector<BigCount> count(c.root() + std::size_t{1});
  for (std::size_t id = 0; id <= c.root(); ++id) {
    const Node& n = c.node(static_cast<NodeId>(id));
    switch (n.kind) {
      case NodeKind::leaf:
      case NodeKind::constant_true:
        count[id] = 1;
        break;
      case NodeKind::constant_false:
        count[id] = 0;
        break;
      case NodeKind::conjunction:
        count[id] = 1;
        for (NodeId ch : n.children) count[id] *= count[ch];
        break;
      case NodeKind::disjunction:
        count[id] = 0;
        for (NodeId ch : n.children) count[id] += count[ch];
        break;
    }
  }
  BigCount total = count[c.root()];
  total <<= static_cast<unsigned>(c.var_count() - c.scope(c.root()).size());
  return total;
}

namespace {

class ModelEnumerator {
 public:
  ModelEnumerator(const Circuit& c, const std::function<void(const Assignment&)>& visit)
      : c_(c), visit_(visit), values_(c.var_count(), -1) {
    const auto& root_scope = c.scope(c.root());
    for (std::uint32_t v = 0; v < c.var_count(); ++v)
      if (!root_scope.contains(v)) free_.push_back(v);
  }

  void run() {
    std::vector<NodeId> pending{c_.root()};
    expand(pending);
  }

 private:
  void expand(std::vector<NodeId>& pending) {
    if (pending.empty()) {
      emit_free(0);
      return;
    }
    NodeId id = pending.back();
    pending.pop_back();
    const Node& n = c_.node(id);
    switch (n.kind) {
      case NodeKind::constant_false:
        break;
      case NodeKind::constant_true:
        expand(pending);
        break;
      case NodeKind::leaf: {
        auto& slot = values_[n.lit.var.index];
        const std::int8_t want = n.lit.positive ? 1 : 0;
        if (slot == -1) {
          slot = want;
          expand(pending);
          slot = -1;
        } else if (slot == want) {
          expand(pending);
        }
        break;
      }
      case NodeKind::conjunction: {
        const auto mark = pending.size();
        pending.insert(pending.end(), n.children.rbegin(), n.children.rend());
        expand(pending);
        pending.resize(mark);
        break;
      }
      case NodeKind::disjunction:
        for (NodeId ch : n.children) {
          pending.push_back(ch);
          expand(pending);
          pending.pop_back();
        }
        break;
    }
    pending.push_back(id);
  }

  void emit_free(std::size_t i) {
    if (i == free_.size()) {
      Assignment a;
      a.values.resize(values_.size());
      for (std::size_t v = 0; v < values_.size(); ++v) a.values[v] = values_[v] == 1;
      visit_(a);
      return;
    }
    for (std::int8_t b : {0, 1}) {
      values_[free_[i]] = b;
      emit_free(i + 1);
    }
    values_[free_[i]] = -1;
  }

  const Circuit& c_;
  const std::function<void(const Assignment&)>& visit_;
  std::vector<std::int8_t> values_;
  std::vector<std::uint32_t> free_;
};

}  // namespace

void enumerate_models(const Circuit& c, std::uint64_t limit, const std::function<void(const Assignment&)>& visit) {
  auto count = model_count(c);
  if (count > limit)
    throw CircuitError("model count " + count.str() + " exceeds enumeration limit " + std::to_string(limit));
  ModelEnumerator(c, visit).run();
}

std::vector<Assignment> enumerate_models(const Circuit& c, std::uint64_t limit) {
  std::vector<Assignment> out;
  enumerate_models(c, limit, [&](const Assignment& a) { out.push_back(a); });
  return out;
}

std::uint64_t count_satisfying_brute_force(const Circuit& c) {
  if (c.var_count() > 30) throw CircuitError("brute-force counting limited to 30 variables");
  std::uint64_t count = 0;
  for_each_lane_batch(c.var_count(), [&](const std::vector<std::uint64_t>& lanes, std::uint64_t valid) {
    auto val = c.evaluate_lanes(lanes);
    count += static_cast<std::uint64_t>(std::popcount(val[c.root()] & valid));
  });
  return count;
}

const char* to_string(Determinism d) {
  switch (d) {
    case Determinism::yes:
      return "yes";
    case Determinism::no:
      return "no";
    case Determinism::unverifiable:
      return "unverifiable";
  }
  return "?";
}

}  // namespace psl
