#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "psl/formula.hpp"

namespace psl {

using NodeId = std::uint32_t;
using BigCount = boost::multiprecision::cpp_int;

enum class NodeKind : std::uint8_t { leaf, constant_true, constant_false, conjunction, disjunction };

struct Node {
  NodeKind kind = NodeKind::constant_false;
  Literal lit{};                        // leaf only
  std::vector<NodeId> children;         // conjunction / disjunction
  std::optional<VarId> decision;        // disjunction only: the variable it branches on

  bool operator==(const Node&) const = default;
};

/// Fixed-size set of variable indices.
class VarSet {
 public:
  VarSet() = default;
  explicit VarSet(std::size_t universe) : words_((universe + 63) / 64, 0) {}

  void insert(std::uint32_t v) { words_[v / 64] |= std::uint64_t{1} << (v % 64); }
  bool contains(std::uint32_t v) const { return (words_[v / 64] >> (v % 64)) & 1U; }
  void unite(const VarSet& other);
  bool intersects(const VarSet& other) const;
  std::size_t size() const;
  std::vector<std::uint32_t> elements() const;

  bool operator==(const VarSet&) const = default;

 private:
  std::vector<std::uint64_t> words_;
};

enum class Determinism { yes, no, unverifiable };

struct PropertyReport {
  bool decomposable = false;
  bool smooth = false;
  Determinism deterministic = Determinism::unverifiable;
  std::string note;

  bool all() const { return decomposable && smooth && deterministic == Determinism::yes; }
};

class CircuitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable DAG of AND/OR/leaf nodes stored in topological order (children
/// precede parents). Per-node variable scopes are computed on construction.
class Circuit {
 public:
  /// Validates ordering, arity and variable ranges; throws CircuitError.
  Circuit(std::vector<Node> nodes, NodeId root, std::size_t var_count);

  static Circuit constant(bool value, std::size_t var_count);

  std::span<const Node> nodes() const { return nodes_; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  NodeId root() const { return root_; }
  std::size_t var_count() const { return var_count_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t edge_count() const;
  const VarSet& scope(NodeId id) const { return scopes_[id]; }

  /// check_properties(*this), computed once and shared between copies.
  const PropertyReport& properties() const;

  /// Boolean evaluation of the root under a full assignment.
  bool evaluate(const std::vector<bool>& values) const;

  /// Evaluates 64 assignments at once; bit j of word v is variable v in lane j.
  /// Returns the per-node lane masks.
  std::vector<std::uint64_t> evaluate_lanes(std::span<const std::uint64_t> var_lanes) const;

  bool operator==(const Circuit& other) const {
    return var_count_ == other.var_count_ && root_ == other.root_ && nodes_ == other.nodes_;
  }

 private:
  std::vector<Node> nodes_;
  NodeId root_;
  std::size_t var_count_;
  std::vector<VarSet> scopes_;

  struct PropertyCache {
    std::once_flag once;
    PropertyReport report;
  };
  std::shared_ptr<PropertyCache> properties_ = std::make_shared<PropertyCache>();
};

/// Append-only arena used to assemble circuits. With hash consing enabled,
/// structurally identical nodes are shared.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(std::size_t var_count, bool hash_cons = true)
      : var_count_(var_count), hash_cons_(hash_cons) {}

  NodeId leaf(Literal l);
  NodeId constant(bool value);
  NodeId conjunction(std::vector<NodeId> children);
  NodeId disjunction(std::vector<NodeId> children, std::optional<VarId> decision = std::nullopt);
  NodeId add(Node n);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }

  /// Drops nodes unreachable from root (root becomes the last node) when compact is set.
  Circuit finish(NodeId root, bool compact = true) &&;

 private:
  struct NodeHash {
    std::size_t operator()(const Node& n) const;
  };

  std::size_t var_count_;
  bool hash_cons_;
  std::vector<Node> nodes_;
  std::unordered_map<Node, NodeId, NodeHash> unique_;
};

/// Exhaustive determinism check up to this many variables; above it the
/// decision-variable witnesses are used.
inline constexpr std::size_t kExhaustiveDeterminismVars = 20;

PropertyReport check_properties(const Circuit& c);

/// Throws CircuitError naming the failed property unless c is smooth,
/// deterministic and decomposable.
void require_tractable(const Circuit& c);
void require_tractable(const PropertyReport& r);

/// Models over all var_count variables; variables outside the root's scope are free.
BigCount model_count(const Circuit& c);

/// Calls visit once per model. Throws CircuitError if more than limit models exist.
void enumerate_models(const Circuit& c, std::uint64_t limit, const std::function<void(const Assignment&)>& visit);
std::vector<Assignment> enumerate_models(const Circuit& c, std::uint64_t limit);

/// Brute-force count of satisfying assignments by Boolean evaluation (var_count <= 30).
std::uint64_t count_satisfying_brute_force(const Circuit& c);

const char* to_string(Determinism d);

}  // namespace psl
