#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "psl/circuit.hpp"
#include "psl/formula.hpp"

namespace psl {

enum class OrderStrategy { lexicographic, most_frequent_first, explicit_order };

/// Permutation of [0, var_count): the order in which variables are branched on.
struct VarOrder {
  std::vector<VarId> order;
  OrderStrategy strategy = OrderStrategy::lexicographic;

  static VarOrder lexicographic(std::size_t var_count);
  /// Variables by descending occurrence count in f, ties broken by index.
  static VarOrder most_frequent_first(const Formula& f);
  /// Throws FormulaError unless perm is a bijection on [0, perm.size()).
  static VarOrder explicit_order(std::vector<VarId> perm);
};

class CompileError : public std::runtime_error {
 public:
  CompileError(const std::string& message, std::size_t nodes_reached)
      : std::runtime_error(message), nodes_reached_(nodes_reached) {}
  std::size_t nodes_reached() const { return nodes_reached_; }

 private:
  std::size_t nodes_reached_;
};

struct CompileOptions {
  std::size_t node_budget = 10'000'000;
};

/// Shannon expansion along the order with unit propagation and a unique table
/// over residual formulas. The result is smooth, deterministic, decomposable
/// and mentions every variable; each OR node records its decision variable.
Circuit compile(const Formula& f, const VarOrder& order, const CompileOptions& opts = {});
Circuit compile(const Formula& f);

/// Makes every OR node's children range over the OR's full scope by conjoining
/// (v OR NOT v) gadgets for the missing variables. Circuits that are already
/// smooth (and constant-free below OR nodes) come back node-for-node unchanged.
Circuit smooth(const Circuit& c);

/// Conjoins gadgets so the root's scope covers all var_count variables.
Circuit extend_to_all_variables(const Circuit& c);

}  // namespace psl
